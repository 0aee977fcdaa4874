#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gearmr/dmd.hpp"
#include "gearmr/snapshots.hpp"
#include "gearmr/timeseries.hpp"

namespace gearmr {

struct MrDmdParams {
    std::size_t levels = 1;
    /// A mode is slow when it completes at most rho cycles within its bin.
    double rho = 1.0;
    RankPolicy rank_policy{};
    std::size_t min_bin_columns = 4;
    /// Worker threads for sibling bins; 0 uses the hardware concurrency.
    /// Results do not depend on this value.
    std::size_t threads = 0;
    DmdOptions dmd_options{};
};

struct MrDmdNode {
    std::size_t level = 1;  // 1-based
    std::size_t bin = 1;    // 1-based within the level
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t column_begin = 0;  // snapshot columns [column_begin, column_end)
    std::size_t column_end = 0;
    DmdResult retained;            // slow modes only
    std::size_t candidate_modes = 0;  // modes before slow filtering
    bool degenerate = false;          // rank collapse; nothing retained
    std::shared_ptr<const ModalTerm> term;

    std::size_t columns() const noexcept { return column_end - column_begin; }
    bool contains(std::size_t i) const noexcept { return i >= column_begin && i < column_end; }
};

class MrDmdTree {
public:
    MrDmdTree(MrDmdParams params, std::size_t delay, std::size_t columns, double dt,
              double t_start, std::vector<MrDmdNode> nodes);

    const MrDmdParams& params() const noexcept { return params_; }
    std::size_t delay() const noexcept { return delay_; }
    std::size_t columns() const noexcept { return columns_; }
    double dt() const noexcept { return dt_; }
    double t_start() const noexcept { return t_start_; }
    std::size_t levels() const noexcept { return params_.levels; }

    /// Nodes ordered by (level, bin). A pruned tree holds only the nodes
    /// whose bins contain the columns it was built for.
    const std::vector<MrDmdNode>& nodes() const noexcept { return nodes_; }
    bool complete() const noexcept { return nodes_.size() == (std::size_t{1} << levels()) - 1; }

    /// Node at `level` whose bin contains column i. Throws InvalidArgument
    /// if the column is out of range or the node was pruned.
    const MrDmdNode& node_at(std::size_t level, std::size_t i) const;
    const MrDmdNode* find(std::size_t level, std::size_t bin) const;

private:
    MrDmdParams params_;
    std::size_t delay_;
    std::size_t columns_;
    double dt_;
    double t_start_;
    std::vector<MrDmdNode> nodes_;
};

/// Validate params against the snapshot column count; throws
/// InvalidArgument naming the min_bin_columns requirement.
void check_mrdmd_params(const MrDmdParams& params, std::size_t columns);

/// Smallest column count m that supports `levels` with `min_bin_columns`.
std::size_t min_columns_for(std::size_t levels, std::size_t min_bin_columns);

/// Recursive multi-resolution DMD.
///
/// If `only_columns` is non-empty, only nodes whose bins contain one of
/// those columns are computed; each retained node is identical to the
/// corresponding node of the full tree.
MrDmdTree mrdmd(const DelayPair& pair, const MrDmdParams& params,
                std::span<const std::size_t> only_columns = {});

/// Modes with |Im omega| / (2 pi) * bin_duration <= rho, amplitudes refit to
/// the first snapshot.
DmdResult slow_filter(const DmdResult& result, double bin_duration, double rho);

/// p^l_i: retained content of the level-l bin containing column i.
Eigen::VectorXd level_component(const MrDmdTree& tree, std::size_t level, std::size_t i,
                                double* imaginary_norm = nullptr);

/// Sum of level components over `levels`.
Eigen::VectorXd partial_reconstruction(const MrDmdTree& tree, std::span<const std::size_t> levels,
                                       std::size_t i);

/// r_i = y(t_i) - sum over all levels of p^l_i.
Eigen::VectorXd residual(const MrDmdTree& tree, const DelayPair& pair, std::size_t i);

/// JSON document with one entry per node.
std::string tree_to_json(const MrDmdTree& tree);

/// Mode vectors of one node as CSV, a re/im column pair per mode.
void write_node_modes_csv(const MrDmdNode& node, const std::filesystem::path& path);

}  // namespace gearmr
