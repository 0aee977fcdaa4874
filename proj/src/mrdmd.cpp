#include "gearmr/mrdmd.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "gearmr/error.hpp"
#include "gearmr/io.hpp"

namespace gearmr {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t node_seed(std::uint64_t base, std::size_t level, std::size_t bin) {
    return splitmix(base ^ splitmix((static_cast<std::uint64_t>(level) << 40) ^ bin));
}

bool is_slow(std::complex<double> omega, double bin_duration, double rho) {
    return std::abs(omega.imag()) / (2.0 * std::numbers::pi) * bin_duration <= rho;
}

struct Pending {
    std::size_t level;
    std::size_t bin;
    std::size_t begin;
    std::size_t count;
    std::vector<std::shared_ptr<const ModalTerm>> ancestors;
};

MrDmdNode compute_node(const DelayPair& pair, const MrDmdParams& params, const Pending& p) {
    MrDmdNode node;
    node.level = p.level;
    node.bin = p.bin;
    node.column_begin = p.begin;
    node.column_end = p.begin + p.count;
    const double dt = pair.dt();
    node.t_lo = pair.t_start() + static_cast<double>(p.begin) * dt;
    node.t_hi = pair.t_start() + static_cast<double>(p.begin + p.count) * dt;
    const double duration = static_cast<double>(p.count) * dt;

    const HankelSnapshots op(pair.series().samples(), pair.rows(), p.begin, p.count, p.ancestors);
    DmdOptions opts = params.dmd_options;
    opts.seed = node_seed(params.dmd_options.seed, p.level, p.bin);

    detail::DmdFactors f;
    try {
        f = detail::dmd_factors(op, dt, params.rank_policy, opts);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateSnapshot) throw;
        node.degenerate = true;
        node.retained.modes.resize(static_cast<Eigen::Index>(pair.rows()), 0);
        node.retained.dt = dt;
        node.retained.t_start = node.t_lo;
        node.retained.first_snapshot = op.column(0);
        return node;
    }
    node.candidate_modes = static_cast<std::size_t>(f.eigenvalues.size());
    std::vector<std::size_t> keep;
    for (Eigen::Index k = 0; k < f.frequencies.size(); ++k)
        if (is_slow(f.frequencies[k], duration, params.rho)) keep.push_back(static_cast<std::size_t>(k));
    node.retained = detail::materialize(f, keep, node.t_lo);
    if (!keep.empty()) {
        auto term = std::make_shared<ModalTerm>();
        term->modes = node.retained.modes;
        term->amplitudes = node.retained.amplitudes;
        term->frequencies = node.retained.frequencies;
        term->dt = dt;
        term->origin = p.begin;
        node.term = std::move(term);
    }
    return node;
}

bool wanted(std::span<const std::size_t> only, std::size_t begin, std::size_t count) {
    if (only.empty()) return true;
    return std::any_of(only.begin(), only.end(),
                       [&](std::size_t i) { return i >= begin && i < begin + count; });
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                fn(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

MrDmdTree::MrDmdTree(MrDmdParams params, std::size_t delay, std::size_t columns, double dt,
                     double t_start, std::vector<MrDmdNode> nodes)
    : params_(std::move(params)), delay_(delay), columns_(columns), dt_(dt), t_start_(t_start),
      nodes_(std::move(nodes)) {}

const MrDmdNode* MrDmdTree::find(std::size_t level, std::size_t bin) const {
    for (const auto& n : nodes_)
        if (n.level == level && n.bin == bin) return &n;
    return nullptr;
}

const MrDmdNode& MrDmdTree::node_at(std::size_t level, std::size_t i) const {
    if (level < 1 || level > levels())
        fail(ErrorKind::InvalidArgument, "level " + std::to_string(level) + " outside 1.." +
                                             std::to_string(levels()));
    if (i >= columns_)
        fail(ErrorKind::InvalidArgument, "snapshot index " + std::to_string(i) +
                                             " outside the tree's " + std::to_string(columns_) +
                                             " columns");
    for (const auto& n : nodes_)
        if (n.level == level && n.contains(i)) return n;
    fail(ErrorKind::InvalidArgument, "the node covering column " + std::to_string(i) + " at level " +
                                         std::to_string(level) + " was not computed");
}

std::size_t min_columns_for(std::size_t levels, std::size_t min_bin_columns) {
    return min_bin_columns << (levels - 1);
}

void check_mrdmd_params(const MrDmdParams& params, std::size_t columns) {
    if (params.levels < 1 || params.levels > 40)
        fail(ErrorKind::InvalidArgument, "levels must lie in 1..40");
    if (!(params.rho > 0.0)) fail(ErrorKind::InvalidArgument, "rho must be positive");
    if (params.min_bin_columns < 1)
        fail(ErrorKind::InvalidArgument, "min_bin_columns must be positive");
    const std::size_t deepest = columns >> (params.levels - 1);
    if (deepest < params.min_bin_columns)
        fail(ErrorKind::InvalidArgument,
             "levels=" + std::to_string(params.levels) + " leaves " + std::to_string(deepest) +
                 " columns in the deepest bins, below min_bin_columns=" +
                 std::to_string(params.min_bin_columns) + " (needs at least " +
                 std::to_string(min_columns_for(params.levels, params.min_bin_columns)) +
                 " snapshot columns, have " + std::to_string(columns) + ")");
}

MrDmdTree mrdmd(const DelayPair& pair, const MrDmdParams& params,
                std::span<const std::size_t> only_columns) {
    check_mrdmd_params(params, pair.columns());
    for (std::size_t i : only_columns)
        if (i >= pair.columns())
            fail(ErrorKind::InvalidArgument, "requested column " + std::to_string(i) +
                                                 " outside 0.." + std::to_string(pair.columns() - 1));

    std::vector<MrDmdNode> nodes;
    std::vector<Pending> current{Pending{1, 1, 0, pair.columns(), {}}};
    for (std::size_t level = 1; level <= params.levels && !current.empty(); ++level) {
        std::vector<MrDmdNode> done(current.size());
        parallel_for(current.size(), params.threads,
                     [&](std::size_t k) { done[k] = compute_node(pair, params, current[k]); });

        std::vector<Pending> next;
        for (std::size_t k = 0; k < current.size(); ++k) {
            const Pending& p = current[k];
            if (level < params.levels) {
                auto ancestors = p.ancestors;
                if (done[k].term) ancestors.push_back(done[k].term);
                const std::size_t left = p.count / 2;
                if (wanted(only_columns, p.begin, left))
                    next.push_back({level + 1, 2 * p.bin - 1, p.begin, left, ancestors});
                if (wanted(only_columns, p.begin + left, p.count - left))
                    next.push_back({level + 1, 2 * p.bin, p.begin + left, p.count - left, ancestors});
            }
            nodes.push_back(std::move(done[k]));
        }
        current = std::move(next);
    }
    return MrDmdTree(params, pair.delay(), pair.columns(), pair.dt(), pair.t_start(),
                     std::move(nodes));
}

DmdResult slow_filter(const DmdResult& result, double bin_duration, double rho) {
    if (!(bin_duration > 0.0)) fail(ErrorKind::InvalidArgument, "bin duration must be positive");
    std::vector<std::size_t> keep;
    for (Eigen::Index k = 0; k < result.frequencies.size(); ++k)
        if (is_slow(result.frequencies[k], bin_duration, rho)) keep.push_back(static_cast<std::size_t>(k));
    return select_modes(result, keep);
}

Eigen::VectorXd level_component(const MrDmdTree& tree, std::size_t level, std::size_t i,
                                double* imaginary_norm) {
    const MrDmdNode& node = tree.node_at(level, i);
    const auto n = static_cast<Eigen::Index>(tree.delay() + 1);
    if (imaginary_norm) *imaginary_norm = 0.0;
    if (!node.term) return Eigen::VectorXd::Zero(n);
    const Eigen::VectorXcd v = node.term->modes * node.term->weights(i);
    if (imaginary_norm) *imaginary_norm = v.imag().norm();
    return v.real();
}

Eigen::VectorXd partial_reconstruction(const MrDmdTree& tree, std::span<const std::size_t> levels,
                                       std::size_t i) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tree.delay() + 1));
    for (std::size_t l : levels) sum += level_component(tree, l, i);
    return sum;
}

Eigen::VectorXd residual(const MrDmdTree& tree, const DelayPair& pair, std::size_t i) {
    if (pair.delay() != tree.delay() || pair.columns() != tree.columns())
        fail(ErrorKind::InvalidArgument, "delay pair does not match the tree");
    const auto snap = pair.snapshot(i);
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(snap.data(), static_cast<Eigen::Index>(snap.size()));
    for (std::size_t l = 1; l <= tree.levels(); ++l) r -= level_component(tree, l, i);
    return r;
}

std::string tree_to_json(const MrDmdTree& tree) {
    using nlohmann::json;
    json doc;
    doc["delay"] = tree.delay();
    doc["columns"] = tree.columns();
    doc["dt"] = tree.dt();
    doc["t_start"] = tree.t_start();
    doc["levels"] = tree.levels();
    doc["rho"] = tree.params().rho;
    doc["complete"] = tree.complete();
    json nodes = json::array();
    for (const auto& n : tree.nodes()) {
        json e;
        e["level"] = n.level;
        e["bin"] = n.bin;
        e["t_lo"] = n.t_lo;
        e["t_hi"] = n.t_hi;
        e["column_range"] = {n.column_begin, n.column_end};
        e["rank_used"] = n.retained.rank_used;
        e["candidate_modes"] = n.candidate_modes;
        e["retained_modes"] = n.retained.size();
        e["degenerate"] = n.degenerate;
        json ev = json::array();
        json om = json::array();
        for (std::size_t k = 0; k < n.retained.size(); ++k) {
            const auto lam = n.retained.eigenvalues[static_cast<Eigen::Index>(k)];
            ev.push_back({lam.real(), lam.imag()});
            om.push_back(std::abs(n.retained.frequencies[static_cast<Eigen::Index>(k)]));
        }
        e["eigenvalues"] = std::move(ev);
        e["omega_abs"] = std::move(om);
        nodes.push_back(std::move(e));
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

void write_node_modes_csv(const MrDmdNode& node, const std::filesystem::path& path) {
    std::ostringstream out;
    const auto m = node.retained.modes.cols();
    for (Eigen::Index k = 0; k < m; ++k) {
        if (k) out << ',';
        out << "mode" << k << "_re,mode" << k << "_im";
    }
    out << '\n';
    for (Eigen::Index r = 0; r < node.retained.modes.rows(); ++r) {
        for (Eigen::Index k = 0; k < m; ++k) {
            if (k) out << ',';
            out << format_double(node.retained.modes(r, k).real()) << ','
                << format_double(node.retained.modes(r, k).imag());
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

}  // namespace gearmr
