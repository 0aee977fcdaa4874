#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string err;
};

class Sandbox {
public:
    Sandbox() : dir_(fs::temp_directory_path() / ("gearmr_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Sandbox() { fs::remove_all(dir_); }

    Run run(const std::string& args) const {
        const fs::path err = dir_ / "stderr.txt";
        const std::string cmd = "cd \"" + dir_.string() + "\" && \"" GEARMR_CLI_PATH "\" " + args + " > /dev/null 2> \"" +
                                err.string() + "\"";
        const int status = std::system(cmd.c_str());
        Run r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, read("stderr.txt")};
        fs::remove(err);
        return r;
    }

    std::string read(const std::string& name) const {
        std::ifstream in(dir_ / name, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    bool exists(const std::string& name) const { return fs::exists(dir_ / name); }
    std::size_t entries() const {
        return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir_), fs::directory_iterator{}));
    }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
};

std::size_t data_rows(const std::string& csv) {
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    return lines - 1;
}

}  // namespace

TEST_CASE("simulate writes the default three revolutions") {
    Sandbox box;
    const auto r = box.run("simulate --wind 13mps --damaged --seed 7 --out s.csv");
    REQUIRE(r.code == 0);
    const std::string csv = box.read("s.csv");
    CHECK(csv.rfind("time,acceleration\n", 0) == 0);
    CHECK(data_rows(csv) == 40213);
    CHECK_FALSE(box.exists("s.csv.tmp"));
}

TEST_CASE("wind without a seed is a usage error") {
    Sandbox box;
    const auto r = box.run("simulate --wind 5mps --out s.csv");
    CHECK(r.code == 1);
    CHECK(r.err.find("--seed") != std::string::npos);
    CHECK(box.entries() == 0);
}

TEST_CASE("conflicting and malformed flags exit 1 without output") {
    Sandbox box;
    CHECK(box.run("simulate --crack-angle 40 --out s.csv").code == 1);
    CHECK(box.run("simulate --wind 20mps --seed 1 --out s.csv").code == 1);
    CHECK(box.run("simulate --revolutions -1 --out s.csv").code == 1);
    CHECK(box.run("simulate --bogus --out s.csv").code == 1);
    CHECK(box.run("baseline").code == 1);
    CHECK(box.entries() == 0);
}

TEST_CASE("analyze rejects a depth the signal cannot support") {
    Sandbox box;
    REQUIRE(box.run("simulate --out s.csv").code == 0);
    const auto r = box.run("analyze --in s.csv --delay 100 --levels 20 --out-dir out");
    CHECK(r.code == 1);
    CHECK(r.err.find("min_bin_columns") != std::string::npos);
    CHECK_FALSE(box.exists("out"));
}

TEST_CASE("bad input data exits 2 and names the file") {
    Sandbox box;
    std::ofstream(box.dir() / "bad.csv") << "time,value\n0,1\n0.1,2\n0.3,3\n";
    const auto r = box.run("baseline fft --in bad.csv --out f.csv");
    CHECK(r.code == 2);
    CHECK(r.err.find("bad.csv") != std::string::npos);
    CHECK_FALSE(box.exists("f.csv"));

    const auto missing = box.run("baseline emd --in nothere.csv --out e.csv");
    CHECK(missing.code == 2);
    CHECK(missing.err.find("nothere.csv") != std::string::npos);
}

TEST_CASE("baselines and plot produce CSV and SVG") {
    Sandbox box;
    REQUIRE(box.run("simulate --revolutions 1 --out s.csv").code == 0);
    CHECK(box.run("baseline fft --in s.csv --out f.csv --plot").code == 0);
    CHECK(box.read("f.csv").rfind("omega,magnitude\n", 0) == 0);
    CHECK(box.read("f.svg").find("<svg") != std::string::npos);
    CHECK(box.run("baseline tsa --in s.csv --out t.csv").code == 0);
    CHECK(data_rows(box.read("t.csv")) == 133);
    CHECK(box.run("baseline emd --in s.csv --out e.csv").code == 0);
    CHECK(box.read("e.csv").rfind("time,imf1", 0) == 0);
    CHECK(box.run("plot --in e.csv --out e.svg --columns imf1,residue").code == 0);
    CHECK(box.read("e.svg").find("polyline") != std::string::npos);
    CHECK(box.run("plot --in e.csv --out x.svg --columns nope").code == 1);
}

TEST_CASE("detect flags the damaged desk-scale fixture") {
    Sandbox box;
    REQUIRE(box.run("simulate --wind 5mps --damaged --seed 1 --out s.csv").code == 0);
    REQUIRE(box.run("detect --in s.csv --delay 16000 --levels 10 --report r.json").code == 0);
    const auto report = nlohmann::json::parse(box.read("r.json"));
    CHECK(report["damaged"].get<bool>());
    CHECK(report["params"]["d"] == 16000);
    CHECK(report["provenance"]["input"] == "s.csv");
    CHECK(report["peak_angles_deg"].size() == report["peak_ratios"].size());
}
