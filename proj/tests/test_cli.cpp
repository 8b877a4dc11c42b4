#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "shellscatter/shellscatter.hpp"

namespace fs = std::filesystem;
using namespace shellscatter;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("shellscatter_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Runs the CLI with `args`, discarding its output, and returns the exit code.
int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" + std::string(SHELLSCATTER_CLI_PATH) + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("smatrix table at the default and the free potential", "[cli]") {
    const auto dir = scratch("smatrix");
    REQUIRE(run("smatrix --out " + (dir / "default").string()) == 0);
    const auto t = read_csv(dir / "default" / "smatrix.csv");
    CHECK(t.header == std::vector<std::string>{"E", "S_re", "S_im", "abs_S", "delta"});
    REQUIRE(t.rows.size() == 200);
    double prev = t.rows[0][4];
    for (const auto& row : t.rows) {
        CHECK(std::abs(row[3] - 1.0) < 1e-12);
        CHECK(std::abs(row[4] - prev) < pi / 2);  // unwrapped
        prev = row[4];
    }

    REQUIRE(run("smatrix --v0 0 --out " + (dir / "free").string()) == 0);
    for (const auto& row : read_csv(dir / "free" / "smatrix.csv").rows) {
        CHECK(std::abs(row[3] - 1.0) < 1e-12);
        CHECK(std::abs(row[4]) < 1e-12);
    }

    REQUIRE(run("smatrix --out " + (dir / "again").string()) == 0);
    CHECK(slurp(dir / "again" / "smatrix.csv") == slurp(dir / "default" / "smatrix.csv"));
    const std::string text = slurp(dir / "default" / "smatrix.csv");
    CHECK(text.find('\r') == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("configuration errors exit 2 without writing anything", "[cli]") {
    const auto dir = scratch("config");
    CHECK(run("smatrix --a 3 --out " + (dir / "bad_ab").string()) == 2);
    CHECK_FALSE(fs::exists(dir / "bad_ab"));

    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(run("smatrix --config " + (dir / "broken.json").string() + " --out " + (dir / "broken").string()) == 2);
    CHECK_FALSE(fs::exists(dir / "broken"));

    std::ofstream(dir / "typo.json") << R"({"potential": {"V_0": 1.0}})";
    CHECK(run("smatrix --config " + (dir / "typo.json").string() + " --out " + (dir / "typo").string()) == 2);
    CHECK(run("smatrix --config " + (dir / "missing.json").string()) == 2);
    CHECK(run("smatrix --frobnicate 1 --out " + (dir / "flag").string()) == 2);
    CHECK(run("eigenfunction --kind bogus --E 2 --out " + (dir / "kind").string()) == 2);
    CHECK(run("verify --suite nonsense --out " + (dir / "suite").string()) == 2);
    CHECK(run("--out " + (dir / "none").string()) == 2);
    CHECK_FALSE(fs::exists(dir / "flag"));
    CHECK_FALSE(fs::exists(dir / "kind"));
    CHECK_FALSE(fs::exists(dir / "suite"));
    fs::remove_all(dir);
}

TEST_CASE("flags override the config file", "[cli]") {
    const auto dir = scratch("override");
    std::ofstream(dir / "cfg.json") << R"({"potential": {"V0": 0.0}, "grids": {"n_E": 5, "spacing": "lin"}})";
    const std::string base = "smatrix --config " + (dir / "cfg.json").string();
    REQUIRE(run(base + " --out " + (dir / "free").string()) == 0);
    REQUIRE(run(base + " --v0 4 --emax 20 --out " + (dir / "shell").string()) == 0);
    const auto free_t = read_csv(dir / "free" / "smatrix.csv");
    const auto shell_t = read_csv(dir / "shell" / "smatrix.csv");
    REQUIRE(shell_t.rows.size() == 5);
    CHECK(shell_t.rows.back()[0] == 20.0);
    CHECK(free_t.rows[2][4] == 0.0);
    CHECK(shell_t.rows[2][4] != 0.0);
    fs::remove_all(dir);
}

TEST_CASE("eigenfunction files", "[cli]") {
    const auto dir = scratch("eigen");
    const std::string out = " --out " + dir.string();
    REQUIRE(run("eigenfunction --kind chi_plus --E 2.5 --v0 0" + out) == 0);
    const std::string plus = slurp(dir / "chi_plus_E2.5.csv");
    REQUIRE(run("eigenfunction --kind free --E 2.5 --v0 0" + out) == 0);
    CHECK(slurp(dir / "free_E2.5.csv") == plus);

    REQUIRE(run("eigenfunction --kind f_minus --E 7" + out) == 0);
    const auto t = read_csv(dir / "f_minus_E7.csv");
    CHECK(t.header == std::vector<std::string>{"r", "re", "im"});
    REQUIRE(t.rows.size() == 201);
    // f- is exactly e^{-ikr} beyond b.
    const auto& row = t.rows.back();
    const cplx want = std::exp(-I * std::sqrt(7.0) * row[0]);
    CHECK(std::abs(cplx(row[1], row[2]) - want) < 1e-12);

    CHECK(run("eigenfunction --kind chi_plus --E 0" + out) == 3);
    CHECK(json::parse(std::ifstream(dir / "error.json")).at("error") == "DegenerateEnergy");
    fs::remove_all(dir);
}

TEST_CASE("green kernel refuses real energies", "[cli]") {
    const auto dir = scratch("green");
    CHECK(run("green --E 3 --E-im 0 --out " + dir.string()) == 3);
    const auto report = json::parse(std::ifstream(dir / "error.json"));
    CHECK(report.at("error") == "OnRealAxis");
    CHECK(report.at("command") == "green");

    const auto grid = " --config " + (dir / "cfg.json").string();
    std::ofstream(dir / "cfg.json") << R"({"grids": {"n_r": 11, "r_max": 5}})";
    REQUIRE(run("green --E 3 --E-im 2" + grid + " --out " + (dir / "ok").string()) == 0);
    const auto t = read_csv(dir / "ok" / "green_E3_2i.csv");
    REQUIRE(t.rows.size() == 100);
    for (const auto& row : t.rows) {
        const cplx want = green_theorem1(row[0], row[1], ComplexEnergy(cplx(3.0, 2.0)), PotentialConfig{});
        CHECK(std::abs(cplx(row[2], row[3]) - want) <= 1e-15 * std::abs(want));
    }
    fs::remove_all(dir);
}

TEST_CASE("evolve writes snapshots and a manifest", "[cli]") {
    const auto dir = scratch("evolve");
    const PotentialConfig cfg;
    const auto packet = make_bump(4.0, 1.5, cplx(1.0, 0.5), cfg);
    std::ofstream(dir / "packet.json") << to_json(packet).dump();
    // The grid reaches far enough that no mass leaves it by t = 1.
    std::ofstream(dir / "cfg.json") << R"({"grids": {"r_max": 25, "n_r": 501}})";
    const std::string args = "evolve --packet " + (dir / "packet.json").string() + " --config " +
                             (dir / "cfg.json").string() + " --times 0,1,-0.5";
    REQUIRE(run(args + " --out " + (dir / "a").string(), "SHELLSCATTER_THREADS=1") == 0);
    REQUIRE(run(args + " --out " + (dir / "b").string(), "SHELLSCATTER_THREADS=2") == 0);

    const auto manifest = json::parse(std::ifstream(dir / "a" / "evolution_manifest.json"));
    CHECK(manifest.at("times") == json({0.0, 1.0, -0.5}));
    CHECK(manifest.at("generator") == "full");
    CHECK(manifest.at("sign") == "plus");
    CHECK(manifest.at("cfg").at("V0") == 4.0);
    for (const auto& name : manifest.at("files")) {
        const std::string file = name.get<std::string>();
        CHECK(slurp(dir / "a" / file) == slurp(dir / "b" / file));
    }

    const auto t0 = read_csv(dir / "a" / "snapshot_t0.csv");
    CHECK(t0.header == std::vector<std::string>{"r", "re", "im", "abs2"});
    const double step = t0.rows[1][0] - t0.rows[0][0];
    double diff = 0.0;
    for (const auto& row : t0.rows) diff += step * std::norm(cplx(row[1], row[2]) - packet(row[0]));
    CHECK(std::sqrt(diff) < 1e-6 * l2_norm(packet));

    double mass = 0.0;
    for (const auto& row : read_csv(dir / "a" / "snapshot_t1.csv").rows) mass += step * row[3];
    CHECK(std::sqrt(mass) == Catch::Approx(l2_norm(packet)).epsilon(1e-4));

    CHECK(run("evolve --generator sideways --out " + (dir / "c").string()) == 2);
    fs::remove_all(dir);
}

TEST_CASE("verify suites and exit codes", "[cli]") {
    const auto dir = scratch("verify");
    REQUIRE(run("verify --suite unitarity-only --out " + (dir / "unitarity").string()) == 0);
    const auto report = json::parse(std::ifstream(dir / "unitarity" / "verify.json"));
    std::vector<std::string> names;
    for (const auto& c : report.at("checks")) {
        names.push_back(c.at("name"));
        CHECK(c.at("pass") == true);
        for (const char* key : {"paper_ref", "value", "tolerance"}) CHECK(c.contains(key));
    }
    CHECK(names == std::vector<std::string>{"s_matrix_unitarity", "parseval", "moller_isometry", "evolution_norm"});
    CHECK(report.at("summary").at("failed") == 0);

    REQUIRE(run("verify --suite full --v0 0 --out " + (dir / "free").string()) == 0);
    const auto free_report = json::parse(std::ifstream(dir / "free" / "verify.json"));
    CHECK(free_report.at("summary").at("failed") == 0);
    CHECK(free_report.at("checks").size() == 40);

    std::ofstream(dir / "strict.json") << R"({"tolerances": {"quadrature": 1e-20}})";
    CHECK(run("verify --suite transforms --config " + (dir / "strict.json").string() + " --out " +
              (dir / "strict").string()) == 1);
    const auto strict = json::parse(std::ifstream(dir / "strict" / "verify.json"));
    CHECK(strict.at("summary").at("failed").get<int>() > 0);
    fs::remove_all(dir);
}
