// Batch front end: S-matrix tables, eigenfunctions, Green kernels, wavepacket
// evolution and the verification suite.
//
// Exit codes: 0 success, 1 failed verification, 2 invalid configuration or
// arguments (nothing written), 3 numeric failure (error.json written).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shellscatter/shellscatter.hpp"

namespace fs = std::filesystem;
using namespace shellscatter;

namespace {

constexpr int exit_verify_failed = 1;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

struct GlobalOptions {
    std::string config_path;
    std::optional<double> a, b, v0, emin, emax;
    std::optional<std::string> out;
};

struct EigenOptions {
    std::string kind = "chi_plus";
    double E = 1.0;
};

struct GreenOptions {
    double E_re = 3.0;
    double E_im = 1.0;
};

struct EvolveOptions {
    std::string packet_path;
    std::vector<double> times{0.0, 1.0};
    std::string generator = "full";
    std::string sign = "plus";
};

struct VerifyOptions {
    std::string suite = "full";
};

RunConfig resolve_config(const GlobalOptions& g) {
    json j = json::object();
    if (!g.config_path.empty()) {
        std::ifstream is(g.config_path);
        if (!is) throw ConfigError("cannot read config file " + g.config_path);
        try {
            j = json::parse(is);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto set = [&j](const char* section, const char* key, const std::optional<double>& v) {
        if (v) j[section][key] = *v;
    };
    set("potential", "a", g.a);
    set("potential", "b", g.b);
    set("potential", "V0", g.v0);
    set("grids", "E_min", g.emin);
    set("grids", "E_max", g.emax);
    if (g.out) j["output_dir"] = *g.out;
    return run_config_from_json(j);
}

fs::path prepare_output(const RunConfig& rc) {
    const fs::path dir(rc.output_dir);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, const json& j) {
    auto os = open_output(path);
    os << j.dump(2) << '\n';
}

Sign parse_sign(const std::string& s) {
    if (s == "plus") return Sign::plus;
    if (s == "minus") return Sign::minus;
    throw ConfigError("sign must be plus or minus");
}

Generator parse_generator(const std::string& s) {
    if (s == "full") return Generator::full;
    if (s == "free") return Generator::free;
    throw ConfigError("generator must be full or free");
}

WaveKind parse_wave_kind(const std::string& s) {
    try {
        return wave_kind_from_string(s);
    } catch (const std::exception&) {
        throw ConfigError("unknown eigenfunction kind " + s);
    }
}

// ---------------------------------------------------------------------------

int cmd_smatrix(const RunConfig& rc) {
    const auto grid = rc.energy_table();
    const auto delta = phase_shift_grid(grid.E, rc.potential);
    const auto dir = prepare_output(rc);
    auto os = open_output(dir / "smatrix.csv");
    CsvWriter w(os);
    w.header({"E", "S_re", "S_im", "abs_S", "delta"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx S = s_matrix(grid.E[i], rc.potential);
        w.row({grid.E[i], S.real(), S.imag(), std::abs(S), delta[i]});
    }
    return 0;
}

int cmd_eigenfunction(const RunConfig& rc, const EigenOptions& o) {
    const WaveKind kind = parse_wave_kind(o.kind);
    const auto wave = make_wave(kind, o.E, rc.potential);
    const auto radii = rc.radii();
    std::vector<cplx> values(radii.size());
    parallel_for(radii.size(), [&](std::size_t i) { values[i] = wave(radii[i]); });
    const auto dir = prepare_output(rc);
    auto os = open_output(dir / (std::string(to_string(kind)) + "_E" + format_double(o.E) + ".csv"));
    CsvWriter w(os);
    w.header({"r", "re", "im"});
    for (std::size_t i = 0; i < radii.size(); ++i) w.row({radii[i], values[i].real(), values[i].imag()});
    return 0;
}

int cmd_green(const RunConfig& rc, const GreenOptions& o) {
    const ComplexEnergy E(cplx(o.E_re, o.E_im));
    require_off_axis(E);
    auto radii = rc.radii();
    radii.erase(radii.begin());  // the kernel needs r, s > 0
    const std::size_t n = radii.size();
    std::vector<cplx> G(n * n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) G[i * n + j] = green_theorem1(radii[i], radii[j], E, rc.potential);
    });
    const auto dir = prepare_output(rc);
    auto os = open_output(dir / ("green_E" + format_double(o.E_re) + "_" + format_double(o.E_im) + "i.csv"));
    CsvWriter w(os);
    w.header({"r", "s", "G_re", "G_im"});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w.row({radii[i], radii[j], G[i * n + j].real(), G[i * n + j].imag()});
    return 0;
}

TestFunction default_packet(const PotentialConfig& cfg) { return make_bump(cfg.b + 2.05, 2.0, 1.0, cfg); }

int cmd_evolve(const RunConfig& rc, const EvolveOptions& o) {
    const auto& cfg = rc.potential;
    const Generator generator = parse_generator(o.generator);
    const Sign sign = parse_sign(o.sign);
    TestFunction packet = default_packet(cfg);
    if (!o.packet_path.empty()) {
        std::ifstream is(o.packet_path);
        if (!is) throw ConfigError("cannot read packet file " + o.packet_path);
        try {
            packet = test_function_from_json(json::parse(is), cfg);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("packet is not valid JSON: ") + e.what());
        } catch (const SupportViolation& e) {
            throw ConfigError(std::string("packet: ") + e.what());
        }
    }
    double t_max = 0.0;
    for (double t : o.times) {
        if (!std::isfinite(t)) throw ConfigError("times must be finite");
        t_max = std::max(t_max, std::abs(t));
    }

    TransformOptions opt;
    opt.tolerance = rc.quadrature_tolerance;
    opt.extra_extent = std::max(opt.extra_extent, rc.r_max - packet.support_max());
    const auto plan = plan_evolution(packet, t_max, generator, cfg, opt);
    const EvolutionRequest probe{packet, 0.0, generator, sign};
    const auto profile = forward(probe.kind(), packet, plan.energy, cfg, rc.quadrature_tolerance);
    const auto grid = radial_uniform_grid(rc.r_max, rc.r_max / double(rc.n_r - 1), cfg);

    std::vector<SampledFunction> snapshots;
    for (double t : o.times) {
        snapshots.push_back(evolve(EvolutionRequest{profile, t, generator, sign}, grid, cfg));
        for (const auto& warning : snapshots.back().warnings) std::cerr << "t = " << t << ": " << warning << '\n';
    }
    const auto dir = prepare_output(rc);
    for (std::size_t i = 0; i < o.times.size(); ++i) {
        auto os = open_output(dir / snapshot_file_name(o.times[i]));
        write_snapshot_csv(os, snapshots[i]);
    }
    auto manifest = evolution_manifest(o.times, generator, sign, cfg);
    manifest["packet"] = to_json(packet);
    write_json(dir / "evolution_manifest.json", manifest);
    return 0;
}

int cmd_verify(const RunConfig& rc, const VerifyOptions& o) {
    if (!is_valid_suite(o.suite)) throw ConfigError("unknown suite " + o.suite);
    const auto report = run_verification(rc.potential, o.suite, {rc.closed_form_tolerance, rc.quadrature_tolerance});
    json j = to_json(report);
    j["cfg"] = to_json(rc.potential);
    const auto dir = prepare_output(rc);
    write_json(dir / "verify.json", j);
    std::cout << j.dump(2) << '\n';
    return report.all_pass() ? 0 : exit_verify_failed;
}

void report_numeric_failure(const RunConfig& rc, const std::string& command, const std::string& kind,
                            const std::string& message) {
    const json j{{"error", kind}, {"message", message}, {"command", command}};
    std::cerr << j.dump() << '\n';
    try {
        write_json(prepare_output(rc) / "error.json", j);
    } catch (const std::exception& e) {
        std::cerr << "could not write error.json: " << e.what() << '\n';
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shell-potential scattering: S-matrix, eigenfunctions, Green functions, evolution, verification"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON run configuration");
    app.add_option("--a", g.a, "inner shell radius");
    app.add_option("--b", g.b, "outer shell radius");
    app.add_option("--v0", g.v0, "barrier height V0");
    app.add_option("--emin", g.emin, "smallest table energy");
    app.add_option("--emax", g.emax, "largest table energy");
    app.add_option("--out", g.out, "output directory");

    auto* smatrix = app.add_subcommand("smatrix", "S(E) table on the configured energy grid");

    EigenOptions eo;
    auto* eigen = app.add_subcommand("eigenfunction", "sample one eigenfunction on [0, r_max]");
    eigen->add_option("--kind", eo.kind, "regular, chi_plus, chi_minus, f_plus, f_minus, sigma2 or free");
    eigen->add_option("--E", eo.E, "energy")->required();

    GreenOptions go;
    auto* green = app.add_subcommand("green", "resolvent kernel G(r, s; E) on the radial grid");
    green->add_option("--E", go.E_re, "real part of E");
    green->add_option("--E-im", go.E_im, "imaginary part of E (nonzero)");

    EvolveOptions vo;
    auto* evolve_cmd = app.add_subcommand("evolve", "evolve a wavepacket and write one snapshot per time");
    evolve_cmd->add_option("--packet", vo.packet_path, "test-function JSON");
    evolve_cmd->add_option("--times", vo.times, "comma-separated times")->delimiter(',');
    evolve_cmd->add_option("--generator", vo.generator, "full or free");
    evolve_cmd->add_option("--sign", vo.sign, "eigenbasis: plus or minus");

    VerifyOptions ver;
    auto* verify = app.add_subcommand("verify", "run the verification suite and write verify.json");
    verify->add_option("--suite", ver.suite, "full, unitarity-only or a module name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    RunConfig rc;
    try {
        rc = resolve_config(g);
    } catch (const Error& e) {
        std::cerr << e.kind() << ": " << e.what() << '\n';
        return exit_config;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (*smatrix) return cmd_smatrix(rc);
        if (*eigen) return cmd_eigenfunction(rc, eo);
        if (*green) return cmd_green(rc, go);
        if (*evolve_cmd) return cmd_evolve(rc, vo);
        if (*verify) return cmd_verify(rc, ver);
    } catch (const ConfigError& e) {
        std::cerr << e.kind() << ": " << e.what() << '\n';
        return exit_config;
    } catch (const Error& e) {
        report_numeric_failure(rc, command, e.kind(), e.what());
        return exit_numeric;
    } catch (const std::exception& e) {
        report_numeric_failure(rc, command, "Error", e.what());
        return exit_numeric;
    }
    return exit_config;
}
