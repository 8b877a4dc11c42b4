#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shellscatter/errors.hpp"
#include "shellscatter/evolution.hpp"
#include "shellscatter/testspace.hpp"
#include "shellscatter/transforms.hpp"
#include "shellscatter/units.hpp"

namespace shellscatter {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// CSV

/// Comma-separated rows with LF endings; doubles use format_double.
class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) os_ << (i ? "," : "") << names[i];
        os_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << format_double(values[i]);
        os_ << '\n';
    }

  private:
    std::ostream& os_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::invalid_argument("missing CSV column " + name);
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

inline CsvTable read_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("empty CSV");
    t.header = split_csv_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != t.header.size()) throw std::invalid_argument("ragged CSV row: " + line);
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open " + path.string());
    return read_csv(is);
}

/// Opens a file for writing in binary mode, so line endings stay LF.
inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

// ---------------------------------------------------------------------------
// PotentialConfig

inline json to_json(const PotentialConfig& cfg) {
    return {{"a", cfg.a}, {"b", cfg.b}, {"V0", cfg.V0}, {"hbar", cfg.hbar}, {"mass", cfg.mass}};
}

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

} // namespace detail

/// Missing keys keep their defaults; unknown keys are rejected.
inline PotentialConfig potential_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"a", "b", "V0", "hbar", "mass"}, "potential");
    PotentialConfig cfg;
    detail::read_field(j, "a", cfg.a, "potential");
    detail::read_field(j, "b", cfg.b, "potential");
    detail::read_field(j, "V0", cfg.V0, "potential");
    detail::read_field(j, "hbar", cfg.hbar, "potential");
    detail::read_field(j, "mass", cfg.mass, "potential");
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// TestFunction

/// {bumps: [{center, halfwidth, amplitude_re, amplitude_im}], r_max}. Only
/// plain bump sums (no differential polynomial) have this form; r_max is
/// null when the supports are unbounded.
inline json to_json(const TestFunction& f) {
    if (!f.is_plain()) throw std::invalid_argument("only plain bump sums can be serialized");
    json bumps = json::array();
    for (const auto& b : f.bumps())
        bumps.push_back({{"center", b.center},
                         {"halfwidth", b.halfwidth},
                         {"amplitude_re", b.amplitude.real()},
                         {"amplitude_im", b.amplitude.imag()}});
    json out{{"bumps", bumps}};
    const bool bounded = !f.empty() && f.support_bound() > f.support_max();
    out["r_max"] = bounded ? json(f.support_bound()) : json(nullptr);
    return out;
}

inline TestFunction test_function_from_json(const json& j, const PotentialConfig& cfg) {
    detail::reject_unknown_keys(j, {"bumps", "r_max"}, "test function");
    if (!j.contains("bumps") || !j.at("bumps").is_array()) throw ConfigError("test function needs a bumps array");
    double r_max = std::numeric_limits<double>::infinity();
    if (j.contains("r_max") && !j.at("r_max").is_null()) detail::read_field(j, "r_max", r_max, "test function");
    std::vector<Bump> bumps;
    for (const auto& jb : j.at("bumps")) {
        detail::reject_unknown_keys(jb, {"center", "halfwidth", "amplitude_re", "amplitude_im"}, "bump");
        if (!jb.contains("center") || !jb.contains("halfwidth")) throw ConfigError("bump needs center and halfwidth");
        Bump b;
        double re = 1.0, im = 0.0;
        detail::read_field(jb, "center", b.center, "bump");
        detail::read_field(jb, "halfwidth", b.halfwidth, "bump");
        detail::read_field(jb, "amplitude_re", re, "bump");
        detail::read_field(jb, "amplitude_im", im, "bump");
        b.amplitude = {re, im};
        bumps.push_back(b);
    }
    if (bumps.empty()) throw ConfigError("test function has no bumps");
    return make_test_function(bumps, cfg, r_max);
}

// ---------------------------------------------------------------------------
// EnergyProfile: CSV `E,weight,value_re,value_im` plus a JSON sidecar.

inline void write_profile_csv(std::ostream& os, const EnergyProfile& p) {
    CsvWriter w(os);
    w.header({"E", "weight", "value_re", "value_im"});
    for (std::size_t i = 0; i < p.size(); ++i)
        w.row({p.grid.E[i], p.grid.w[i], p.values[i].real(), p.values[i].imag()});
}

inline json profile_sidecar(const EnergyProfile& p) {
    return {{"kind", to_string(p.kind)},
            {"cfg_hash", config_hash_hex(p.cfg)},
            {"E_min", p.grid.E_min()},
            {"E_max", p.grid.E_max()},
            {"tolerance", p.tolerance}};
}

inline void save_profile(const std::filesystem::path& csv_path, const EnergyProfile& p) {
    auto os = open_output(csv_path);
    write_profile_csv(os, p);
    auto side = open_output(std::filesystem::path(csv_path).replace_extension(".json"));
    side << profile_sidecar(p).dump(2) << '\n';
}

/// Reads a profile back; the sidecar's cfg_hash must match cfg.
inline EnergyProfile load_profile(const std::filesystem::path& csv_path, const PotentialConfig& cfg) {
    std::ifstream side(std::filesystem::path(csv_path).replace_extension(".json"));
    if (!side) throw ConfigError("missing profile sidecar for " + csv_path.string());
    const json meta = json::parse(side);
    if (meta.at("cfg_hash").get<std::string>() != config_hash_hex(cfg))
        throw ConfigError("profile was computed for a different potential configuration");
    const auto table = read_csv(csv_path);
    const std::size_t cE = table.column("E"), cw = table.column("weight");
    const std::size_t cre = table.column("value_re"), cim = table.column("value_im");
    EnergyProfile p;
    p.kind = transform_kind_from_string(meta.at("kind").get<std::string>());
    p.cfg = cfg;
    p.tolerance = meta.at("tolerance").get<double>();
    for (const auto& row : table.rows) {
        p.grid.E.push_back(row[cE]);
        p.grid.k.push_back(std::sqrt(cfg.c2() * row[cE]));
        p.grid.w.push_back(row[cw]);
        p.values.emplace_back(row[cre], row[cim]);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Radial samples and evolution snapshots: CSV `r,re,im,abs2`.

inline void write_snapshot_csv(std::ostream& os, const SampledFunction& u) {
    CsvWriter w(os);
    w.header({"r", "re", "im", "abs2"});
    for (std::size_t i = 0; i < u.size(); ++i)
        w.row({u.grid.r[i], u.values[i].real(), u.values[i].imag(), std::norm(u.values[i])});
}

inline std::string snapshot_file_name(double time) { return "snapshot_t" + format_double(time) + ".csv"; }

inline json evolution_manifest(const std::vector<double>& times, Generator generator, Sign sign,
                               const PotentialConfig& cfg) {
    json files = json::array();
    for (double t : times) files.push_back(snapshot_file_name(t));
    return {{"times", times},
            {"generator", to_string(generator)},
            {"sign", sign == Sign::plus ? "plus" : "minus"},
            {"cfg", to_json(cfg)},
            {"files", files}};
}

// ---------------------------------------------------------------------------
// RunConfig

enum class Spacing { lin, log };

struct RunConfig {
    PotentialConfig potential;
    double E_min = 1e-3;
    double E_max = 1e3;
    std::size_t n_E = 200;
    Spacing spacing = Spacing::log;
    double r_max = 10.0;
    std::size_t n_r = 201;
    double closed_form_tolerance = 1e-12;
    double quadrature_tolerance = 1e-6;
    std::string output_dir = ".";

    void validate() const {
        potential.validate();
        if (!(E_min > 0.0)) throw ConfigError("grids.E_min must be > 0");
        if (!(E_max > E_min) || !std::isfinite(E_max)) throw ConfigError("grids.E_max must exceed E_min");
        if (n_E < 2 || n_r < 2) throw ConfigError("grid sizes must be >= 2");
        if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ConfigError("grids.r_max must be > 0");
        if (!(closed_form_tolerance > 0.0) || !(quadrature_tolerance > 0.0))
            throw ConfigError("tolerances must be > 0");
        if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
    }

    EnergyGrid energy_table() const {
        return spacing == Spacing::log ? log_energy_grid(E_min, E_max, n_E, potential)
                                       : linear_energy_grid(E_min, E_max, n_E, potential);
    }

    /// n_r equally spaced radii on [0, r_max].
    std::vector<double> radii() const {
        std::vector<double> r(n_r);
        for (std::size_t i = 0; i < n_r; ++i) r[i] = i + 1 == n_r ? r_max : r_max * double(i) / double(n_r - 1);
        return r;
    }
};

inline json to_json(const RunConfig& rc) {
    return {{"potential", to_json(rc.potential)},
            {"grids",
             {{"E_min", rc.E_min},
              {"E_max", rc.E_max},
              {"n_E", rc.n_E},
              {"spacing", rc.spacing == Spacing::log ? "log" : "lin"},
              {"r_max", rc.r_max},
              {"n_r", rc.n_r}}},
            {"tolerances", {{"closed_form", rc.closed_form_tolerance}, {"quadrature", rc.quadrature_tolerance}}},
            {"output_dir", rc.output_dir}};
}

/// Parses and validates; every failure is a ConfigError.
inline RunConfig run_config_from_json(const json& j) {
    detail::reject_unknown_keys(j, {"potential", "grids", "tolerances", "output_dir"}, "config");
    RunConfig rc;
    if (j.contains("potential")) rc.potential = potential_from_json(j.at("potential"));
    if (j.contains("grids")) {
        const json& g = j.at("grids");
        detail::reject_unknown_keys(g, {"E_min", "E_max", "n_E", "spacing", "r_max", "n_r"}, "grids");
        detail::read_field(g, "E_min", rc.E_min, "grids");
        detail::read_field(g, "E_max", rc.E_max, "grids");
        detail::read_field(g, "r_max", rc.r_max, "grids");
        for (auto [key, dst] : {std::pair{"n_E", &rc.n_E}, std::pair{"n_r", &rc.n_r}}) {
            if (!g.contains(key)) continue;
            if (!g.at(key).is_number_integer() || g.at(key).get<long long>() < 0)
                throw ConfigError(std::string("grids.") + key + " must be a non-negative integer");
            *dst = g.at(key).get<std::size_t>();
        }
        std::string spacing = rc.spacing == Spacing::log ? "log" : "lin";
        detail::read_field(g, "spacing", spacing, "grids");
        if (spacing == "log") rc.spacing = Spacing::log;
        else if (spacing == "lin") rc.spacing = Spacing::lin;
        else throw ConfigError("grids.spacing must be lin or log");
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        detail::reject_unknown_keys(t, {"closed_form", "quadrature"}, "tolerances");
        detail::read_field(t, "closed_form", rc.closed_form_tolerance, "tolerances");
        detail::read_field(t, "quadrature", rc.quadrature_tolerance, "tolerances");
    }
    detail::read_field(j, "output_dir", rc.output_dir, "config");
    rc.validate();
    return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return run_config_from_json(j);
}

} // namespace shellscatter
