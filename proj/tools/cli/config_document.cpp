#include "config_document.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "georeg/errors.hpp"

namespace georeg::cli {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 9> kRequired = {"a",  "b", "i",           "d_u",  "t0",
                                                       "k1", "v", "t_0_mission", "r_min"};

constexpr std::array<std::string_view, 23> kOptional = {
    "sigma_match", "a_c",           "l",          "t0_pair",   "b_thr",          "t_c",
    "rho",         "mode",          "n",          "t_exe_first", "shot_interval", "terrain",
    "db_tiles",    "origin_lat_deg", "origin_lon_deg", "heading_deg", "altitude", "geodesy_mode",
    "drift_model", "stochastic",    "retry_on_failure", "trials", "seed"};

std::size_t line_at(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first `"key" :` in the raw text, or 1 when not found.
std::size_t line_of_key(const std::string& text, std::string_view key) {
    const std::string quoted = "\"" + std::string(key) + "\"";
    std::size_t pos = 0;
    while ((pos = text.find(quoted, pos)) != std::string::npos) {
        std::size_t after = pos + quoted.size();
        while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
        if (after < text.size() && text[after] == ':') return line_at(text, pos);
        pos = after;
    }
    return 1;
}

class Reader {
public:
    Reader(const std::string& text, const json& doc) : text_(text), doc_(doc) {}

    double number(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_number()) fail(key, "must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(key, "must be finite");
        return x;
    }

    double number_or(std::string_view key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    long long integer(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_number_integer()) fail(key, "must be an integer");
        return v.get<long long>();
    }

    std::uint64_t unsigned_integer(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_number_unsigned()) fail(key, "must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string string(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_string()) fail(key, "must be a string");
        return v.get<std::string>();
    }

    bool boolean(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_boolean()) fail(key, "must be true or false");
        return v.get<bool>();
    }

    bool has(std::string_view key) const { return doc_.contains(std::string(key)); }

    const json& at(std::string_view key) const {
        const auto it = doc_.find(std::string(key));
        if (it == doc_.end()) fail(key, "missing");
        return *it;
    }

    [[noreturn]] void fail(std::string_view key, const std::string& what) const {
        throw ConfigError(line_of_key(text_, key), "key '" + std::string(key) + "' " + what);
    }

private:
    const std::string& text_;
    const json& doc_;
};

TerrainModel parse_terrain(const std::string& text, const json& node) {
    const std::size_t line = line_of_key(text, "terrain");
    if (!node.is_object()) throw ConfigError(line, "key 'terrain' must be an object");
    const Reader r(text, node);
    for (const auto& [k, _] : node.items()) {
        static constexpr std::array<std::string_view, 7> allowed = {"density",  "origin_x", "origin_y", "cell_size",
                                                                    "nx", "ny", "densities"};
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            throw ConfigError(line_of_key(text, k), "unknown terrain key '" + k + "'");
        }
    }
    if (r.has("density")) return TerrainModel::uniform(r.number("density"));
    const json& cells = r.at("densities");
    if (!cells.is_array()) r.fail("densities", "must be an array of numbers");
    std::vector<double> values;
    for (const auto& c : cells) {
        if (!c.is_number()) r.fail("densities", "must be an array of numbers");
        values.push_back(c.get<double>());
    }
    const long long nx = r.integer("nx");
    const long long ny = r.integer("ny");
    if (nx <= 0 || ny <= 0) r.fail("nx", "nx and ny must be positive");
    return TerrainModel(r.number_or("origin_x", 0.0), r.number_or("origin_y", 0.0), r.number("cell_size"),
                        static_cast<std::size_t>(nx), static_cast<std::size_t>(ny), std::move(values));
}

double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(line_at(text, e.byte == 0 ? 0 : e.byte - 1), std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError(1, "config must be a JSON object");

    for (const auto& [k, _] : doc.items()) {
        const bool known = std::find(kRequired.begin(), kRequired.end(), k) != kRequired.end() ||
                           std::find(kOptional.begin(), kOptional.end(), k) != kOptional.end();
        if (!known) throw ConfigError(line_of_key(text, k), "unknown key '" + k + "'");
    }
    for (std::string_view k : kRequired) {
        if (!doc.contains(std::string(k))) {
            throw ConfigError(1, "missing required key '" + std::string(k) + "'");
        }
    }

    const Reader r(text, doc);
    RunConfig cfg;
    SimConfig& sim = cfg.sim;
    ModeParams& p = sim.params;
    p.a = r.number("a");
    p.b = r.number("b");
    p.I = r.number("i");
    p.D_U = r.number("d_u");
    p.t0 = r.number("t0");
    p.K1 = r.number("k1");
    p.v = r.number("v");
    p.T0 = r.number("t_0_mission");
    p.R_min = r.number("r_min");

    sim.sigma_match = r.number_or("sigma_match", 24.49);
    sim.timing.A_c = r.number_or("a_c", 234e-6);
    sim.timing.L = r.number_or("l", 9e-6);
    sim.timing.t0_pair = r.number_or("t0_pair", 1e-6);
    sim.timing.B = r.number_or("b_thr", 5e-6);
    sim.timing.t_c = r.number_or("t_c", 0.0);
    sim.timing.rho = r.number_or("rho", 0.0);

    if (r.has("mode")) {
        const auto mode = parse_coupling_mode(r.string("mode"));
        if (!mode) r.fail("mode", "must be one of sequential, parallel, combined");
        sim.mode = *mode;
    }
    if (r.has("n")) sim.n_relatives = r.integer("n");
    if (r.has("t_exe_first")) sim.t_exe_first = r.number("t_exe_first");
    sim.shot_interval = r.number_or("shot_interval", p.t0);
    if (r.has("terrain")) {
        try {
            sim.terrain = parse_terrain(text, r.at("terrain"));
        } catch (const Error& e) {
            throw ConfigError(line_of_key(text, "terrain"), e.what());
        }
    }
    if (r.has("db_tiles")) sim.database.capacity = r.unsigned_integer("db_tiles");
    sim.database.tile_a = p.a;
    sim.database.tile_b = p.b;
    sim.database.origin.lat = deg(r.number_or("origin_lat_deg", 0.0));
    sim.database.origin.lon = deg(r.number_or("origin_lon_deg", 0.0));
    sim.database.origin.heading = deg(r.number_or("heading_deg", 0.0));
    sim.database.origin.alt = r.number_or("altitude", 0.0);
    if (r.has("geodesy_mode")) {
        const std::string m = r.string("geodesy_mode");
        if (m == "strict") sim.geodesy_mode = GeodesyMode::Strict;
        else if (m == "physical") sim.geodesy_mode = GeodesyMode::Physical;
        else r.fail("geodesy_mode", "must be strict or physical");
    }
    if (r.has("drift_model")) {
        const std::string m = r.string("drift_model");
        if (m == "unit") sim.drift_model = DriftModel::UnitDrift;
        else if (m == "matches") sim.drift_model = DriftModel::Matches;
        else r.fail("drift_model", "must be unit or matches");
    }
    if (r.has("stochastic")) sim.stochastic = r.boolean("stochastic");
    if (r.has("retry_on_failure")) sim.continue_after_failure = r.boolean("retry_on_failure");
    if (r.has("trials")) {
        const long long trials = r.integer("trials");
        if (trials < 1) r.fail("trials", "must be at least 1");
        sim.trials = static_cast<std::size_t>(trials);
    }
    if (r.has("seed")) sim.seed = r.unsigned_integer("seed");

    // Range checks reported against the offending key.
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 9> fields = {{
        {"a", "a"}, {"b", "b"}, {"I", "i"}, {"D_U", "d_u"}, {"t0", "t0"},
        {"K1", "k1"}, {"v", "v"}, {"T0", "t_0_mission"}, {"R_min", "r_min"}}};
    try {
        sim.validate();
    } catch (const Error& e) {
        const std::string msg = e.what();
        std::size_t line = 1;
        for (const auto& [field, key] : fields) {
            if (msg.ends_with("ModeParams." + std::string(field))) line = line_of_key(text, key);
        }
        throw ConfigError(line, msg);
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

}  // namespace georeg::cli
