#include "gyrodrift/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

namespace gyrodrift {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& what) { throw ConfigError("config: " + what); }

void check_keys(const ordered_json& o, const std::string& section,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : o.items()) {
        bool known = false;
        for (const char* k : allowed) known = known || item.key() == k;
        if (!known) bad("unknown key '" + item.key() + "' in " + section);
    }
}

const ordered_json* get_section(const ordered_json& root, const char* key) {
    if (!root.contains(key)) return nullptr;
    const auto& v = root.at(key);
    if (!v.is_object()) bad(std::string(key) + " must be an object");
    return &v;
}

double get_num(const ordered_json* o, const std::string& section, const char* key,
               double dflt) {
    if (!o || !o->contains(key)) return dflt;
    const auto& v = o->at(key);
    if (!v.is_number()) bad(section + "." + key + " must be a number");
    return v.get<double>();
}

int get_int(const ordered_json* o, const std::string& section, const char* key,
            int dflt) {
    if (!o || !o->contains(key)) return dflt;
    const auto& v = o->at(key);
    if (!v.is_number_integer()) bad(section + "." + key + " must be an integer");
    return v.get<int>();
}

std::string get_str(const ordered_json* o, const std::string& section, const char* key,
                    const std::string& dflt) {
    if (!o || !o->contains(key)) return dflt;
    const auto& v = o->at(key);
    if (!v.is_string()) bad(section + "." + key + " must be a string");
    return v.get<std::string>();
}

RunMode parse_mode(const std::string& s) {
    if (s == "kinetic") return RunMode::kinetic;
    if (s == "limit") return RunMode::limit;
    if (s == "sweep") return RunMode::sweep;
    if (s == "compare") return RunMode::compare;
    bad("mode must be one of kinetic, limit, sweep, compare (got '" + s + "')");
}

void require_pos(double v, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v)) bad(field + " must be positive and finite");
}

} // namespace

const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::kinetic: return "kinetic";
        case RunMode::limit: return "limit";
        case RunMode::sweep: return "sweep";
        case RunMode::compare: return "compare";
    }
    return "?";
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);

    ordered_json root;
    try {
        root = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    if (!root.is_object()) bad("top level must be an object");
    check_keys(root, "top level",
               {"scenario", "mode", "grid", "physics", "magnetic", "initial",
                "background_width", "dt_max", "snapshots", "epsilons", "output",
                "seed", "threads"});

    RunConfig cfg;
    cfg.scenario = get_str(&root, "top level", "scenario", cfg.scenario);
    cfg.mode = parse_mode(get_str(&root, "top level", "mode", "kinetic"));

    if (const auto* g = get_section(root, "grid")) {
        check_keys(*g, "grid", {"L", "Nx", "v_max", "Nv"});
        cfg.L = get_num(g, "grid", "L", cfg.L);
        cfg.Nx = get_int(g, "grid", "Nx", cfg.Nx);
        cfg.v_max = get_num(g, "grid", "v_max", cfg.v_max);
        cfg.Nv = get_int(g, "grid", "Nv", cfg.Nv);
    }

    if (const auto* p = get_section(root, "physics")) {
        check_keys(*p, "physics", {"q", "m", "sigma", "tau", "eps0", "epsilon", "T"});
        cfg.params.q = get_num(p, "physics", "q", cfg.params.q);
        cfg.params.m = get_num(p, "physics", "m", cfg.params.m);
        cfg.params.sigma = get_num(p, "physics", "sigma", cfg.params.sigma);
        cfg.params.tau = get_num(p, "physics", "tau", cfg.params.tau);
        cfg.params.eps0 = get_num(p, "physics", "eps0", cfg.params.eps0);
        cfg.params.epsilon = get_num(p, "physics", "epsilon", cfg.params.epsilon);
        cfg.params.T = get_num(p, "physics", "T", cfg.params.T);
    }

    if (const auto* m = get_section(root, "magnetic")) {
        check_keys(*m, "magnetic", {"kind", "B0", "amplitude", "width"});
        const std::string kind = get_str(m, "magnetic", "kind", "uniform");
        if (kind == "uniform")
            cfg.magnetic.kind = MagneticSpec::Kind::uniform;
        else if (kind == "bump")
            cfg.magnetic.kind = MagneticSpec::Kind::bump;
        else
            bad("magnetic.kind must be uniform or bump (got '" + kind + "')");
        cfg.magnetic.B0 = get_num(m, "magnetic", "B0", cfg.magnetic.B0);
        cfg.magnetic.amplitude = get_num(m, "magnetic", "amplitude", cfg.magnetic.amplitude);
        cfg.magnetic.width = get_num(m, "magnetic", "width", cfg.magnetic.width);
    }

    if (const auto* i = get_section(root, "initial")) {
        check_keys(*i, "initial",
                   {"kind", "c1", "c2", "radius", "width", "mass", "u1", "u2"});
        const std::string kind = get_str(i, "initial", "kind", "gaussian");
        if (kind == "gaussian")
            cfg.init.kind = InitialCondition::Kind::gaussian;
        else if (kind == "ring")
            cfg.init.kind = InitialCondition::Kind::ring;
        else
            bad("initial.kind must be gaussian or ring (got '" + kind + "')");
        cfg.init.c1 = get_num(i, "initial", "c1", cfg.init.c1);
        cfg.init.c2 = get_num(i, "initial", "c2", cfg.init.c2);
        cfg.init.radius = get_num(i, "initial", "radius", cfg.init.radius);
        cfg.init.width = get_num(i, "initial", "width", cfg.init.width);
        cfg.init.mass = get_num(i, "initial", "mass", cfg.init.mass);
        cfg.init.u1 = get_num(i, "initial", "u1", cfg.init.u1);
        cfg.init.u2 = get_num(i, "initial", "u2", cfg.init.u2);
    }

    cfg.background_width =
        get_num(&root, "top level", "background_width", cfg.background_width);
    cfg.dt_max = get_num(&root, "top level", "dt_max", cfg.dt_max);
    cfg.snapshots = get_int(&root, "top level", "snapshots", cfg.snapshots);
    cfg.output = get_str(&root, "top level", "output", cfg.output);
    cfg.threads = get_int(&root, "top level", "threads", cfg.threads);

    if (root.contains("seed")) {
        const auto& v = root.at("seed");
        if (!v.is_number_unsigned()) bad("seed must be a nonnegative integer");
        cfg.seed = v.get<std::uint64_t>();
    }

    if (root.contains("epsilons")) {
        const auto& v = root.at("epsilons");
        if (!v.is_array()) bad("epsilons must be an array of numbers");
        for (const auto& e : v) {
            if (!e.is_number()) bad("epsilons must be an array of numbers");
            cfg.epsilons.push_back(e.get<double>());
        }
    }

    // invariants beyond shape
    validate_params(cfg.params);
    if (!std::isfinite(cfg.params.T) || cfg.params.T < 0.0)
        bad("physics.T must be finite and nonnegative");
    require_pos(cfg.dt_max, "dt_max");
    require_pos(cfg.background_width, "background_width");
    require_pos(cfg.init.width, "initial.width");
    require_pos(cfg.init.mass, "initial.mass");
    if (cfg.init.kind == InitialCondition::Kind::ring)
        require_pos(cfg.init.radius, "initial.radius");
    if (cfg.snapshots < 1) bad("snapshots must be at least 1");
    if (cfg.threads < 1) bad("threads must be at least 1");
    if (cfg.output.empty()) bad("output must not be empty");

    for (size_t k = 0; k < cfg.epsilons.size(); ++k) {
        const double e = cfg.epsilons[k];
        if (!(e > 0.0) || e > 1.0) bad("epsilons entries must lie in (0, 1]");
        if (k > 0 && !(e < cfg.epsilons[k - 1]))
            bad("epsilons must be strictly decreasing");
    }
    if (cfg.mode == RunMode::sweep && cfg.epsilons.empty())
        bad("sweep mode needs a nonempty epsilons list");

    // grid invariants, via the same constructors the run will use
    if (cfg.mode == RunMode::limit)
        make_spatial_grid(cfg.L, cfg.Nx);
    else
        make_grids(cfg.params, cfg.L, cfg.Nx, cfg.v_max, cfg.Nv);

    return cfg;
}

std::string render_config(const RunConfig& cfg) {
    ordered_json j;
    j["scenario"] = cfg.scenario;
    j["mode"] = to_string(cfg.mode);
    j["grid"] = {{"L", cfg.L}, {"Nx", cfg.Nx}, {"v_max", cfg.v_max}, {"Nv", cfg.Nv}};
    j["physics"] = {{"q", cfg.params.q},         {"m", cfg.params.m},
                    {"sigma", cfg.params.sigma}, {"tau", cfg.params.tau},
                    {"eps0", cfg.params.eps0},   {"epsilon", cfg.params.epsilon},
                    {"T", cfg.params.T}};
    j["magnetic"] = {
        {"kind", cfg.magnetic.kind == MagneticSpec::Kind::bump ? "bump" : "uniform"},
        {"B0", cfg.magnetic.B0},
        {"amplitude", cfg.magnetic.amplitude},
        {"width", cfg.magnetic.width}};
    j["initial"] = {
        {"kind", cfg.init.kind == InitialCondition::Kind::ring ? "ring" : "gaussian"},
        {"c1", cfg.init.c1},
        {"c2", cfg.init.c2},
        {"radius", cfg.init.radius},
        {"width", cfg.init.width},
        {"mass", cfg.init.mass},
        {"u1", cfg.init.u1},
        {"u2", cfg.init.u2}};
    j["background_width"] = cfg.background_width;
    j["dt_max"] = cfg.dt_max;
    j["snapshots"] = cfg.snapshots;
    if (!cfg.epsilons.empty()) j["epsilons"] = cfg.epsilons;
    j["output"] = cfg.output;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j.dump(2) + "\n";
}

void write_resolved_config(const RunConfig& cfg, const std::string& dir) {
    const std::string path = dir + "/resolved-config.json";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << render_config(cfg);
    if (!out) throw IoError("write failed on " + path);
}

} // namespace gyrodrift
