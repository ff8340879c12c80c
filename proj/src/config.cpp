#include "bae/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bae/errors.hpp"
#include "bae/stability.hpp"

namespace bae {

using nlohmann::json;

namespace {

struct Ctx {
    const std::string& text;

    // best-effort line of the last path component in the source text
    int line_of(const std::string& path) const {
        if (text.empty()) return 0;
        std::string key = path.substr(path.rfind('.') == std::string::npos ? 0 : path.rfind('.') + 1);
        size_t pos = text.find("\"" + key + "\"");
        if (pos == std::string::npos) return 0;
        return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
    }

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        std::ostringstream os;
        os << "config key '" << path << "'";
        if (int l = line_of(path)) os << " (line " << l << ")";
        os << ": " << msg;
        throw ConfigError(os.str());
    }

    void allow(const json& obj, const std::string& path, const std::set<std::string>& keys) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!keys.count(it.key()))
                fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }

    bool number(const json& obj, const char* key, const std::string& path, double& out) const {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return false;
        if (!it->is_number()) fail(path + "." + key, "expected a number");
        out = it->get<double>();
        if (!std::isfinite(out)) fail(path + "." + key, "must be finite");
        return true;
    }

    bool integer(const json& obj, const char* key, const std::string& path, long long& out) const {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return false;
        if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
        out = it->get<long long>();
        return true;
    }

    bool boolean(const json& obj, const char* key, const std::string& path, bool& out) const {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return false;
        if (!it->is_boolean()) fail(path + "." + key, "expected true or false");
        out = it->get<bool>();
        return true;
    }

    // {magnitude, phase} or a plain real number
    bool complex(const json& obj, const char* key, const std::string& path, cplx& out) const {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return false;
        const std::string p = path + "." + key;
        if (it->is_number()) {
            out = it->get<double>();
            return true;
        }
        allow(*it, p, {"magnitude", "phase"});
        double mag = 0, ph = 0;
        if (!number(*it, "magnitude", p, mag)) fail(p + ".magnitude", "missing");
        number(*it, "phase", p, ph);
        if (mag < 0) fail(p + ".magnitude", "must be >= 0");
        out = std::polar(mag, ph);
        return true;
    }
};

json polar_json(cplx z) { return {{"magnitude", std::abs(z)}, {"phase", std::arg(z)}}; }

}  // namespace

json parse_document(const std::string& text, const std::string& source) {
    try {
        return json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        size_t byte = std::min<size_t>(e.byte, text.size());
        int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
        std::ostringstream os;
        os << source << ":" << line << ": JSON syntax error: " << e.what();
        throw ConfigError(os.str());
    }
}

json load_document(const std::string& path, std::string* raw_text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (raw_text) *raw_text = text;
    return parse_document(text, path);
}

void apply_override(json& doc, const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' must look like section.key=value");
    std::string path = assignment.substr(0, eq), value = assignment.substr(eq + 1);
    json v;
    try {
        v = json::parse(value);
    } catch (const json::parse_error&) {
        v = value;
    }
    json* node = &doc;
    std::stringstream ps(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ps, part, '.')) parts.push_back(part);
    for (size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].empty()) throw ConfigError("override '" + assignment + "' has an empty key");
        if (!node->is_object()) {
            if (node->is_null())
                *node = json::object();
            else
                throw ConfigError("override '" + path + "': '" + parts[i - 1] + "' is not a section");
        }
        node = &(*node)[parts[i]];
    }
    *node = v;
}

RunConfig resolve_config(const json& doc, const std::string& text) {
    Ctx c{text};
    RunConfig cfg;
    c.allow(doc, "", {"preset", "system", "pump", "detection", "regime", "grid", "simulation"});

    double preset_strength = -1;
    if (auto it = doc.find("preset"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) c.fail("preset", "expected a string");
        cfg.preset = it->get<std::string>();
        try {
            Preset p = preset(cfg.preset);
            cfg.system = p.params;
            cfg.t_f = p.t_f;
            preset_strength = p.strength;
        } catch (const ValidationError& e) {
            c.fail("preset", e.what());
        }
    }

    static const json empty = json::object();
    auto section = [&](const char* name) -> const json& {
        auto it = doc.find(name);
        return it == doc.end() || it->is_null() ? empty : *it;
    };

    const json& sys = section("system");
    c.allow(sys, "system",
            {"omega0", "cavity_length", "gamma", "omega_m", "gamma_m", "mass", "n_th"});
    c.number(sys, "omega0", "system", cfg.system.omega0);
    c.number(sys, "cavity_length", "system", cfg.system.cavity_length);
    c.number(sys, "gamma", "system", cfg.system.gamma);
    c.number(sys, "omega_m", "system", cfg.system.omega_m);
    c.number(sys, "gamma_m", "system", cfg.system.gamma_m);
    c.number(sys, "mass", "system", cfg.system.mass);
    c.number(sys, "n_th", "system", cfg.system.n_th);
    try {
        validate(cfg.system);
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        c.fail("system." + msg.substr(0, msg.find(' ')), msg);
    }

    const json& pj = section("pump");
    c.allow(pj, "pump", {"amp_plus", "amp_minus", "delta", "theta", "strength"});
    const bool has_amp = pj.contains("amp_plus") || pj.contains("amp_minus");
    if (pj.contains("strength") && !pj["strength"].is_null()) {
        if (has_amp) c.fail("pump.strength", "give either amplitudes or a strength block, not both");
        const json& sj = pj["strength"];
        c.allow(sj, "pump.strength", {"G", "epsilon", "phi_r", "phi_s"});
        double g = 0, eps = 0, pr = 0, ps = 0;
        if (!c.number(sj, "G", "pump.strength", g)) c.fail("pump.strength.G", "missing");
        c.number(sj, "epsilon", "pump.strength", eps);
        c.number(sj, "phi_r", "pump.strength", pr);
        c.number(sj, "phi_s", "pump.strength", ps);
        if (g < 0) c.fail("pump.strength.G", "must be >= 0");
        if (std::abs(eps) > 1) c.fail("pump.strength.epsilon", "must lie in [-1, 1]");
        cfg.pump = pump_for_strength(cfg.system, g, eps, pr, ps);
    } else if (!has_amp && preset_strength >= 0) {
        cfg.pump = pump_for_strength(cfg.system, preset_strength);
    }
    c.complex(pj, "amp_plus", "pump", cfg.pump.amp_plus);
    c.complex(pj, "amp_minus", "pump", cfg.pump.amp_minus);
    c.number(pj, "delta", "pump", cfg.pump.delta);
    c.number(pj, "theta", "pump", cfg.pump.theta);

    const json& dj = section("detection");
    c.allow(dj, "detection", {"t_f", "force_amp", "force_phase"});
    c.number(dj, "t_f", "detection", cfg.t_f);
    c.number(dj, "force_amp", "detection", cfg.force_amp);
    c.number(dj, "force_phase", "detection", cfg.force_phase);
    if (!(cfg.t_f > 0)) c.fail("detection.t_f", "must be positive");

    const json& rj = section("regime");
    c.allow(rj, "regime", {"sideband_factor", "damping_factor"});
    c.number(rj, "sideband_factor", "regime", cfg.regime.sideband_factor);
    c.number(rj, "damping_factor", "regime", cfg.regime.damping_factor);

    const json& gj = section("grid");
    c.allow(gj, "grid", {"nu_min", "nu_max", "points"});
    double span = 10 * (cfg.system.gamma_m > 0 ? cfg.system.gamma_m : 0.01 * cfg.system.gamma);
    cfg.grid.nu_min = -span;
    cfg.grid.nu_max = span;
    c.number(gj, "nu_min", "grid", cfg.grid.nu_min);
    c.number(gj, "nu_max", "grid", cfg.grid.nu_max);
    long long pts = cfg.grid.points;
    c.integer(gj, "points", "grid", pts);
    if (pts < 1 || pts > 10000000) c.fail("grid.points", "must lie in [1, 1e7]");
    cfg.grid.points = static_cast<int>(pts);
    if (cfg.grid.nu_max < cfg.grid.nu_min) c.fail("grid.nu_max", "must be >= nu_min");

    const json& sj = section("simulation");
    c.allow(sj, "simulation",
            {"dt", "duration", "seed", "include_2wm", "noise", "compensation", "force", "downsample",
             "envelope_downsample", "b0", "psd_segment", "psd_overlap", "overflow_factor"});
    SimConfig& sim = cfg.sim;
    c.boolean(sj, "include_2wm", "simulation", sim.include_2wm);
    c.boolean(sj, "noise", "simulation", sim.noise);
    const double wp = cfg.system.omega_m + cfg.pump.delta;
    sim.dt = sim.include_2wm ? 0.04 / cfg.system.omega_m
                             : std::min(0.1 / cfg.system.gamma, 1.0 / std::abs(wp));
    sim.duration = 1000 / cfg.system.gamma;
    sim.seed = 1;
    c.number(sj, "dt", "simulation", sim.dt);
    c.number(sj, "duration", "simulation", sim.duration);
    long long seed = 1;
    if (auto it = sj.find("seed"); it != sj.end() && !it->is_null()) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
            c.fail("simulation.seed", "expected a non-negative integer");
        sim.seed = it->get<std::uint64_t>();
    } else {
        sim.seed = static_cast<std::uint64_t>(seed);
    }
    long long ds = 1, eds = 0, seg = cfg.psd_segment;
    c.integer(sj, "downsample", "simulation", ds);
    c.integer(sj, "envelope_downsample", "simulation", eds);
    c.integer(sj, "psd_segment", "simulation", seg);
    if (ds < 1) c.fail("simulation.downsample", "must be >= 1");
    if (eds < 0) c.fail("simulation.envelope_downsample", "must be >= 0");
    if (seg < 8) c.fail("simulation.psd_segment", "must be >= 8");
    sim.downsample = static_cast<int>(ds);
    sim.envelope_downsample = static_cast<int>(eds);
    cfg.psd_segment = static_cast<int>(seg);
    c.number(sj, "psd_overlap", "simulation", cfg.psd_overlap);
    if (!(cfg.psd_overlap >= 0 && cfg.psd_overlap < 1))
        c.fail("simulation.psd_overlap", "must lie in [0, 1)");
    c.number(sj, "overflow_factor", "simulation", sim.overflow_factor);
    c.complex(sj, "b0", "simulation", sim.b0);
    if (!(sim.dt > 0)) c.fail("simulation.dt", "must be positive");
    if (!(sim.duration > 0)) c.fail("simulation.duration", "must be positive");

    if (auto it = sj.find("compensation"); it != sj.end() && !it->is_null()) {
        if (it->is_string()) {
            std::string mode = it->get<std::string>();
            if (mode == "auto")
                cfg.auto_compensation = true;
            else if (mode != "none")
                c.fail("simulation.compensation", "expected \"none\", \"auto\" or {magnitude, phase}");
        } else {
            cplx f;
            c.complex(sj, "compensation", "simulation", f);
            sim.compensation = f;
        }
    }
    if (cfg.auto_compensation) {
        sim.compensation = compensation_force(derive(cfg.system, cfg.pump), cfg.system);
    }
    if (auto it = sj.find("force"); it != sj.end() && !it->is_null()) {
        const std::string p = "simulation.force";
        c.allow(*it, p, {"amp", "phase", "t_on", "t_f"});
        ForceDrive fd;
        fd.t_f = cfg.t_f;
        c.number(*it, "amp", p, fd.amp);
        c.number(*it, "phase", p, fd.phase);
        c.number(*it, "t_on", p, fd.t_on);
        c.number(*it, "t_f", p, fd.t_f);
        if (!(fd.t_f > 0)) c.fail(p + ".t_f", "must be positive");
        sim.force = fd;
    }
    return cfg;
}

json to_json(const RunConfig& cfg) {
    json j;
    const SystemParams& s = cfg.system;
    j["system"] = {{"omega0", s.omega0},   {"cavity_length", s.cavity_length},
                   {"gamma", s.gamma},     {"omega_m", s.omega_m},
                   {"gamma_m", s.gamma_m}, {"mass", s.mass},
                   {"n_th", s.n_th}};
    j["pump"] = {{"amp_plus", polar_json(cfg.pump.amp_plus)},
                 {"amp_minus", polar_json(cfg.pump.amp_minus)},
                 {"delta", cfg.pump.delta},
                 {"theta", cfg.pump.theta}};
    j["detection"] = {{"t_f", cfg.t_f}, {"force_amp", cfg.force_amp}, {"force_phase", cfg.force_phase}};
    j["regime"] = {{"sideband_factor", cfg.regime.sideband_factor},
                   {"damping_factor", cfg.regime.damping_factor}};
    j["grid"] = {{"nu_min", cfg.grid.nu_min}, {"nu_max", cfg.grid.nu_max}, {"points", cfg.grid.points}};
    const SimConfig& m = cfg.sim;
    json sim = {{"dt", m.dt},
                {"duration", m.duration},
                {"seed", m.seed},
                {"include_2wm", m.include_2wm},
                {"noise", m.noise},
                {"downsample", m.downsample},
                {"envelope_downsample", m.envelope_downsample},
                {"b0", polar_json(m.b0)},
                {"psd_segment", cfg.psd_segment},
                {"psd_overlap", cfg.psd_overlap},
                {"overflow_factor", m.overflow_factor}};
    sim["compensation"] = m.compensation ? polar_json(*m.compensation) : json("none");
    if (m.force)
        sim["force"] = {{"amp", m.force->amp},
                        {"phase", m.force->phase},
                        {"t_on", m.force->t_on},
                        {"t_f", m.force->t_f}};
    else
        sim["force"] = nullptr;
    j["simulation"] = sim;
    return j;
}

}  // namespace bae
