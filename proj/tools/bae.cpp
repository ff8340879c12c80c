// bae: command-line front end for the back-action-evading detection toolkit.
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "bae/config.hpp"
#include "bae/errors.hpp"
#include "bae/output.hpp"
#include "bae/stability.hpp"

using namespace bae;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const double nan_v = std::numeric_limits<double>::quiet_NaN();

struct Common {
    std::string config_path;
    std::string preset;
    std::vector<std::string> sets;
    std::string out_dir = ".";
};

struct Loaded {
    RunConfig cfg;
    std::string hash;
};

Loaded load(const Common& c, const std::vector<std::string>& flag_sets) {
    json doc = json::object();
    std::string text;
    if (!c.config_path.empty()) doc = load_document(c.config_path, &text);
    if (!c.preset.empty()) doc["preset"] = c.preset;
    for (const auto& s : c.sets) apply_override(doc, s);
    for (const auto& s : flag_sets) apply_override(doc, s);
    Loaded l;
    l.cfg = resolve_config(doc, text);
    l.hash = hex64(fnv1a64(text));
    return l;
}

std::string out_path(const Common& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return (fs::path(c.out_dir) / name).string();
}

void write_manifest(const Common& c, const std::string& cmd, const Loaded& l,
                    const std::vector<std::string>& outputs, const json& extra) {
    RunManifest m;
    m.command = cmd;
    m.version = BAE_VERSION;
    m.timestamp = utc_timestamp();
    m.input_hash = l.hash;
    m.config = to_json(l.cfg);
    m.outputs = outputs;
    m.extra = extra;
    std::ofstream os(out_path(c, cmd + "_manifest.json"));
    os << m.to_json().dump(2) << "\n";
}

json cjson(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::string cstr(cplx z) {
    std::ostringstream os;
    os << std::setprecision(10) << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

// "a:b:n"
std::vector<double> parse_range(const std::string& spec, bool log_spaced) {
    std::stringstream ss(spec);
    std::string a, b, n;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n))
        throw ConfigError("range '" + spec + "' must look like start:stop:count");
    double lo, hi;
    long count;
    try {
        lo = std::stod(a);
        hi = std::stod(b);
        count = std::stol(n);
    } catch (const std::exception&) {
        throw ConfigError("range '" + spec + "' has a non-numeric field");
    }
    if (count < 1) throw ConfigError("range count must be >= 1");
    if (log_spaced && (lo <= 0 || hi <= 0)) throw ConfigError("log range needs positive bounds");
    std::vector<double> v(count);
    for (long i = 0; i < count; ++i) {
        double f = count == 1 ? 0 : double(i) / (count - 1);
        v[i] = log_spaced ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                          : lo + f * (hi - lo);
    }
    return v;
}

std::vector<double> grid_of(const GridSettings& g) {
    std::vector<double> v(g.points);
    for (int i = 0; i < g.points; ++i)
        v[i] = g.points == 1 ? g.nu_min : g.nu_min + (g.nu_max - g.nu_min) * i / (g.points - 1);
    return v;
}

// ---- derive

int cmd_derive(const Common& c) {
    Loaded l = load(c, {});
    const RunConfig& cfg = l.cfg;
    DerivedParams d = derive(cfg.system, cfg.pump);
    auto warnings = validate_regime(cfg.system, cfg.regime);
    json j;
    j["x_z"] = d.x_z;
    j["g"] = d.g;
    j["d_plus"] = cjson(d.d_plus);
    j["d_minus"] = cjson(d.d_minus);
    j["G0"] = d.strength(0);
    j["beta"] = d.quad_phase_beta;
    j["phi_r"] = cfg.pump.phi_r();
    j["phi_s"] = cfg.pump.phi_s();
    j["symmetric"] = cfg.pump.is_symmetric();
    j["gamma_m_add"] = negative_damping(d, cfg.system);
    j["warnings"] = warnings;

    std::cout << std::setprecision(10);
    std::cout << "x_z         = " << d.x_z << " m\n"
              << "g           = " << d.g << " rad/s\n"
              << "D+          = " << cstr(d.d_plus) << " sqrt(photons)\n"
              << "D-          = " << cstr(d.d_minus) << " sqrt(photons)\n"
              << "G(0)        = " << d.strength(0) << " rad/s\n"
              << "gamma_m_add = " << negative_damping(d, cfg.system) << " rad/s\n"
              << "beta        = " << d.quad_phase_beta << " rad\n";
    for (const auto& w : warnings) std::cout << "warning: " << w << "\n";

    std::ofstream(out_path(c, "derive.json")) << j.dump(2) << "\n";
    write_manifest(c, "derive", l, {"derive.json"}, j);
    return 0;
}

// ---- spectrum

int cmd_spectrum(const Common& c, std::optional<double> nu_min, std::optional<double> nu_max,
                 std::optional<int> points, bool corrected, bool oracle, bool oracle_2wm) {
    std::vector<std::string> sets;
    if (nu_min) sets.push_back("grid.nu_min=" + format_double(*nu_min));
    if (nu_max) sets.push_back("grid.nu_max=" + format_double(*nu_max));
    if (points) sets.push_back("grid.points=" + std::to_string(*points));
    Loaded l = load(c, sets);
    const RunConfig& cfg = l.cfg;
    const SystemParams& p = cfg.system;
    DerivedParams d = derive(p, cfg.pump);
    DetectionConfig det = cfg.detection();
    std::vector<double> grid = grid_of(cfg.grid);
    const bool symmetric = cfg.pump.is_symmetric();
    if (!symmetric && !oracle && !oracle_2wm)
        throw AsymmetricPumpError("closed-form spectrum needs |A+| = |A-|; rerun with --oracle");

    SpectrumResult cf;
    if (symmetric) cf = spectrum(grid, det, p, cfg.pump, d, Provenance::closed_form);
    SpectrumResult orc;
    const bool use_oracle = oracle || oracle_2wm;
    if (use_oracle)
        orc = spectrum(grid, det, p, cfg.pump, d,
                       oracle_2wm ? Provenance::oracle_2wm : Provenance::oracle);

    std::vector<std::string> cols = {"nu_rad_per_s", "S_I", "S_f", "S_f_corrected"};
    if (use_oracle) {
        cols.insert(cols.end(), {"S_I_oracle", "S_f_oracle", "rel_dev", "pole"});
    }
    std::ofstream os(out_path(c, "spectrum.csv"));
    CsvWriter w(os, cols);
    double max_dev = 0;
    int poles = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row = {grid[i], symmetric ? cf.s_i[i] : nan_v,
                                   symmetric ? cf.s_f[i] : nan_v,
                                   symmetric ? cf.s_f_corrected[i] : nan_v};
        if (use_oracle) {
            bool pole = orc.pole[i] || (symmetric && cf.pole[i]);
            double dev = symmetric && !pole ? std::abs(orc.s_i[i] / cf.s_i[i] - 1) : nan_v;
            if (!std::isnan(dev)) max_dev = std::max(max_dev, dev);
            poles += pole;
            row.insert(row.end(), {orc.s_i[i], orc.s_f[i], dev, pole ? 1.0 : 0.0});
        }
        w.row(row);
    }

    json extra;
    extra["provenance"] = symmetric ? "closed-form" : to_string(orc.provenance);
    if (use_oracle) {
        extra["oracle"] = to_string(orc.provenance);
        extra["max_rel_deviation"] = symmetric ? json(max_dev) : json(nullptr);
        extra["pole_rows"] = poles;
    }
    if (symmetric && std::abs(std::sin(det.angle())) > 1e-15 && d.strength(0) > 0) {
        ForceLimit f = min_detectable_force(det, p, cfg.pump, d, corrected);
        extra["force_limit"] = {{"corrected", corrected},       {"f_min", f.f_min},
                                {"f_sql", f.f_sql},             {"ratio", f.ratio},
                                {"reference_ratio", f.reference_ratio}};
    }
    write_manifest(c, "spectrum", l, {"spectrum.csv"}, extra);
    return 0;
}

// ---- sweep

const std::vector<std::string> sweep_params = {"G", "t_F", "epsilon", "theta_minus_phi_r", "n_th"};
const std::vector<std::string> sweep_metrics = {"fmin_ratio", "fmin_ratio_corrected", "reference_ratio",
                                                "s_i",        "net_damping",          "ba_residual",
                                                "signal"};

double metric_value(const std::string& m, const RunConfig& cfg, double nu) {
    const SystemParams& p = cfg.system;
    DerivedParams d = derive(p, cfg.pump);
    DetectionConfig det = cfg.detection();
    const bool sym = cfg.pump.is_symmetric();
    if (m == "fmin_ratio") return min_detectable_force(det, p, cfg.pump, d, false).ratio;
    if (m == "fmin_ratio_corrected") return min_detectable_force(det, p, cfg.pump, d, true).ratio;
    if (m == "reference_ratio") return min_detectable_force(det, p, cfg.pump, d, false).reference_ratio;
    if (m == "net_damping") return stability_report(p, cfg.pump, d).net_damping;
    if (m == "ba_residual") return back_action_residual(nu, p, cfg.pump, d);
    if (m == "s_i") {
        if (sym) return noise_psd(nu, det, p, cfg.pump, d);
        return current_psd(synodyne_compose(oracle_transfer(nu, p, d, false).t, cfg.pump, det), p.n_th);
    }
    if (m == "signal") {
        if (sym) return std::abs(signal_current(nu, det, p, cfg.pump, d));
        CurrentTransfer ct = synodyne_compose(oracle_transfer(nu, p, d, false).t, cfg.pump, det);
        return std::abs(composed_signal_transfer(ct, det, d) * force_quadrature(nu, det, p, d));
    }
    throw ConfigError("unknown metric '" + m + "'");
}

RunConfig with_param(RunConfig cfg, const std::string& param, double v) {
    if (param == "G") {
        cfg.pump = pump_with_strength(cfg.system, cfg.pump, v);
    } else if (param == "t_F") {
        cfg.t_f = v;
    } else if (param == "epsilon") {
        double g0 = derive(cfg.system, cfg.pump).strength(0);
        if (!(g0 > 0)) throw ConfigError("sweeping epsilon needs a nonzero pump");
        PumpConfig p = pump_for_strength(cfg.system, g0, v, cfg.pump.phi_r(), cfg.pump.phi_s());
        p.delta = cfg.pump.delta;
        p.theta = cfg.pump.theta;
        cfg.pump = p;
    } else if (param == "theta_minus_phi_r") {
        cfg.pump.theta = cfg.pump.phi_r() + v;
    } else if (param == "n_th") {
        cfg.system.n_th = v;
    } else {
        throw ConfigError("unknown sweep parameter '" + param + "'");
    }
    return cfg;
}

int cmd_sweep(const Common& c, const std::string& param, const std::string& range, bool log_spaced,
              std::vector<std::string> metrics, std::optional<double> nu_opt, int jobs) {
    if (std::find(sweep_params.begin(), sweep_params.end(), param) == sweep_params.end())
        throw ConfigError("unknown sweep parameter '" + param + "' (allowed: G, t_F, epsilon, "
                          "theta_minus_phi_r, n_th)");
    if (metrics.empty()) metrics = {"fmin_ratio"};
    for (const auto& m : metrics)
        if (std::find(sweep_metrics.begin(), sweep_metrics.end(), m) == sweep_metrics.end())
            throw ConfigError("unknown metric '" + m + "'");
    Loaded l = load(c, {});
    const double nu = nu_opt ? *nu_opt : 0.1 * l.cfg.system.gamma;
    std::vector<double> values = parse_range(range, log_spaced);
    std::vector<std::vector<double>> rows(values.size());
    std::vector<std::string> errors(values.size());

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next++) < values.size();) {
            std::vector<double> r = {values[i]};
            try {
                RunConfig cfg = with_param(l.cfg, param, values[i]);
                for (const auto& m : metrics) r.push_back(metric_value(m, cfg, nu));
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                errors[i] = e.what();
                r.resize(metrics.size() + 1, nan_v);
            }
            rows[i] = r;
        }
    };
    jobs = std::max(1, jobs);
    std::vector<std::thread> pool;
    std::exception_ptr fail;
    std::mutex fail_mu;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            try {
                worker();
            } catch (...) {
                std::lock_guard<std::mutex> lk(fail_mu);
                if (!fail) fail = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (fail) std::rethrow_exception(fail);

    std::vector<std::string> cols = {param};
    cols.insert(cols.end(), metrics.begin(), metrics.end());
    std::ofstream os(out_path(c, "sweep.csv"));
    CsvWriter w(os, cols);
    int nerr = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        w.row(rows[i]);
        if (!errors[i].empty()) {
            ++nerr;
            std::cerr << "warning: " << param << " = " << values[i] << ": " << errors[i] << "\n";
        }
    }
    json extra = {{"param", param}, {"metrics", metrics}, {"nu", nu}, {"failed_points", nerr}};
    write_manifest(c, "sweep", l, {"sweep.csv"}, extra);
    return 0;
}

// ---- stability

int cmd_stability(const Common& c, const std::string& g_range) {
    Loaded l = load(c, {});
    const RunConfig& cfg = l.cfg;
    const SystemParams& p = cfg.system;
    DerivedParams d = derive(p, cfg.pump);
    StabilityReport r = stability_report(p, cfg.pump, d);

    json j;
    j["G0"] = d.strength(0);
    j["gamma_m_add"] = r.gamma_m_add;
    j["net_damping"] = r.net_damping;
    j["stable"] = r.stable;
    j["g_threshold"] = r.g_threshold;
    j["g_threshold_with_imbalance"] = r.g_threshold_with_imbalance;
    j["second_harmonic"] = {{"b_minus2", cjson(r.second.b_minus2)},
                            {"b_plus2", cjson(r.second.b_plus2)},
                            {"x_over_xz_minus2", cjson(r.second.q2)}};
    j["d_tilde_plus"] = cjson(r.d_tilde_plus);
    j["d_tilde_minus"] = cjson(r.d_tilde_minus);
    j["perturbative"] = r.perturbative;
    j["compensation_force"] = {{"re", r.compensation_force.real()},
                               {"im", r.compensation_force.imag()},
                               {"magnitude", std::abs(r.compensation_force)},
                               {"phase", std::arg(r.compensation_force)}};
    try {
        Compensation comp = compensation_imbalance(p, d, d.strength(0));
        j["compensation_imbalance"] = {{"epsilon", comp.epsilon},
                                       {"ba_residual", comp.residual},
                                       {"residual_freq", comp.residual_freq}};
    } catch (const RootFindError& e) {
        j["compensation_imbalance"] = {{"error", e.what()}};
    }

    std::vector<double> gs;
    if (g_range.empty()) {
        double centre = r.g_threshold > 0 ? r.g_threshold : std::max(d.strength(0), p.gamma);
        gs = parse_range(format_double(0.1 * centre) + ":" + format_double(10 * centre) + ":41", true);
    } else {
        gs = parse_range(g_range, true);
    }
    std::ofstream os(out_path(c, "stability.csv"));
    CsvWriter w(os, {"G", "gamma_m_add", "net_damping", "stable"});
    for (double g : gs) {
        DerivedParams dg = derive(p, pump_with_strength(p, cfg.pump, g));
        StabilityReport rg = stability_report(p, cfg.pump, dg);
        w.row({g, rg.gamma_m_add, rg.net_damping, rg.stable ? 1.0 : 0.0});
    }
    std::ofstream(out_path(c, "stability.json")) << j.dump(2) << "\n";
    std::cout << std::setprecision(10) << "gamma_m_add = " << r.gamma_m_add
              << " rad/s\nnet_damping = " << r.net_damping
              << " rad/s\nstable      = " << (r.stable ? "yes" : "no")
              << "\nG_th        = " << r.g_threshold << " rad/s\n";
    write_manifest(c, "stability", l, {"stability.json", "stability.csv"}, j);
    return 0;
}

// ---- simulate

int cmd_simulate(const Common& c, const std::vector<std::string>& sets, bool compare) {
    Loaded l = load(c, sets);
    const RunConfig& cfg = l.cfg;
    const SystemParams& p = cfg.system;
    TimeSeries s;
    try {
        s = simulate(p, cfg.pump, cfg.sim);
    } catch (const InstabilityHalt& h) {
        json extra = {{"halted", true}, {"halt_time", h.halt_time}, {"growth_rate", h.growth_rate}};
        write_manifest(c, "simulate", l, {}, extra);
        throw;
    }
    for (const auto& w : s.warnings) std::cerr << "warning: " << w << "\n";
    json meta = {{"seed", cfg.sim.seed}, {"input_hash", l.hash}};
    write_series(out_path(c, "series.bin"), s, meta);
    std::vector<std::string> outputs = {"series.bin"};
    json extra = {{"steps", std::llround(cfg.sim.duration / cfg.sim.dt)},
                  {"current_samples", s.current.size()}};

    try {
        PsdEstimate e = estimate_psd(s, cfg.psd_segment, cfg.psd_overlap);
        DerivedParams d = derive(p, cfg.pump);
        DetectionConfig det = cfg.detection();
        std::vector<std::string> cols = {"omega_rad_per_s", "nu_rad_per_s", "S_I_estimate"};
        if (compare) cols.push_back("S_I_analytic");
        std::ofstream os(out_path(c, "psd.csv"));
        CsvWriter w(os, cols);
        for (size_t i = 0; i < e.omega.size(); ++i) {
            double nu = e.omega[i] - d.omega_p;
            std::vector<double> row = {e.omega[i], nu, e.psd[i]};
            if (compare) {
                double a = nan_v;
                try {
                    if (cfg.pump.is_symmetric())
                        a = noise_psd(nu, det, p, cfg.pump, d);
                    else
                        a = current_psd(
                            synodyne_compose(oracle_transfer(nu, p, d, false).t, cfg.pump, det),
                            p.n_th);
                } catch (const PoleError&) {
                }
                row.push_back(a);
            }
            w.row(row);
        }
        outputs.push_back("psd.csv");
        extra["psd_segments"] = e.segments;
        extra["psd_rel_error"] = e.rel_error;
    } catch (const InsufficientDataError& e) {
        std::cerr << "warning: " << e.what() << "; psd.csv not written\n";
    }
    write_manifest(c, "simulate", l, outputs, extra);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Back-action-evading dichromatic optomechanical force detection toolkit", "bae"};
    app.set_version_flag("--version", std::string(BAE_VERSION));
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", common.config_path, "JSON config file");
        sub->add_option("--preset", common.preset, "paper-like | fast-test");
        sub->add_option("--set", common.sets, "override, e.g. system.gamma_m=0 (repeatable)");
        sub->add_option("-o,--out", common.out_dir, "output directory")->capture_default_str();
    };

    auto* derive_cmd = app.add_subcommand("derive", "print derived parameters");
    add_common(derive_cmd);

    auto* spec_cmd = app.add_subcommand("spectrum", "noise and force spectra on a grid");
    add_common(spec_cmd);
    std::optional<double> nu_min, nu_max;
    std::optional<int> points;
    bool corrected = false, oracle = false, oracle_2wm = false;
    spec_cmd->add_option("--nu-min", nu_min, "grid start (rad/s)");
    spec_cmd->add_option("--nu-max", nu_max, "grid end (rad/s)");
    spec_cmd->add_option("--points", points, "grid points");
    spec_cmd->add_flag("--corrected", corrected, "force limit with the residual back-action term");
    spec_cmd->add_flag("--oracle", oracle, "add linear-system oracle columns");
    spec_cmd->add_flag("--oracle-2wm", oracle_2wm, "oracle including the +-2 omega_m channels");

    auto* sweep_cmd = app.add_subcommand("sweep", "one-parameter sweep of sensitivity metrics");
    add_common(sweep_cmd);
    std::string param, range;
    std::vector<std::string> metrics;
    bool log_spaced = false;
    std::optional<double> sweep_nu;
    int jobs = 1;
    sweep_cmd->add_option("--param", param, "G | t_F | epsilon | theta_minus_phi_r | n_th")->required();
    sweep_cmd->add_option("--range", range, "start:stop:count")->required();
    sweep_cmd->add_flag("--log", log_spaced, "logarithmic spacing");
    sweep_cmd->add_option("--metric", metrics, "metric column(s)");
    sweep_cmd->add_option("--nu", sweep_nu, "detection-frame frequency for s_i, ba_residual, signal");
    sweep_cmd->add_option("--jobs", jobs, "worker threads")->capture_default_str();

    auto* stab_cmd = app.add_subcommand("stability", "negative damping, threshold and compensation");
    add_common(stab_cmd);
    std::string g_range;
    stab_cmd->add_option("--g-range", g_range, "log-spaced G sweep start:stop:count");

    auto* sim_cmd = app.add_subcommand("simulate", "time-domain stochastic simulation");
    add_common(sim_cmd);
    std::optional<double> dt, duration;
    std::optional<std::uint64_t> seed;
    std::optional<int> segment;
    bool with_2wm = false, no_noise = false, compensate = false, compare = false;
    sim_cmd->add_option("--dt", dt, "integration step (s)");
    sim_cmd->add_option("--duration", duration, "simulated time (s)");
    sim_cmd->add_option("--seed", seed, "RNG seed");
    sim_cmd->add_option("--segment", segment, "Welch segment length");
    sim_cmd->add_flag("--include-2wm", with_2wm, "keep the 2 omega_m ponderomotive terms");
    sim_cmd->add_flag("--no-noise", no_noise, "deterministic run");
    sim_cmd->add_flag("--compensate", compensate, "apply the prescribed 2 omega_m classical drive");
    sim_cmd->add_flag("--compare", compare, "add the analytic S_I column to psd.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*derive_cmd) return cmd_derive(common);
        if (*spec_cmd) return cmd_spectrum(common, nu_min, nu_max, points, corrected, oracle, oracle_2wm);
        if (*sweep_cmd) return cmd_sweep(common, param, range, log_spaced, metrics, sweep_nu, jobs);
        if (*stab_cmd) return cmd_stability(common, g_range);
        if (*sim_cmd) {
            std::vector<std::string> sets;
            if (dt) sets.push_back("simulation.dt=" + format_double(*dt));
            if (duration) sets.push_back("simulation.duration=" + format_double(*duration));
            if (seed) sets.push_back("simulation.seed=" + std::to_string(*seed));
            if (segment) sets.push_back("simulation.psd_segment=" + std::to_string(*segment));
            if (with_2wm) sets.push_back("simulation.include_2wm=true");
            if (no_noise) sets.push_back("simulation.noise=false");
            if (compensate) sets.push_back("simulation.compensation=\"auto\"");
            return cmd_simulate(common, sets, compare);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InstabilityHalt& e) {
        std::cerr << "instability halt: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
