#include "fermicond/harness.hpp"

#include "fermicond/hash.hpp"
#include "fermicond/parallel.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#ifndef FERMICOND_VERSION
#define FERMICOND_VERSION "0.0.0"
#endif

namespace fermicond {

using nlohmann::json;

const char* tool_version() { return FERMICOND_VERSION; }

const std::vector<std::string>& experiment_registry() {
    static const std::vector<std::string> r{"transport", "ohm",       "joule",         "measure",      "drude-compare",
                                            "levy",      "invariants", "lieb-robinson", "time-reversal"};
    return r;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

std::string model_key(const Model& m) {
    std::ostringstream os;
    os << std::setprecision(17) << "harness|d" << m.spec.d << "|l" << m.spec.l << "|";
    for (int e : m.spec.extent) os << e << ",";
    os << "|" << disorder_to_json(m.omega).dump() << "|" << m.theta << "|" << m.lambda << "|" << m.ip.describe();
    return sha256_hex(os.str());
}

TransportContext build_context(const Model& m, double beta, const EigenCache* cache) {
    return TransportContext::build(m, beta, cache, cache ? model_key(m) : std::string());
}

// one run: output directory, written files, stage timings
class Run {
public:
    Run(const std::string& name, const ExperimentConfig& cfg) : cfg_(cfg) {
        dir_ = cfg.run.out;
        std::filesystem::create_directories(dir_);
        // a stale manifest would vouch for files about to be replaced
        std::filesystem::remove(dir_ / "manifest.json");
        man_.experiment = name;
        man_.config_hash = config_hash(cfg);
        man_.tool_version = tool_version();
        if (cfg.run.cache) cache_.emplace(cfg.cache_path());
        header_ = "fermicond " + man_.tool_version + " | " + name + " | config " + man_.config_hash.substr(0, 16);
        write("config.json", [&](std::ostream& os) { os << config_to_json(cfg).dump(2) << "\n"; });
    }

    const EigenCache* cache() const { return cache_ ? &*cache_ : nullptr; }
    const std::string& header() const { return header_; }
    RunManifest& manifest() { return man_; }

    void write(const std::string& file, const std::function<void(std::ostream&)>& body) {
        std::ostringstream os;
        body(os);
        const std::string data = os.str();
        std::ofstream f(dir_ / file, std::ios::binary | std::ios::trunc);
        f << data;
        if (!f) throw Error(ErrorKind::invalid_argument, "cannot write " + (dir_ / file).string());
        man_.files.push_back({file, sha256_hex(data), data.size()});
    }

    template <class F>
    auto timed(const std::string& stage, F&& f) {
        const auto t0 = Clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            man_.timings.emplace_back(stage, std::chrono::duration<double>(Clock::now() - t0).count());
        } else {
            auto r = f();
            man_.timings.emplace_back(stage, std::chrono::duration<double>(Clock::now() - t0).count());
            return r;
        }
    }

    void gates(const std::vector<Gate>& g) { man_.gates.insert(man_.gates.end(), g.begin(), g.end()); }

    RunManifest finish() {
        man_.passed = all_pass(man_.gates);
        const std::string text = manifest_to_json(man_).dump(2) + "\n";
        const auto tmp = dir_ / "manifest.json.tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            f << text;
            if (!f) throw Error(ErrorKind::invalid_argument, "cannot write " + tmp.string());
        }
        std::filesystem::rename(tmp, dir_ / "manifest.json");
        return man_;
    }

private:
    const ExperimentConfig& cfg_;
    std::filesystem::path dir_;
    RunManifest man_;
    std::optional<EigenCache> cache_;
    std::string header_;
};

Model sample_model(const ExperimentConfig& cfg, int i) {
    const auto spec = cfg.model.spec();
    auto omega = sample_disorder({cfg.disorder.kind, derive_seed(cfg.disorder.seed, std::uint64_t(i))}, spec);
    return make_model(spec, omega, cfg.model.theta, cfg.model.lambda, cfg.model.ip);
}

Eigen::VectorXd field_w(const ExperimentConfig& cfg) {
    return Eigen::Map<const Eigen::VectorXd>(cfg.field.w.data(), Eigen::Index(cfg.field.w.size()));
}

Envelope field_env(const ExperimentConfig& cfg) {
    Envelope e;
    e.t0 = cfg.field.t0;
    e.t1 = cfg.field.t1;
    return e;
}

VectorPotential field_potential(const ExperimentConfig& cfg) {
    const int d = cfg.model.d;
    return cfg.field.shape == "flat" ? flat_pulse(d, field_w(cfg), field_env(cfg))
                                     : bump_pulse(d, field_w(cfg), field_env(cfg));
}

std::vector<double> drive_times(const ExperimentConfig& cfg) {
    return uniform_grid(cfg.field.t0, cfg.field.t0 + cfg.run.t_max, cfg.run.points);
}

std::string index_pair(int k, int q) { return std::to_string(k + 1) + std::to_string(q + 1); }

// ---- experiments ----

void exp_transport(Run& run, const ExperimentConfig& cfg) {
    const auto grid = symmetric_grid(cfg.run.t_max, cfg.run.points);
    TransportSeries ts = run.timed("series", [&] {
        if (cfg.disorder.n_samples >= 2) {
            DisorderAverageConfig dc;
            dc.spec = cfg.model.spec();
            dc.kind = cfg.disorder.kind;
            dc.master_seed = cfg.disorder.seed;
            dc.theta = cfg.model.theta;
            dc.lambda = cfg.model.lambda;
            dc.beta = cfg.model.beta;
            dc.ip = cfg.model.ip;
            dc.workers = cfg.run.workers;
            return disorder_average(dc, cfg.disorder.n_samples, grid, run.cache());
        }
        return xi_series(build_context(sample_model(cfg, 0), cfg.model.beta, run.cache()), grid);
    });
    const int d = cfg.model.d;
    run.write("xi.csv", [&](std::ostream& os) {
        os << "# " << run.header() << " | " << ts.provenance << "\nt";
        for (int k = 0; k < d; ++k)
            for (int q = 0; q < d; ++q) os << ",xi_" << index_pair(k, q);
        for (int k = 0; k < d; ++k)
            for (int q = 0; q < d; ++q) os << ",stderr_" << index_pair(k, q);
        os << "\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            os << num(grid[i]);
            for (int k = 0; k < d; ++k)
                for (int q = 0; q < d; ++q) os << "," << num(ts.xi_p[i](k, q));
            for (int k = 0; k < d; ++k)
                for (int q = 0; q < d; ++q)
                    os << "," << num(ts.xi_p_stderr.empty() ? 0.0 : ts.xi_p_stderr[i](k, q));
            os << "\n";
        }
    });
    run.write("xi_d.csv", [&](std::ostream& os) {
        os << "# " << run.header() << "\nk,q,xi_d,stderr\n";
        for (int k = 0; k < d; ++k)
            for (int q = 0; q < d; ++q)
                os << k + 1 << "," << q + 1 << "," << num(ts.xi_d(k, q)) << ","
                   << num(ts.xi_d_stderr.size() ? ts.xi_d_stderr(k, q) : 0.0) << "\n";
    });
    const std::size_t mid = grid.size() / 2;
    double sym = 0, diag = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        sym = std::max(sym, (ts.xi_p[grid.size() - 1 - i] - ts.xi_p[i].transpose()).cwiseAbs().maxCoeff());
    for (int k = 0; k < d; ++k) diag = std::max(diag, std::abs(ts.xi_d(k, k)));
    run.gates({at_most("xi(0)", ts.xi_p[mid].cwiseAbs().maxCoeff(), 0.0),
               at_most("xi(-t)-xi(t)^T", sym, 1e-10),
               at_most("|xi_d,kk|", diag, 2.0 * (cfg.model.theta + 1.0))});
}

void exp_ohm(Run& run, const ExperimentConfig& cfg) {
    if (cfg.field.shape != "flat")
        throw Error(ErrorKind::invalid_config, "field.shape: the ohm experiment needs a flat field");
    const auto times = drive_times(cfg);
    auto c = run.timed("context", [&] { return build_context(sample_model(cfg, 0), cfg.model.beta, run.cache()); });
    OhmCheck o = run.timed("drive", [&] {
        return ohm_check(c, field_env(cfg), field_w(cfg), cfg.field_l(), cfg.field.eta, times,
                         {cfg.run.dt, Integrator::cf4});
    });
    const int d = cfg.model.d;
    run.write("ohm.csv", [&](std::ostream& os) {
        os << "# " << run.header() << " | sample 0, l " << num(cfg.field_l()) << "\neta,t,k,J_p,eta_J_lin_p,J_d,eta_J_lin_d\n";
        for (std::size_t e = 0; e < o.etas.size(); ++e)
            for (std::size_t i = 0; i < times.size(); ++i)
                for (int k = 0; k < d; ++k)
                    os << num(o.etas[e]) << "," << num(times[i]) << "," << k + 1 << ","
                       << num(o.traces[e].J_p[i][k]) << "," << num(o.etas[e] * o.lin.J_p[i][k]) << ","
                       << num(o.traces[e].J_d[i][k]) << "," << num(o.etas[e] * o.lin.J_d[i][k]) << "\n";
    });
    run.write("ohm_fit.csv", [&](std::ostream& os) {
        os << "# " << run.header() << " | order " << num(o.order) << ", extrapolation error "
           << num(o.extrapolation_error) << "\neta,remainder\n";
        for (std::size_t e = 0; e < o.etas.size(); ++e) os << num(o.etas[e]) << "," << num(o.remainder[e]) << "\n";
    });
    run.gates(o.gates);
}

void exp_joule(Run& run, const ExperimentConfig& cfg) {
    const auto times = drive_times(cfg);
    auto c = run.timed("context", [&] { return build_context(sample_model(cfg, 0), cfg.model.beta, run.cache()); });
    JouleCheck j = run.timed("drive", [&] {
        return joule_check(c, field_potential(cfg), cfg.field_l(), cfg.field.eta, times, {cfg.run.dt, Integrator::cf4});
    });
    for (std::size_t e = 0; e < j.traces.size(); ++e)
        run.write("energy_" + std::to_string(e) + ".csv", [&](std::ostream& os) {
            write_energy_csv(os, j.traces[e], run.header() + " | eta " + num(cfg.field.eta[e]));
        });
    run.write("joule.csv", [&](std::ostream& os) {
        os << "# " << run.header() << " | double integral of X_l " << num(j.double_integral)
           << "\neta,S_end,P_end,Ip_end,Id_end,ratio_sites_over_4,ratio_l_d\n";
        for (std::size_t e = 0; e < j.traces.size(); ++e) {
            const auto& tr = j.traces[e];
            os << num(cfg.field.eta[e]) << "," << num(tr.S.back()) << "," << num(tr.P.back()) << ","
               << num(tr.Ip.back()) << "," << num(tr.Id.back()) << "," << num(j.ratio_sites[e]) << ","
               << num(j.ratio_ld[e]) << "\n";
        }
    });
    for (const auto& g : j.gates)
        (g.note == "literal l^d normalisation" ? run.manifest().diagnostics : run.manifest().gates).push_back(g);
}

void exp_measure(Run& run, const ExperimentConfig& cfg) {
    auto c = run.timed("context", [&] { return build_context(sample_model(cfg, 0), cfg.model.beta, run.cache()); });
    auto k = xi_kernel(c);
    auto mu = run.timed("extract", [&] { return extract_measure(k, c.spectral->hnorm); });
    run.write("measure.csv", [&](std::ostream& os) { write_measure_csv(os, mu, run.header() + " | sample 0"); });
    const auto grid = nu_plot_grid(mu);
    const auto ac = ac_measure(mu);
    const Eigen::VectorXd w = field_w(cfg).normalized();
    const double bw = std::max(0.05, 0.02 * grid.back());
    run.write("density.csv", [&](std::ostream& os) {
        os << "# " << run.header() << " | Gaussian bandwidth " << num(bw) << ", direction w\nnu,density\n";
        for (double nu : grid) os << num(nu) << "," << num(smoothed_density(ac, w, nu, bw)) << "\n";
    });
    run.gates(measure_gates(mu, k, symmetric_grid(cfg.run.t_max, cfg.run.points)));
}

void exp_drude(Run& run, const ExperimentConfig& cfg) {
    auto c = run.timed("context", [&] { return build_context(sample_model(cfg, 0), cfg.model.beta, run.cache()); });
    auto mu = extract_measure(c);
    const auto grid = nu_plot_grid(mu);
    const Eigen::VectorXd w = field_w(cfg).normalized();
    const double T = cfg.analysis.drude_T;
    DrudeCheck dc = drude_check(mu, w, T, grid);
    const auto ac = ac_measure(mu);
    const double bw = std::max(0.05, 0.02 * grid.back());
    run.write("drude.csv", [&](std::ostream& os) {
        os << "# " << run.header() << " | T " << num(T) << ", D " << num(dc.report.drude.D) << ", diameter "
           << num(dc.report.spectral_diameter) << "\nnu,measure_tail,drude_tail,measure_density,drude_density\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto& r = dc.report.rows[i];
            os << num(grid[i]) << "," << num(r.measure_tail) << "," << num(r.drude_tail) << ","
               << num(smoothed_density(ac, w, grid[i], bw)) << "," << num(drude_density(dc.report.drude, grid[i]))
               << "\n";
        }
    });
    run.gates(dc.gates);
}

void exp_levy(Run& run, const ExperimentConfig& cfg) {
    auto c = run.timed("context", [&] { return build_context(sample_model(cfg, 0), cfg.model.beta, run.cache()); });
    auto k = xi_kernel(c);
    auto mu = extract_measure(k, c.spectral->hnorm);
    const Eigen::VectorXd w = field_w(cfg).normalized();
    double anti = 0;
    for (double t : symmetric_grid(cfg.run.t_max, cfg.run.points)) anti = std::max(anti, (k.antisym(t) * w).norm());
    const LevyTriple l = from_conductivity(mu, w, anti);
    const auto& a = cfg.analysis;
    std::vector<double> alphas(a.levy_alpha_points);
    for (int i = 0; i < a.levy_alpha_points; ++i)
        alphas[i] = a.levy_alpha_points == 1 ? a.levy_alpha_max
                                             : -a.levy_alpha_max + 2 * a.levy_alpha_max * i / (a.levy_alpha_points - 1);
    std::vector<double> ct{0.0};
    ct.insert(ct.end(), a.levy_t.begin(), a.levy_t.end());
    std::sort(ct.begin(), ct.end());
    ct.erase(std::unique(ct.begin(), ct.end()), ct.end());
    LevySampleOptions opt;
    opt.workers = cfg.run.workers;
    auto rep = run.timed("sample", [&] {
        auto e = sample_paths(l, a.levy_paths, ct, cfg.disorder.seed, opt);
        return validate_char(e, l, alphas);
    });
    run.write("levy_char.csv", [&](std::ostream& os) {
        os << "# " << run.header() << " | D0 " << num(l.D0) << ", jump rate " << num(l.mass()) << ", "
           << a.levy_paths << " paths, pass fraction " << num(rep.pass_fraction) << ", componentwise "
           << num(rep.componentwise_fraction) << "\nalpha,t,mc_re,mc_im,exact,se_re,se_im,z,pass\n";
        for (const auto& r : rep.rows)
            os << num(r.alpha) << "," << num(r.t) << "," << num(r.mc_re) << "," << num(r.mc_im) << ","
               << num(r.exact) << "," << num(r.se_re) << "," << num(r.se_im) << "," << num(r.z) << ","
               << (r.pass ? 1 : 0) << "\n";
    });
    const int qpaths = std::min(a.levy_paths, 10000);
    auto qe = run.timed("quantiles", [&] {
        return sample_paths(l, qpaths, uniform_grid(0.0, ct.back(), 51), derive_seed(cfg.disorder.seed, 1u << 30), opt);
    });
    run.write("levy_quantiles.csv", [&](std::ostream& os) {
        os << "# " << run.header() << " | " << qpaths << " paths\nt,q05,q25,q50,q75,q95\n";
        for (std::size_t i = 0; i < qe.times.size(); ++i) {
            std::vector<double> v(qe.F.col(Eigen::Index(i)).data(), qe.F.col(Eigen::Index(i)).data() + qe.F.rows());
            std::sort(v.begin(), v.end());
            os << num(qe.times[i]);
            for (double q : {0.05, 0.25, 0.5, 0.75, 0.95})
                os << "," << num(v[std::min(v.size() - 1, std::size_t(q * (v.size() - 1) + 0.5))]);
            os << "\n";
        }
    });
    run.gates({at_least("levy char pass fraction", rep.pass_fraction, 0.99)});
}

void write_battery(Run& run, const std::vector<BatteryModel>& models, const std::vector<BatteryRow>& rows) {
    run.write("invariants.csv", [&](std::ostream& os) {
        os << "# " << run.header() << "\nmodel,sites,beta,theta,lambda,interaction,sample,gate,value,limit,pass\n";
        for (const auto& r : rows) {
            const auto& m = models[r.model];
            os << r.model << "," << Box(m.spec).n_sites() << "," << num(m.beta) << "," << num(m.theta) << ","
               << num(m.lambda) << "," << m.ip.describe() << "," << r.sample << "," << r.gate.name << ","
               << num(r.gate.value) << "," << num(r.gate.limit) << "," << (r.gate.pass ? 1 : 0) << "\n";
        }
    });
}

void exp_invariants(Run& run, const ExperimentConfig& cfg) {
    std::vector<BatteryModel> models;
    if (cfg.analysis.battery == "default") {
        models = default_battery(cfg.disorder.seed);
    } else {
        BatteryModel m;
        m.spec = cfg.model.spec();
        m.beta = cfg.model.beta;
        m.theta = cfg.model.theta;
        m.lambda = cfg.model.lambda;
        m.ip = cfg.model.ip;
        m.kind = cfg.disorder.kind;
        m.seed = cfg.disorder.seed;
        m.samples = cfg.disorder.n_samples;
        models.push_back(m);
    }
    BatteryOptions opt;
    opt.drive.dt = std::max(cfg.run.dt, 0.02);
    opt.lr_times = cfg.analysis.lr_times;
    opt.decay = cfg.model.decay;
    opt.grid = symmetric_grid(cfg.run.t_max, cfg.run.points);
    opt.workers = cfg.run.workers;
    opt.cache = run.cache();
    auto rows = run.timed("battery", [&] { return run_battery(models, opt); });
    write_battery(run, models, rows);
    run.gates(summarize(rows));
}

void exp_lieb_robinson(Run& run, const ExperimentConfig& cfg) {
    auto c = run.timed("context", [&] { return build_context(sample_model(cfg, 0), cfg.model.beta, run.cache()); });
    auto lr = run.timed("check", [&] {
        return lieb_robinson_bonds(c, cfg.model.theta, cfg.model.ip, cfg.model.decay, cfg.analysis.lr_times, 2, 6);
    });
    const auto& bonds = c.box.bonds();
    run.write("lr.csv", [&](std::ostream& os) {
        os << "# " << run.header() << " | current observables on bonds, sample 0\n"
           << "bond1_a,bond1_b,bond2_a,bond2_b,distance,t,lhs,rhs,satisfied\n";
        for (const auto& r : lr.rows)
            os << bonds[r.bond1].a << "," << bonds[r.bond1].b << "," << bonds[r.bond2].a << "," << bonds[r.bond2].b
               << "," << num(r.distance) << "," << num(r.t) << "," << num(r.lhs) << "," << num(r.rhs) << ","
               << (r.satisfied ? 1 : 0) << "\n";
    });
    run.gates({lr.gate});
}

void exp_time_reversal(Run& run, const ExperimentConfig& cfg) {
    const bool real = cfg.disorder.kind != DisorderKind::iid_uniform || cfg.model.theta == 0.0;
    if (!real)
        throw Error(ErrorKind::invalid_config,
                    "disorder.kind: time-reversal needs real hoppings (iid-real-hopping, deterministic-zero or theta 0)");
    const auto grid = symmetric_grid(cfg.run.t_max, cfg.run.points);
    using Row = std::vector<Gate>;
    auto rows = run.timed("samples", [&] {
        return parallel_map<Row>(cfg.disorder.n_samples, cfg.run.workers, [&](int i) {
            auto c = build_context(sample_model(cfg, i), cfg.model.beta, run.cache());
            return time_reversal_gates(c, xi_kernel(c), grid);
        });
    });
    run.write("tr.csv", [&](std::ostream& os) {
        os << "# " << run.header() << "\nsample,antisym_sup,thermal_current\n";
        for (std::size_t i = 0; i < rows.size(); ++i)
            os << i << "," << num(rows[i][0].value) << "," << num(rows[i][1].value) << "\n";
    });
    std::vector<BatteryRow> flat;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& g : rows[i]) flat.push_back({0, int(i), g});
    run.gates(summarize(flat));
}

} // namespace

json manifest_to_json(const RunManifest& m) {
    auto gates = [](const std::vector<Gate>& gs) {
        json a = json::array();
        for (const auto& g : gs)
            a.push_back({{"name", g.name},
                         {"value", g.value},
                         {"limit", g.limit},
                         {"bound", g.upper ? "max" : "min"},
                         {"pass", g.pass},
                         {"note", g.note}});
        return a;
    };
    json files = json::array();
    for (const auto& f : m.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    json timings = json::object();
    double total = 0;
    for (const auto& [k, v] : m.timings) {
        timings[k] = v;
        total += v;
    }
    timings["total"] = total;
    return {{"experiment", m.experiment},
            {"config_hash", m.config_hash},
            {"tool_version", m.tool_version},
            {"files", files},
            {"timings_s", timings},
            {"gates", gates(m.gates)},
            {"diagnostics", gates(m.diagnostics)},
            {"status", m.passed ? "ok" : "gate-failure"}};
}

RunManifest run_experiment(const std::string& name, const ExperimentConfig& cfg) {
    static const std::map<std::string, void (*)(Run&, const ExperimentConfig&)> table{
        {"transport", exp_transport},         {"ohm", exp_ohm},
        {"joule", exp_joule},                 {"measure", exp_measure},
        {"drude-compare", exp_drude},         {"levy", exp_levy},
        {"invariants", exp_invariants},       {"lieb-robinson", exp_lieb_robinson},
        {"time-reversal", exp_time_reversal},
    };
    auto it = table.find(name);
    if (it == table.end()) {
        std::string msg = "unknown experiment '" + name + "'; registry:";
        for (const auto& r : experiment_registry()) msg += " " + r;
        throw Error(ErrorKind::unknown_experiment, msg);
    }
    Run run(name, cfg);
    it->second(run, cfg);
    return run.finish();
}

// ---- battery ----

std::vector<BatteryModel> default_battery(std::uint64_t seed, int samples) {
    std::vector<BatteryModel> out;
    for (int N : {4, 6, 8})
        for (double beta : {0.5, 1.0, 2.0})
            for (double theta : {0.0, 0.5})
                for (double lambda : {0.0, 1.0})
                    for (const auto& ip : {InterparticleInteraction::none(), InterparticleInteraction::hubbard(1.0)}) {
                        BatteryModel m;
                        m.spec = LatticeSpec::chain(N);
                        m.beta = beta;
                        m.theta = theta;
                        m.lambda = lambda;
                        m.ip = ip;
                        m.seed = derive_seed(seed, out.size());
                        m.samples = samples;
                        out.push_back(m);
                    }
    return out;
}

std::vector<BatteryRow> run_battery(const std::vector<BatteryModel>& models, const BatteryOptions& opt) {
    std::vector<std::pair<int, int>> tasks;
    for (std::size_t m = 0; m < models.size(); ++m)
        for (int s = 0; s < models[m].samples; ++s) tasks.emplace_back(int(m), s);
    using Rows = std::vector<BatteryRow>;
    auto per_task = parallel_map<Rows>(int(tasks.size()), opt.workers, [&](int i) {
        const auto [mi, s] = tasks[i];
        const auto& bm = models[mi];
        auto omega = sample_disorder({bm.kind, derive_seed(bm.seed, std::uint64_t(s))}, bm.spec);
        Model model = make_model(bm.spec, omega, bm.theta, bm.lambda, bm.ip);
        auto c = build_context(model, bm.beta, opt.cache);
        auto k = xi_kernel(c);
        Rows rows;
        auto add = [&](const std::string& cat, const std::vector<Gate>& gs) {
            for (auto g : gs) {
                g.name = cat + ":" + g.name;
                rows.push_back({mi, s, g});
            }
        };
        add("transport", transport_gates(c, k, opt.grid, bm.theta));
        add("measure", measure_gates(extract_measure(k, c.spectral->hnorm), k, opt.grid));
        if (bm.kind != DisorderKind::iid_uniform || bm.theta == 0.0)
            add("time-reversal", time_reversal_gates(c, k, opt.grid));
        if (s == 0) {
            add("kms", {kms_gate(c, opt.kms_pairs, bm.seed)});
            add("work", {work_check(c, opt.work_perturbations, bm.seed, opt.drive).gate});
            const int d = c.box.dim();
            const Eigen::VectorXd w = Eigen::VectorXd::Ones(d).normalized();
            Envelope env;
            double r = 0;
            for (int x = 0; x < c.box.n_sites(); ++x)
                for (int q : c.box.site(x)) r = std::max(r, std::abs(double(q)));
            const auto times = uniform_grid(0.0, 2.0, 21);
            for (const auto& A : {flat_pulse(d, w, env), bump_pulse(d, w, env)}) {
                auto h = heat_check(c, A, opt.eta, r + 0.5, times, opt.drive);
                for (auto& g : h.gates) g.note = A.name;
                add("heat", h.gates);
            }
            add("lieb-robinson",
                {lieb_robinson_bonds(c, bm.theta, bm.ip, opt.decay, opt.lr_times, opt.lr_dmin, opt.lr_dmax).gate});
        }
        return rows;
    });
    std::vector<BatteryRow> out;
    for (auto& r : per_task) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::vector<Gate> summarize(const std::vector<BatteryRow>& rows) {
    std::vector<Gate> out;
    std::map<std::string, std::size_t> where;
    std::map<std::string, int> count, failed;
    for (const auto& r : rows) {
        const auto& g = r.gate;
        ++count[g.name];
        if (!g.pass) ++failed[g.name];
        auto it = where.find(g.name);
        if (it == where.end()) {
            where[g.name] = out.size();
            out.push_back(g);
            continue;
        }
        Gate& w = out[it->second];
        const bool worse = g.upper ? g.value > w.value : g.value < w.value;
        if ((!g.pass && w.pass) || (g.pass == w.pass && worse)) w = g;
    }
    for (auto& g : out) g.note = std::to_string(count[g.name] - failed[g.name]) + "/" + std::to_string(count[g.name]) +
                                 " pass" + (g.note.empty() ? "" : ", worst: " + g.note);
    return out;
}

} // namespace fermicond
