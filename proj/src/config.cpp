#include "fermicond/config.hpp"

#include "fermicond/equilibrium.hpp"
#include "fermicond/hash.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace fermicond {

using nlohmann::json;

LatticeSpec ModelBlock::spec() const {
    if (!sizes.empty()) return LatticeSpec::rect(sizes);
    LatticeSpec s;
    s.d = d;
    s.l = l;
    return s;
}

double ExperimentConfig::field_l() const {
    if (field.l > 0) return field.l;
    Box box(model.spec());
    double r = 0;
    for (int i = 0; i < box.n_sites(); ++i)
        for (int c : box.site(i)) r = std::max(r, std::abs(double(c)));
    return r + 0.5;
}

std::filesystem::path ExperimentConfig::cache_path() const {
    if (const char* env = std::getenv("FERMICOND_CACHE_DIR"); env && *env) return env;
    if (!run.cache_dir.empty()) return run.cache_dir;
    return EigenCache::default_dir();
}

namespace {

// reads one block, collecting "block.key: reason" messages
class Reader {
public:
    Reader(const json& root, std::string block, std::vector<std::string>& errs) : block_(std::move(block)), errs_(errs) {
        if (!root.contains(block_)) return;
        const json& b = root.at(block_);
        if (!b.is_object()) {
            errs_.push_back(block_ + ": must be an object");
            return;
        }
        obj_ = &b;
    }

    ~Reader() {
        if (!obj_) return;
        for (auto it = obj_->begin(); it != obj_->end(); ++it)
            if (!seen_.count(it.key())) errs_.push_back(block_ + "." + it.key() + ": unknown key");
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        if (!obj_ || !obj_->contains(key)) return nullptr;
        return &obj_->at(key);
    }

    void fail(const std::string& key, const std::string& why) { errs_.push_back(block_ + "." + key + ": " + why); }

    void number(const std::string& key, double& out) {
        if (auto* v = get(key)) {
            if (!v->is_number()) return fail(key, "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) fail(key, "must be finite");
        }
    }
    void integer(const std::string& key, int& out) {
        if (auto* v = get(key)) {
            if (!v->is_number_integer()) return fail(key, "expected an integer");
            out = v->get<int>();
        }
    }
    void seed(const std::string& key, std::uint64_t& out) {
        if (auto* v = get(key)) {
            if (!v->is_number_unsigned()) return fail(key, "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (auto* v = get(key)) {
            if (!v->is_boolean()) return fail(key, "expected true or false");
            out = v->get<bool>();
        }
    }
    void string(const std::string& key, std::string& out) {
        if (auto* v = get(key)) {
            if (!v->is_string()) return fail(key, "expected a string");
            out = v->get<std::string>();
        }
    }
    template <class T>
    void list(const std::string& key, std::vector<T>& out) {
        if (auto* v = get(key)) {
            if (!v->is_array()) return fail(key, "expected a list");
            std::vector<T> tmp;
            for (const auto& e : *v) {
                if (std::is_integral_v<T> ? !e.is_number_integer() : !e.is_number())
                    return fail(key, std::is_integral_v<T> ? "expected a list of integers" : "expected a list of numbers");
                tmp.push_back(e.get<T>());
            }
            out = std::move(tmp);
        }
    }
    // nested object as its own reader
    Reader sub(const std::string& key) {
        get(key);
        static const json empty = json::object();
        return Reader(obj_ ? *obj_ : empty, key, errs_, block_);
    }

private:
    Reader(const json& parent, const std::string& key, std::vector<std::string>& errs, const std::string& prefix)
        : block_(prefix + "." + key), errs_(errs) {
        if (!parent.contains(key)) return;
        const json& b = parent.at(key);
        if (!b.is_object()) {
            errs_.push_back(block_ + ": must be an object");
            return;
        }
        obj_ = &b;
    }

    std::string block_;
    std::vector<std::string>& errs_;
    const json* obj_ = nullptr;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& what, std::vector<std::string>& errs) {
    if (!ok) errs.push_back(what);
}

const char* interaction_name(InterparticleInteraction::Kind k) {
    switch (k) {
    case InterparticleInteraction::Kind::none: return "none";
    case InterparticleInteraction::Kind::hubbard: return "hubbard";
    case InterparticleInteraction::Kind::density_density: return "density-density";
    }
    return "?";
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    std::vector<std::string> errs;
    ExperimentConfig c;
    if (!j.is_object()) throw Error(ErrorKind::invalid_config, "config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const std::set<std::string> blocks{"model", "field", "disorder", "run", "analysis"};
        if (!blocks.count(it.key())) errs.push_back(it.key() + ": unknown block");
    }

    {
        Reader r(j, "model", errs);
        auto& m = c.model;
        r.integer("d", m.d);
        r.integer("l", m.l);
        r.list("sizes", m.sizes);
        r.number("theta", m.theta);
        r.number("lambda", m.lambda);
        r.number("beta", m.beta);
        require(m.d >= 1 && m.d <= 3, "model.d: must be 1, 2 or 3", errs);
        require(m.l >= 0, "model.l: must be >= 0", errs);
        if (!m.sizes.empty()) {
            require(static_cast<int>(m.sizes.size()) == m.d, "model.sizes: needs d entries", errs);
            for (int s : m.sizes) require(s >= 1, "model.sizes: entries must be >= 1", errs);
        }
        require(m.theta >= 0, "model.theta: must be >= 0", errs);
        require(m.lambda >= 0, "model.lambda: must be >= 0", errs);
        require(m.beta > 0, "model.beta: must be > 0", errs);
        {
            Reader ir = r.sub("interaction");
            std::string kind = "none";
            ir.string("kind", kind);
            ir.number("U", m.ip.U);
            ir.number("strength", m.ip.strength);
            ir.number("decay_length", m.ip.decay_length);
            ir.number("range", m.ip.range);
            if (kind == "none") m.ip.kind = InterparticleInteraction::Kind::none;
            else if (kind == "hubbard") m.ip.kind = InterparticleInteraction::Kind::hubbard;
            else if (kind == "density-density") m.ip.kind = InterparticleInteraction::Kind::density_density;
            else errs.push_back("model.interaction.kind: expected none, hubbard or density-density");
            require(m.ip.decay_length > 0, "model.interaction.decay_length: must be > 0", errs);
            require(m.ip.range >= 0, "model.interaction.range: must be >= 0", errs);
        }
        {
            Reader dr = r.sub("decay");
            std::string form = "polynomial";
            dr.string("form", form);
            dr.number("eps", m.decay.eps);
            dr.number("varsigma", m.decay.varsigma);
            if (form == "polynomial") m.decay.form = DecayFunction::Form::polynomial;
            else if (form == "exponential") m.decay.form = DecayFunction::Form::exponential;
            else errs.push_back("model.decay.form: expected polynomial or exponential");
            require(m.decay.eps > 0, "model.decay.eps: must be > 0", errs);
            require(m.decay.varsigma > 0, "model.decay.varsigma: must be > 0", errs);
            m.decay.d = m.d;
        }
    }
    {
        Reader r(j, "field", errs);
        auto& f = c.field;
        r.string("shape", f.shape);
        r.number("t0", f.t0);
        r.number("t1", f.t1);
        r.list("eta", f.eta);
        r.list("w", f.w);
        r.number("l", f.l);
        require(f.shape == "flat" || f.shape == "bump", "field.shape: expected flat or bump", errs);
        require(f.t1 > f.t0, "field.t1: must exceed t0", errs);
        require(!f.eta.empty(), "field.eta: must not be empty", errs);
        for (double e : f.eta) require(e > 0, "field.eta: entries must be > 0", errs);
        require(static_cast<int>(f.w.size()) == c.model.d, "field.w: needs d components", errs);
        double n2 = 0;
        for (double x : f.w) n2 += x * x;
        require(n2 > 0, "field.w: must be nonzero", errs);
        require(f.l >= 0, "field.l: must be >= 0 (0 covers the box)", errs);
    }
    {
        Reader r(j, "disorder", errs);
        auto& d = c.disorder;
        std::string kind = disorder_kind_name(d.kind);
        r.string("kind", kind);
        try {
            d.kind = parse_disorder_kind(kind);
        } catch (const Error&) {
            errs.push_back("disorder.kind: expected iid-uniform, deterministic-zero or iid-real-hopping");
        }
        r.seed("seed", d.seed);
        r.integer("n_samples", d.n_samples);
        require(d.n_samples >= 1, "disorder.n_samples: must be >= 1", errs);
    }
    {
        Reader r(j, "run", errs);
        auto& u = c.run;
        r.number("t_max", u.t_max);
        r.integer("points", u.points);
        r.number("dt", u.dt);
        r.string("out", u.out);
        r.boolean("cache", u.cache);
        r.string("cache_dir", u.cache_dir);
        r.integer("workers", u.workers);
        require(u.t_max > 0, "run.t_max: must be > 0", errs);
        require(u.points >= 3 && u.points % 2 == 1, "run.points: must be odd and >= 3", errs);
        require(u.dt > 0 && u.dt <= 1, "run.dt: must be in (0, 1]", errs);
        require(!u.out.empty(), "run.out: must not be empty", errs);
        require(u.workers >= 1 && u.workers <= 256, "run.workers: must be in [1, 256]", errs);
    }
    {
        Reader r(j, "analysis", errs);
        auto& a = c.analysis;
        r.string("battery", a.battery);
        r.number("drude_T", a.drude_T);
        r.integer("levy_paths", a.levy_paths);
        r.list("levy_t", a.levy_t);
        r.number("levy_alpha_max", a.levy_alpha_max);
        r.integer("levy_alpha_points", a.levy_alpha_points);
        r.list("lr_times", a.lr_times);
        require(a.battery == "default" || a.battery == "config", "analysis.battery: expected default or config", errs);
        require(a.drude_T > 0, "analysis.drude_T: must be > 0", errs);
        require(a.levy_paths >= 2, "analysis.levy_paths: must be >= 2", errs);
        require(!a.levy_t.empty(), "analysis.levy_t: must not be empty", errs);
        for (double t : a.levy_t) require(t > 0, "analysis.levy_t: entries must be > 0", errs);
        require(a.levy_alpha_max > 0, "analysis.levy_alpha_max: must be > 0", errs);
        require(a.levy_alpha_points >= 1, "analysis.levy_alpha_points: must be >= 1", errs);
        for (double t : a.lr_times) require(t >= 0, "analysis.lr_times: entries must be >= 0", errs);
    }

    if (errs.empty()) {
        // cross-field limits that need the box
        try {
            Box box(c.model.spec());
            require(box.n_sites() <= 10, "model: at most 10 sites (Fock dimension 1024)", errs);
            if (c.model.lambda > 0 && c.model.ip.reach() > 0) {
                double diam = 0;
                for (int k = 0; k < box.dim(); ++k) diam += double(c.model.spec().size(k) - 1) * (c.model.spec().size(k) - 1);
                require(c.model.ip.reach() <= std::sqrt(diam) + 1e-12, "model.interaction.range: exceeds the box", errs);
            }
        } catch (const Error& e) {
            errs.push_back(std::string("model: ") + e.what());
        }
    }

    if (!errs.empty()) {
        std::string msg = std::to_string(errs.size()) + " problem(s)";
        for (const auto& e : errs) msg += "\n  " + e;
        throw Error(ErrorKind::invalid_config, msg);
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw Error(ErrorKind::invalid_config, "cannot read " + p.string());
    json j;
    try {
        j = json::parse(is, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::invalid_config, p.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
    const auto& m = c.model;
    json model = {{"d", m.d},
                  {"l", m.l},
                  {"sizes", m.sizes},
                  {"theta", m.theta},
                  {"lambda", m.lambda},
                  {"beta", m.beta},
                  {"interaction",
                   {{"kind", interaction_name(m.ip.kind)},
                    {"U", m.ip.U},
                    {"strength", m.ip.strength},
                    {"decay_length", m.ip.decay_length},
                    {"range", m.ip.range}}},
                  {"decay",
                   {{"form", m.decay.form == DecayFunction::Form::polynomial ? "polynomial" : "exponential"},
                    {"eps", m.decay.eps},
                    {"varsigma", m.decay.varsigma}}}};
    const auto& f = c.field;
    json field = {{"shape", f.shape}, {"t0", f.t0}, {"t1", f.t1}, {"eta", f.eta}, {"w", f.w}, {"l", f.l}};
    json disorder = {{"kind", disorder_kind_name(c.disorder.kind)},
                     {"seed", c.disorder.seed},
                     {"n_samples", c.disorder.n_samples}};
    const auto& u = c.run;
    json run = {{"t_max", u.t_max}, {"points", u.points},       {"dt", u.dt},          {"out", u.out},
                {"cache", u.cache}, {"cache_dir", u.cache_dir}, {"workers", u.workers}};
    const auto& a = c.analysis;
    json analysis = {{"battery", a.battery},
                     {"drude_T", a.drude_T},
                     {"levy_paths", a.levy_paths},
                     {"levy_t", a.levy_t},
                     {"levy_alpha_max", a.levy_alpha_max},
                     {"levy_alpha_points", a.levy_alpha_points},
                     {"lr_times", a.lr_times}};
    // nlohmann::json objects are std::map backed, so keys come out sorted
    return {{"model", model}, {"field", field}, {"disorder", disorder}, {"run", run}, {"analysis", analysis}};
}

std::string config_hash(const ExperimentConfig& c) {
    json j = config_to_json(c);
    // where and how fast a run happens does not change its numbers
    for (const char* k : {"out", "cache", "cache_dir", "workers"}) j["run"].erase(k);
    return sha256_hex(j.dump());
}

} // namespace fermicond
