#include "fermicond/lattice.hpp"
#include "fermicond/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fermicond {

int LatticeSpec::size(int axis) const
{
    return extent.empty() ? 2 * l + 1 : extent[axis];
}

int LatticeSpec::low(int axis) const
{
    if (!lower.empty()) return lower[axis];
    if (extent.empty()) return -l;
    return -(extent[axis] - 1) / 2;
}

void LatticeSpec::validate() const
{
    if (d < 1) throw Error(ErrorKind::invalid_argument, "d must be >= 1");
    if (extent.empty() && l < 0) throw Error(ErrorKind::invalid_argument, "l must be >= 0");
    if (!extent.empty()) {
        if (static_cast<int>(extent.size()) != d)
            throw Error(ErrorKind::invalid_argument, "extent needs d entries");
        for (int e : extent)
            if (e < 1) throw Error(ErrorKind::invalid_argument, "extent entries must be >= 1");
    }
    if (!lower.empty() && static_cast<int>(lower.size()) != d)
        throw Error(ErrorKind::invalid_argument, "lower needs d entries");
}

LatticeSpec LatticeSpec::chain(int n) { return rect({n}); }

LatticeSpec LatticeSpec::rect(std::vector<int> sizes)
{
    LatticeSpec s;
    s.d = static_cast<int>(sizes.size());
    s.l = 0;
    s.extent = std::move(sizes);
    return s;
}

Box::Box(const LatticeSpec& spec) : spec_(spec)
{
    spec_.validate();
    const int d = spec_.d;
    stride_.assign(d, 1);
    for (int i = d - 2; i >= 0; --i) stride_[i] = stride_[i + 1] * spec_.size(i + 1);
    int n = stride_[0] * spec_.size(0);
    sites_.reserve(n);
    for (int idx = 0; idx < n; ++idx) {
        Site x(d);
        int r = idx;
        for (int i = 0; i < d; ++i) {
            x[i] = spec_.low(i) + r / stride_[i];
            r %= stride_[i];
        }
        sites_.push_back(std::move(x));
    }
    bond_of_.assign(n, std::vector<int>(2 * d, -1));
    for (int idx = 0; idx < n; ++idx) {
        for (int ax = 0; ax < d; ++ax) {
            Site y = sites_[idx];
            ++y[ax];
            int j = index(y);
            if (j < 0) continue;
            bond_of_[idx][2 * ax + 1] = static_cast<int>(bonds_.size());
            bond_of_[j][2 * ax] = static_cast<int>(bonds_.size());
            bonds_.push_back({idx, j, ax});
        }
    }
}

int Box::index(const Site& x) const
{
    if (static_cast<int>(x.size()) != spec_.d) return -1;
    int idx = 0;
    for (int i = 0; i < spec_.d; ++i) {
        int c = x[i] - spec_.low(i);
        if (c < 0 || c >= spec_.size(i)) return -1;
        idx += c * stride_[i];
    }
    return idx;
}

int Box::neighbor(int i, int axis, int sign) const
{
    Site y = sites_[i];
    y[axis] += sign > 0 ? 1 : -1;
    return index(y);
}

int Box::bond_index(int a, int b) const
{
    if (a < 0 || b < 0 || a >= n_sites() || b >= n_sites()) return -1;
    for (int ax = 0; ax < spec_.d; ++ax) {
        int f = bond_of_[a][2 * ax + 1];
        if (f >= 0 && bonds_[f].b == b) return f;
        int g = bond_of_[a][2 * ax];
        if (g >= 0 && bonds_[g].a == b) return g;
    }
    return -1;
}

double Box::distance(int i, int j) const
{
    double s = 0;
    for (int k = 0; k < spec_.d; ++k) {
        double t = sites_[i][k] - sites_[j][k];
        s += t * t;
    }
    return std::sqrt(s);
}

Box build_box(const LatticeSpec& spec) { return Box(spec); }

void DisorderSample::validate() const
{
    Box box(spec);
    if (static_cast<int>(omega1.size()) != box.n_sites() ||
        omega2.size() != box.bonds().size())
        throw Error(ErrorKind::shape_mismatch, "disorder sample does not match its box");
    for (double v : omega1)
        if (!(std::abs(v) <= 1.0)) throw Error(ErrorKind::invalid_argument, "|omega1| > 1");
    for (cplx z : omega2)
        if (!(std::abs(z) <= 1.0 + 1e-15)) throw Error(ErrorKind::invalid_argument, "|omega2| > 1");
}

const char* disorder_kind_name(DisorderKind k)
{
    switch (k) {
    case DisorderKind::iid_uniform: return "iid-uniform";
    case DisorderKind::deterministic_zero: return "deterministic-zero";
    case DisorderKind::iid_real_hopping: return "iid-real-hopping";
    }
    return "?";
}

DisorderKind parse_disorder_kind(const std::string& s)
{
    if (s == "iid-uniform") return DisorderKind::iid_uniform;
    if (s == "deterministic-zero") return DisorderKind::deterministic_zero;
    if (s == "iid-real-hopping") return DisorderKind::iid_real_hopping;
    throw Error(ErrorKind::invalid_config, "unknown disorder kind '" + s + "'");
}

namespace {

std::vector<std::int64_t> coord_stream(std::int64_t tag, const Site& a, const Site* b = nullptr)
{
    std::vector<std::int64_t> s{tag};
    s.insert(s.end(), a.begin(), a.end());
    if (b) s.insert(s.end(), b->begin(), b->end());
    return s;
}

} // namespace

DisorderSample sample_disorder(const DisorderDistribution& dist, const LatticeSpec& spec)
{
    Box box(spec);
    DisorderSample w;
    w.spec = spec;
    w.omega1.assign(box.n_sites(), 0.0);
    w.omega2.assign(box.bonds().size(), cplx(0.0));
    if (dist.kind == DisorderKind::deterministic_zero) return w;

    for (int i = 0; i < box.n_sites(); ++i) {
        Rng r(dist.seed, coord_stream(stream_tag::site_potential, box.site(i)));
        w.omega1[i] = r.uniform(-1.0, 1.0);
    }
    for (std::size_t k = 0; k < box.bonds().size(); ++k) {
        const Bond& b = box.bonds()[k];
        Rng r(dist.seed, coord_stream(stream_tag::bond_hopping, box.site(b.a), &box.site(b.b)));
        if (dist.kind == DisorderKind::iid_real_hopping) {
            w.omega2[k] = r.uniform(-1.0, 1.0);
        } else {
            // uniform on the closed unit disc
            double rad = std::sqrt(r.uniform());
            double phi = 2.0 * std::numbers::pi * r.uniform();
            w.omega2[k] = std::polar(rad, phi);
        }
    }
    return w;
}

DisorderSample translate_sample(const DisorderSample& omega, const Site& x)
{
    LatticeSpec target = omega.spec;
    Box src(omega.spec);
    target.extent.resize(target.d);
    target.lower.resize(target.d);
    for (int i = 0; i < target.d; ++i) {
        target.extent[i] = omega.spec.size(i);
        target.lower[i] = omega.spec.low(i) - x.at(i);
    }
    return translate_sample(omega, x, target);
}

DisorderSample translate_sample(const DisorderSample& omega, const Site& x, const LatticeSpec& target)
{
    Box src(omega.spec), dst(target);
    if (static_cast<int>(x.size()) != src.dim() || target.d != src.dim())
        throw Error(ErrorKind::shape_mismatch, "translation vector has wrong dimension");
    auto shifted = [&](const Site& y) {
        Site z = y;
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += x[i];
        return z;
    };
    DisorderSample out;
    out.spec = target;
    out.omega1.resize(dst.n_sites());
    out.omega2.resize(dst.bonds().size());
    for (int i = 0; i < dst.n_sites(); ++i) {
        int j = src.index(shifted(dst.site(i)));
        if (j < 0) throw Error(ErrorKind::domain_exceeded, "translated site leaves the stored box");
        out.omega1[i] = omega.omega1[j];
    }
    for (std::size_t k = 0; k < dst.bonds().size(); ++k) {
        const Bond& b = dst.bonds()[k];
        int a = src.index(shifted(dst.site(b.a)));
        int c = src.index(shifted(dst.site(b.b)));
        int kb = src.bond_index(a, c);
        if (kb < 0) throw Error(ErrorKind::domain_exceeded, "translated bond leaves the stored box");
        out.omega2[k] = omega.omega2[kb];
    }
    return out;
}

DisorderSample conjugate_sample(const DisorderSample& omega)
{
    DisorderSample w = omega;
    for (auto& z : w.omega2) z = std::conj(z);
    return w;
}

nlohmann::json disorder_to_json(const DisorderSample& omega)
{
    Box box(omega.spec);
    nlohmann::json sites = nlohmann::json::array(), bonds = nlohmann::json::array();
    for (int i = 0; i < box.n_sites(); ++i) sites.push_back({box.site(i), omega.omega1[i]});
    for (std::size_t k = 0; k < box.bonds().size(); ++k) {
        const Bond& b = box.bonds()[k];
        bonds.push_back({{box.site(b.a), box.site(b.b)}, {omega.omega2[k].real(), omega.omega2[k].imag()}});
    }
    return {{"sites", sites}, {"bonds", bonds}};
}

DisorderSample disorder_from_json(const nlohmann::json& j)
{
    const auto& sites = j.at("sites");
    if (sites.empty()) throw Error(ErrorKind::invalid_argument, "disorder JSON without sites");
    int d = static_cast<int>(sites[0][0].size());
    std::vector<int> lo(d, 1 << 30), hi(d, -(1 << 30));
    for (const auto& s : sites) {
        auto x = s[0].get<Site>();
        for (int i = 0; i < d; ++i) {
            lo[i] = std::min(lo[i], x[i]);
            hi[i] = std::max(hi[i], x[i]);
        }
    }
    LatticeSpec spec;
    spec.d = d;
    spec.l = 0;
    spec.lower = lo;
    for (int i = 0; i < d; ++i) spec.extent.push_back(hi[i] - lo[i] + 1);
    // recover the cube parameter when the box is a centred cube
    bool cube = true;
    for (int i = 0; i < d; ++i) cube = cube && lo[i] == -hi[i] && hi[i] == hi[0];
    if (cube) spec = LatticeSpec{d, hi[0], {}, {}};

    Box box(spec);
    DisorderSample w;
    w.spec = spec;
    w.omega1.assign(box.n_sites(), 0.0);
    w.omega2.assign(box.bonds().size(), cplx(0.0));
    if (static_cast<int>(sites.size()) != box.n_sites())
        throw Error(ErrorKind::invalid_argument, "disorder JSON sites do not fill a box");
    for (const auto& s : sites) w.omega1[box.index(s[0].get<Site>())] = s[1].get<double>();
    for (const auto& b : j.at("bonds")) {
        int a = box.index(b[0][0].get<Site>()), c = box.index(b[0][1].get<Site>());
        int k = box.bond_index(a, c);
        if (k < 0) throw Error(ErrorKind::not_a_bond, "disorder JSON bond is not a nearest-neighbour pair");
        w.omega2[k] = cplx(b[1][0].get<double>(), b[1][1].get<double>());
    }
    w.validate();
    return w;
}

} // namespace fermicond
