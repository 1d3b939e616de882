#pragma once

#include "fermicond/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace fermicond {

using Site = std::vector<int>;

// Box Λ_l = [-l,l]^d by default. `extent` (sites per axis) and `lower`
// (lowest coordinate per axis) override the cube, e.g. even chains or 2x3.
struct LatticeSpec {
    int d = 1;
    int l = 1;
    std::vector<int> extent;
    std::vector<int> lower;

    int size(int axis) const;
    int low(int axis) const;
    void validate() const;
    static LatticeSpec chain(int n);                 // n sites, lower corner -(n-1)/2
    static LatticeSpec rect(std::vector<int> sizes); // same centring per axis
};

struct Bond {
    int a = 0; // site index
    int b = 0; // site index of a + e_axis
    int axis = 0;
};

class Box {
public:
    explicit Box(const LatticeSpec& spec);

    const LatticeSpec& spec() const { return spec_; }
    int dim() const { return spec_.d; }
    int n_sites() const { return static_cast<int>(sites_.size()); }
    const Site& site(int i) const { return sites_[i]; }
    const std::vector<Site>& sites() const { return sites_; }
    const std::vector<Bond>& bonds() const { return bonds_; }

    int index(const Site& x) const; // -1 when outside
    bool contains(const Site& x) const { return index(x) >= 0; }
    int neighbor(int i, int axis, int sign) const; // -1 when outside
    int bond_index(int a, int b) const;            // unordered, -1 if not a bond
    double distance(int i, int j) const;           // Euclidean

private:
    LatticeSpec spec_;
    std::vector<Site> sites_;
    std::vector<Bond> bonds_;
    std::vector<int> stride_;
    std::vector<std::vector<int>> bond_of_; // bond_of_[site][2*axis + (sign>0)]
};

Box build_box(const LatticeSpec& spec);

struct DisorderSample {
    LatticeSpec spec;
    std::vector<double> omega1; // per site index
    std::vector<cplx> omega2;   // per bond index of Box(spec)

    void validate() const;
};

enum class DisorderKind { iid_uniform, deterministic_zero, iid_real_hopping };

struct DisorderDistribution {
    DisorderKind kind = DisorderKind::iid_uniform;
    std::uint64_t seed = 0;
};

const char* disorder_kind_name(DisorderKind k);
DisorderKind parse_disorder_kind(const std::string& s);

// Entries are drawn from streams keyed by lattice coordinates, so nested boxes
// with the same seed agree on their overlap.
DisorderSample sample_disorder(const DisorderDistribution& dist, const LatticeSpec& spec);

// (χ_x ω)(y) = ω(y + x). The result lives on the source box shifted by -x
// unless a target box is given; a target site whose image leaves the source
// box raises domain-exceeded.
DisorderSample translate_sample(const DisorderSample& omega, const Site& x);
DisorderSample translate_sample(const DisorderSample& omega, const Site& x, const LatticeSpec& target);

DisorderSample conjugate_sample(const DisorderSample& omega);

nlohmann::json disorder_to_json(const DisorderSample& omega);
DisorderSample disorder_from_json(const nlohmann::json& j);

} // namespace fermicond
