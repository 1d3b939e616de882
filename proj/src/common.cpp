#include "fermicond/common.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace fermicond {

const char* error_name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain_exceeded: return "domain-exceeded";
    case ErrorKind::dimension_cap_exceeded: return "dimension-cap-exceeded";
    case ErrorKind::unknown_site: return "unknown-site";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::not_a_bond: return "not-a-bond";
    case ErrorKind::quadrature_failure: return "quadrature-failure";
    case ErrorKind::range_exceeds_box: return "range-exceeds-box";
    case ErrorKind::diagonalization_failure: return "diagonalization-failure";
    case ErrorKind::step_size_nonconvergence: return "step-size-nonconvergence";
    case ErrorKind::overlapping_supports: return "overlapping-supports";
    case ErrorKind::odd_observable: return "odd-observable";
    case ErrorKind::support_overflow: return "support-overflow";
    case ErrorKind::grid_too_coarse: return "grid-too-coarse";
    case ErrorKind::psd_violation: return "psd-violation";
    case ErrorKind::inconsistent_inputs: return "inconsistent-inputs";
    case ErrorKind::anisotropy_violation: return "anisotropy-violation";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::cache_corruption: return "cache-corruption";
    case ErrorKind::unknown_experiment: return "unknown-experiment";
    }
    return "error";
}

namespace {
std::atomic<long> n_warnings{0};
std::mutex warn_mutex;
}

void warn(const std::string& msg)
{
    ++n_warnings;
    std::lock_guard<std::mutex> lk(warn_mutex);
    std::cerr << "warning: " << msg << "\n";
}

long warning_count() { return n_warnings.load(); }

} // namespace fermicond
