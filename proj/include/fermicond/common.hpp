#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace fermicond {

using cplx = std::complex<double>;

enum class ErrorKind {
    invalid_argument,
    domain_exceeded,
    dimension_cap_exceeded,
    unknown_site,
    shape_mismatch,
    not_a_bond,
    quadrature_failure,
    range_exceeds_box,
    diagonalization_failure,
    step_size_nonconvergence,
    overlapping_supports,
    odd_observable,
    support_overflow,
    grid_too_coarse,
    psd_violation,
    inconsistent_inputs,
    anisotropy_violation,
    invalid_config,
    cache_corruption,
    unknown_experiment,
};

const char* error_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind k, const std::string& msg)
        : std::runtime_error(std::string(error_name(k)) + ": " + msg), kind_(k) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// non-fatal diagnostics go to stderr; tests can read the counter
void warn(const std::string& msg);
long warning_count();

} // namespace fermicond
