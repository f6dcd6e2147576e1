#pragma once

#include <stdexcept>
#include <string>

namespace kanlab {

enum class Errc {
    non_finite_coordinate,
    not_unimodular,
    eigenvalue_too_small,
    too_few_fixed_points,
    bad_circle_count,
    duplicate_special_points,
    bump_radius_too_large,
    drift_height_too_large,
    bad_parameter,
    chart_out_of_range,
    not_a_source,
    diffeo_margin_violated,
    overlapping_supports,
    config_error,
    io_error,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace kanlab
