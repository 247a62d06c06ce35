#pragma once

#include <stdexcept>
#include <string>

namespace lp {

// Base class for everything the solver can throw.  The CLI maps these to
// exit code 3 (solver error); config problems are a separate category.
struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct sonic_singularity : solver_error {
    using solver_error::solver_error;
};
struct origin_singularity : solver_error {
    using solver_error::solver_error;
};
struct unsupported_parameter : solver_error {
    using solver_error::solver_error;
};
struct degenerate_parameter : solver_error {
    using solver_error::solver_error;
};
struct invalid_parameter : solver_error {
    using solver_error::solver_error;
};
struct invalid_time : solver_error {
    using solver_error::solver_error;
};
struct invalid_pressure : solver_error {
    using solver_error::solver_error;
};
struct outside_radius : solver_error {
    using solver_error::solver_error;
};
struct insufficient_coefficients : solver_error {
    using solver_error::solver_error;
};
struct nonfinite_state : solver_error {
    using solver_error::solver_error;
};
struct guard_violation : solver_error {
    using solver_error::solver_error;
};
struct bracket_invalid : solver_error {
    using solver_error::solver_error;
};
struct unclassifiable_run : solver_error {
    using solver_error::solver_error;
};
struct target_outside_image : solver_error {
    using solver_error::solver_error;
};
struct nonmonotone_detected : solver_error {
    using solver_error::solver_error;
};
struct center_mismatch : solver_error {
    using solver_error::solver_error;
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace lp
