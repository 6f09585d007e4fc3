// errors.hpp — Error categories shared across the library.

#pragma once

#include <stdexcept>
#include <string>

namespace bkc {

// Physics/domain violations (wrong regime, unresolvable quantity, bad state).
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Configuration / usage problems (bad config files, missing keys).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A requested splitting sits below the double-precision floor; the closed-form
// prediction remains available.
struct precision_floor_error : domain_error {
    explicit precision_floor_error(const std::string& what) : domain_error(what) {}
};

// The anti-diffusive closed-form Gaussian has reached its focusing time.
struct focus_error : domain_error {
    explicit focus_error(const std::string& what) : domain_error(what) {}
};

}  // namespace bkc
