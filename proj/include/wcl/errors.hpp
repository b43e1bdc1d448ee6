#ifndef WCL_ERRORS_HPP
#define WCL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wcl {

// Iterative algorithm failed to converge, a certified count did not match,
// or a fit degenerated at runtime.  Distinct from precondition violations,
// which use std::invalid_argument / std::domain_error.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// A requested enumeration or allocation would exceed a configured cap.
class capacity_error : public std::runtime_error {
public:
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wcl

#endif
