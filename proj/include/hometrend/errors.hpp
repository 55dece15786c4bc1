#pragma once

#include <stdexcept>
#include <string>

namespace hometrend {

// Bad or inconsistent user input (malformed files, invalid config). Maps to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Series shorter than a kernel's minimum length.
class TooShortError : public InputError {
public:
    using InputError::InputError;
};

// Zero-variance series passed to a standardized statistic.
class DegenerateSeriesError : public InputError {
public:
    using InputError::InputError;
};

// A homogenization plan does not cover a date of the series it is applied to.
class PlanCoverageError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace hometrend
