#pragma once

#include <stdexcept>
#include <string>

namespace gwkit {

// Invalid user input: bad columns, malformed values, out-of-range parameters.
// The CLI maps this to exit code 2.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: singular local fits, degenerate windows, eigen-solver
// breakdown. The CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gwkit
