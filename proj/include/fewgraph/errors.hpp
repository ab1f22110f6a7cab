#pragma once

#include <stdexcept>
#include <string>

namespace fewgraph {

// Bad input data (files, graphs, codes). CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure (non-finite loss/gradient). CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration or usage. CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fewgraph
