#pragma once

#include <stdexcept>

namespace ksns {

/// A field handed to an operator holds NaN or Inf.
struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterative solve missed its tolerance within the iteration cap.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The requested step exceeds an explicit stability bound; retry with a smaller dt.
struct CflError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A positivity or conservation guarantee of the scheme was broken.
struct SchemeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ksns
