#pragma once

#include <stdexcept>
#include <string>

namespace aauction {

/// Raised when an exhaustive enumeration would exceed its configured size cap.
class CapExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace aauction
