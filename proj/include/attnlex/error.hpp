#pragma once

#include <stdexcept>
#include <string>

namespace attnlex {

/// Input data violated a format or invariant (bad file, bad record, bad set sizes).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter is outside its allowed range.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace attnlex
