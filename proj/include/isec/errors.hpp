#pragma once

#include <stdexcept>
#include <string>

namespace isec {

/// Base class for all toolkit errors. The CLI maps every subclass to exit
/// code 1; falsified verdicts are not errors and are reported separately.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed instance data: invalid distance matrix, unknown point or label
/// identifier, rank-deficient linear map, schema violations.
class InstanceError : public Error {
public:
  using Error::Error;
};

/// Argument outside the operation's domain (L < 1, M < 0, empty set,
/// zero scalar, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A stated precondition does not hold (mismatched base point, constants not
/// validated for the given section, family missing a graph point, ...).
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Missing optional structure required by the operation (e.g. a measure).
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace isec
