#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fspec {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters outside the admissible domain (bad weight, bad boundary data, x outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A requested structure would exceed a configured memory cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Propagation produced a non-finite state.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, std::size_t node) : Error(what), node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

/// Sign pattern of a sampled function cannot be resolved at the grid's resolution.
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue could not be certified by its oscillation count.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// The λ scan reached its cap before the requested eigenvalue was bracketed.
class BracketExhausted : public Error {
 public:
  using Error::Error;
};

/// Junction matching of a glued eigenfunction failed.
class MatchingError : public Error {
 public:
  using Error::Error;
};

/// Two inputs that must agree (weights, boundary pairs, grids) do not.
class ConfigMismatch : public Error {
 public:
  using Error::Error;
};

/// A query lies beyond the certified range of a spectrum.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace fspec
