#pragma once

#include <stdexcept>
#include <string>

namespace fock {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by an argument (bad exponent, empty sample set, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A disk, point or support does not fit in the working box.
class BoxError : public Error {
 public:
  using Error::Error;
};

/// The weight is not subharmonic on the sampled grid.
class SubharmonicityError : public Error {
 public:
  using Error::Error;
};

/// A numerical certificate (truncation test, kernel nonvanishing, decay) failed.
class CertificateError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or schema violation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fock
