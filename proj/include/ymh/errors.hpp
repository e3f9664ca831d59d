#pragma once

#include <stdexcept>
#include <string>

namespace ymh {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizingError : public Error { using Error::Error; };
class AxisError : public Error { using Error::Error; };
/// A plaquette holonomy sits too close to the matrix-log branch cut.
class BranchError : public Error { using Error::Error; };
class IntegralityError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class NonUnitaryError : public Error { using Error::Error; };
class ProjectionError : public Error { using Error::Error; };
class MetricError : public Error { using Error::Error; };
class MismatchError : public Error { using Error::Error; };
class EnumerationError : public Error { using Error::Error; };
class UnresolvedTypeError : public Error { using Error::Error; };
class GapCollapseError : public Error { using Error::Error; };
class SectionSpaceError : public Error { using Error::Error; };
/// The singular spectrum of a discrete operator has no clean null gap.
class RefineLatticeError : public Error { using Error::Error; };
class DtUnderflowError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

}  // namespace ymh
