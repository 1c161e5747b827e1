#pragma once

#include <stdexcept>
#include <string>

namespace psc {

enum class ErrorKind {
  Range,
  UnsupportedOrder,
  InvalidMetric,
  DegenerateMetric,
  NeckTooShort,
  Precondition,
  NotUnitSpeedCompatible,
  InvalidBend,
  Construction,
  NoCertificate,
  Inversion,
  DegeneratePlane,
  Spec,
  Assembly,
  Infeasible,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Range: return "range";
    case ErrorKind::UnsupportedOrder: return "unsupported-order";
    case ErrorKind::InvalidMetric: return "invalid-metric";
    case ErrorKind::DegenerateMetric: return "degenerate-metric";
    case ErrorKind::NeckTooShort: return "neck-too-short";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::NotUnitSpeedCompatible: return "not-unit-speed-compatible";
    case ErrorKind::InvalidBend: return "invalid-bend";
    case ErrorKind::Construction: return "construction";
    case ErrorKind::NoCertificate: return "no-certificate";
    case ErrorKind::Inversion: return "inversion";
    case ErrorKind::DegeneratePlane: return "degenerate-plane";
    case ErrorKind::Spec: return "spec";
    case ErrorKind::Assembly: return "assembly";
    case ErrorKind::Infeasible: return "infeasible";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace psc
