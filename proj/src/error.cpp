#include "evoq/error.hpp"

#include <sstream>

namespace evoq {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Pairing: return "pairing";
    case ErrorKind::UnsupportedGrid: return "unsupported-grid";
    case ErrorKind::Range: return "range";
    case ErrorKind::NotInvertible: return "not-invertible";
    case ErrorKind::Symbol: return "symbol";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::NonCoercive: return "non-coercive";
    case ErrorKind::NotSkew: return "not-skew";
    case ErrorKind::Definiteness: return "definiteness";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::SizeGuard: return "size-guard";
    case ErrorKind::UnsupportedLaw: return "unsupported-law";
    case ErrorKind::Oracle: return "oracle";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

namespace {
std::string noncoercive_message(double c_est, double xi, double nu) {
  std::ostringstream os;
  os.precision(6);
  os << "lambda_min of the Hermitian part is " << c_est << " at xi = " << xi << " (nu = " << nu << ")";
  return os.str();
}

std::string notskew_message(Eigen::Index r, Eigen::Index c, double defect) {
  std::ostringstream os;
  os << "|A + A^*| = " << defect << " at entry (" << r << ", " << c << ")";
  return os.str();
}
}  // namespace

NonCoerciveError::NonCoerciveError(double c_est, double min_location, double nu)
    : Error(ErrorKind::NonCoercive, noncoercive_message(c_est, min_location, nu)),
      c_est_(c_est), min_location_(min_location), nu_(nu) {}

NotSkewError::NotSkewError(Eigen::Index row, Eigen::Index col, double defect)
    : Error(ErrorKind::NotSkew, notskew_message(row, col, defect)), row_(row), col_(col), defect_(defect) {}

}  // namespace evoq
