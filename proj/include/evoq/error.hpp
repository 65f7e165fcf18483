#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace evoq {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class ErrorKind {
  Pairing,
  UnsupportedGrid,
  Range,
  NotInvertible,
  Symbol,
  Pole,
  NonCoercive,
  NotSkew,
  Definiteness,
  Solver,
  Precondition,
  SizeGuard,
  UnsupportedLaw,
  Oracle,
  Schema,
  Io
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

// Carries where on the frequency grid coercivity was lost.
class NonCoerciveError : public Error {
public:
  NonCoerciveError(double c_est, double min_location, double nu);
  double c_est() const noexcept { return c_est_; }
  double min_location() const noexcept { return min_location_; }
  double nu() const noexcept { return nu_; }

private:
  double c_est_;
  double min_location_;
  double nu_;
};

class NotSkewError : public Error {
public:
  NotSkewError(Eigen::Index row, Eigen::Index col, double defect);
  Eigen::Index row() const noexcept { return row_; }
  Eigen::Index col() const noexcept { return col_; }
  double defect() const noexcept { return defect_; }

private:
  Eigen::Index row_;
  Eigen::Index col_;
  double defect_;
};

}  // namespace evoq
