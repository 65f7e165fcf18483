#pragma once

// Instance configuration files. The schema is documented in docs/config.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "evoq/control.hpp"

namespace evoq {

struct GridSpec {
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t n = 0;
  double padding_fraction = 0.25;
  TimeGrid grid() const { return TimeGrid(t_min, t_max, n); }
};

struct ShapeSpec {
  enum class Kind { Bump, Gaussian, Indicator, Csv };
  Kind kind = Kind::Bump;
  double centre = 0.0;
  double width = 1.0;  // half-width for bumps, standard deviation for Gaussians
  double start = 0.0, end = 0.0;  // indicator
  CVector direction;
  std::filesystem::path path;  // csv, resolved against the config directory
};

struct Tolerances {
  double residual = 1e-8;
  double norm_slack = 1.05;
  double duality = 1e-10;
  double pairing = 1e-10;
  double causality = 1e-6;
  double reversal = 1e-8;
  double nu_independence = 1e-4;
  double oracle = 1e-6;
  ControlOptions control;
};

struct ControlSpec {
  CMatrix B;
  double T = 0.0;
  ControlVariant variant = ControlVariant::Supported;
  CVector U0;
  GridSpec grid;  // defaults to the instance grid
};

struct InstanceConfig {
  std::string name;
  std::uint64_t seed = 1;
  double nu = 1.0;
  GridSpec grid;
  std::string spatial_kind;
  BlockSystem system;
  CoercivityCertificate certificate;
  ShapeSpec rhs;
  ShapeSpec adjoint_rhs;
  std::optional<ControlSpec> control;
  Tolerances tol;
};

// Schema violations raise ErrorKind::Schema, unreadable files ErrorKind::Io,
// and a law that fails the coercivity check raises NonCoerciveError.
InstanceConfig load_config(const std::filesystem::path& path);
InstanceConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");

// Unweighted samples of a shape on a grid with m components.
CMatrix shape_values(const ShapeSpec& s, const TimeGrid& g, Eigen::Index m);

EvoProblem make_problem(const InstanceConfig& c, Direction dir);
ControlProblem make_control_problem(const InstanceConfig& c, std::optional<ControlVariant> variant = std::nullopt);

}  // namespace evoq
