#include "evoq/signal_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace evoq {

namespace {
std::filesystem::path with_ext(std::filesystem::path p, const char* ext) {
  p += ext;
  return p;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::filesystem::path& where) {
  try {
    std::size_t used = 0;
    double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Io, "malformed number '" + s + "' in " + where.string());
  }
}
}  // namespace

void write_signal(const std::filesystem::path& stem, const WeightedSignal& f) {
  const auto m = f.dim();
  std::ofstream csv(with_ext(stem, ".csv"));
  if (!csv) throw Error(ErrorKind::Io, "cannot write " + with_ext(stem, ".csv").string());
  csv << "t";
  for (Eigen::Index c = 0; c < m; ++c) csv << ",re_" << c + 1;
  for (Eigen::Index c = 0; c < m; ++c) csv << ",im_" << c + 1;
  csv << "\n";
  for (std::size_t j = 0; j < f.size(); ++j) {
    auto row = static_cast<Eigen::Index>(j);
    csv << fmt17(f.grid().time(j));
    for (Eigen::Index c = 0; c < m; ++c) csv << "," << fmt17(f.flat()(row, c).real());
    for (Eigen::Index c = 0; c < m; ++c) csv << "," << fmt17(f.flat()(row, c).imag());
    csv << "\n";
  }
  if (!csv) throw Error(ErrorKind::Io, "write failed for " + with_ext(stem, ".csv").string());

  nlohmann::ordered_json header;
  header["nu"] = f.nu();
  header["grid"] = {{"t_min", f.grid().t_min()}, {"t_max", f.grid().t_max()}, {"n", f.size()}};
  header["m"] = m;
  header["coordinates"] = "flat";
  std::ofstream js(with_ext(stem, ".json"));
  if (!js) throw Error(ErrorKind::Io, "cannot write " + with_ext(stem, ".json").string());
  js << header.dump(2) << "\n";
}

WeightedSignal read_signal(const std::filesystem::path& stem) {
  auto jpath = with_ext(stem, ".json");
  auto cpath = with_ext(stem, ".csv");
  std::ifstream js(jpath);
  if (!js) throw Error(ErrorKind::Io, "cannot read " + jpath.string());
  nlohmann::json header;
  try {
    js >> header;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, jpath.string() + ": " + e.what());
  }
  double nu = 0.0, t_min = 0.0, t_max = 0.0;
  std::size_t n = 0;
  Eigen::Index m = 0;
  try {
    nu = header.at("nu").get<double>();
    t_min = header.at("grid").at("t_min").get<double>();
    t_max = header.at("grid").at("t_max").get<double>();
    n = header.at("grid").at("n").get<std::size_t>();
    m = header.at("m").get<Eigen::Index>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, jpath.string() + ": " + e.what());
  }
  TimeGrid grid(t_min, t_max, n);

  std::ifstream csv(cpath);
  if (!csv) throw Error(ErrorKind::Io, "cannot read " + cpath.string());
  std::string line;
  std::getline(csv, line);
  CMatrix flat(static_cast<Eigen::Index>(n), m);
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::getline(csv, line)) throw Error(ErrorKind::Io, cpath.string() + ": too few rows");
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != static_cast<std::size_t>(1 + 2 * m))
      throw Error(ErrorKind::Io, cpath.string() + ": wrong column count");
    for (Eigen::Index c = 0; c < m; ++c) {
      double re = parse_double(cells[static_cast<std::size_t>(1 + c)], cpath);
      double im = parse_double(cells[static_cast<std::size_t>(1 + m + c)], cpath);
      flat(static_cast<Eigen::Index>(j), c) = Complex(re, im);
    }
  }
  return WeightedSignal(grid, nu, std::move(flat));
}

}  // namespace evoq
