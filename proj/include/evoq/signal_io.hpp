#pragma once

// Columnar CSV (t, Re phi_1..m, Im phi_1..m) with a JSON sidecar holding the
// weight, the grid and m. Values carry 17 significant digits so a write/read
// cycle is lossless.

#include <filesystem>

#include "evoq/signal.hpp"

namespace evoq {

void write_signal(const std::filesystem::path& stem, const WeightedSignal& f);
WeightedSignal read_signal(const std::filesystem::path& stem);

}  // namespace evoq
