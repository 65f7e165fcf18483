// Runs the ten acceptance criteria on the bundled configs, one line each.

#include <iostream>

#include "evoq/acceptance.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : EVOQ_CONFIG_DIR;
  auto instances = evoq::bundled_instances(dir);
  bool pass = true;
  for (int id = 1; id <= 10; ++id) {
    auto r = evoq::run_criterion(id, instances);
    std::cout << evoq::format_line(r) << std::endl;
    pass = pass && r.pass;
  }
  return pass ? 0 : 1;
}
