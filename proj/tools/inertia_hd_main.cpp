#include <iostream>

#include "inertia_hd/bench/commands.hpp"

int main(int argc, char** argv) {
  return inertia_hd::bench::run_cli(argc, argv, std::cout, std::cerr);
}
