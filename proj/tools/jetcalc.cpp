#include <iostream>
#include <string>
#include <vector>

#include "jetcalc/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return jetcalc::cli::main_entry(args, std::cout, std::cerr);
}
