#include <iostream>
#include <string>
#include <vector>

#include "hybrid/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hybrid::cli::run_command(args, std::cout, std::cerr);
}
