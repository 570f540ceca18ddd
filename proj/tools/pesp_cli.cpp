#include <iostream>
#include <string>
#include <vector>

#include "pesp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pesp::run_cli(args, std::cout, std::cerr);
}
