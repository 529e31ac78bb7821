#include <iostream>
#include <string>
#include <vector>

#include "lgp_tools/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lgp::tools::run_cli(args, std::cout, std::cerr);
}
