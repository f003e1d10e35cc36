#include <iostream>
#include <string>
#include <vector>

#include "iir/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return iir::cli_dispatch(args, std::cout, std::cerr);
}
