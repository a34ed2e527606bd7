#include <iostream>
#include <string>
#include <vector>

#include "ahmca/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return ahmca::cli::run(args, std::cout, std::cerr);
}
