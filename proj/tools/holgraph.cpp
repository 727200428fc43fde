#include <iostream>
#include <string>
#include <vector>

#include "holgraph/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return holgraph::run(args, std::cout, std::cerr);
}
