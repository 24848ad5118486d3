#include <iostream>
#include <string>
#include <vector>

#include "ssatlas/run.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return ssatlas::run_cli(args, std::cout, std::cerr);
}
