#include <iostream>
#include <string>
#include <vector>

#include "posmodel/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return posmodel::cli::run(std::move(args), std::cout, std::cerr);
}
