#include <iostream>
#include <string>
#include <vector>

#include "raogeo_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return raogeo::cli::run(args, std::cout, std::cerr);
}
