#include <iostream>
#include <string>
#include <vector>

#include "promptcd/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return promptcd::run_cli(args, std::cout, std::cerr);
}
