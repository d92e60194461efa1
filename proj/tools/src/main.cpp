#include <iostream>

#include "fractrace_cli/cli.hpp"

int main(int argc, char** argv) {
  return fractrace::cli::RunCli(argc, argv, std::cout, std::cerr);
}
