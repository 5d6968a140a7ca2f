#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  fvc::cli::configure_threads_from_env();
  std::vector<std::string> args(argv + 1, argv + argc);
  return fvc::cli::run(args, std::cout, std::cerr);
}
