#include <iostream>

#include "enopt/cli.hpp"

int main(int argc, char** argv) {
  return enopt::run_command(argc, argv, std::cout, std::cerr);
}
