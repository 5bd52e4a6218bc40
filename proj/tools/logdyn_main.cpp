#include <iostream>

#include "logdyn/cli.hpp"

int main(int argc, char** argv) {
  return logdyn::cli::run(argc, argv, std::cout, std::cerr);
}
