#include <iostream>

#include "reasonforge/cli.h"

int main(int argc, char** argv) {
  return reasonforge::cli::run(argc, argv, std::cout, std::cerr);
}
