#include <iostream>

#include "qdl/cli.hpp"

int main(int argc, char** argv) {
  return qdl::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
