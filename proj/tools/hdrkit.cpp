#include <iostream>

#include "hdrkit/cli.hpp"

int main(int argc, char** argv) {
  return hdrkit::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
