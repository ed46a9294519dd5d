#include <exception>
#include <iostream>

#include "isec/cli.hpp"

int main(int argc, char** argv) {
  try {
    return isec::run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "isec: " << e.what() << "\n";
    return 1;
  }
}
