#include <iostream>

#include "emfend/cli.hpp"

int main(int argc, char** argv) {
  return emfend::cli::dispatch(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
