#include <iostream>

#include "nnfn/cli.hpp"

int main(int argc, char** argv) {
  return nnfn::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
