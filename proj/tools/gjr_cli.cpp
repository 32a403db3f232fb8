#include <iostream>

#include "gjr/cli.hpp"

int main(int argc, char** argv) { return gjr::cli::main(argc, argv, std::cout, std::cerr); }
