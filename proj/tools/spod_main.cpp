#include <iostream>

#include "spod/cli.hpp"

int main(int argc, char** argv) { return spod::cli::run(argc, argv, std::cout, std::cerr); }
