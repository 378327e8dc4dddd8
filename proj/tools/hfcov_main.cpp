#include <iostream>

#include "hfcov/cli.hpp"

int main(int argc, char** argv) { return hfcov::cli::run(argc, argv, std::cout, std::cerr); }
