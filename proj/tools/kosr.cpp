#include <iostream>

#include "kosr/cli.hpp"

int main(int argc, char** argv) { return kosr::cli::run_cli(argc, argv, std::cout, std::cerr); }
