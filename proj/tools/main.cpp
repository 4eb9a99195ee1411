#include <iostream>

#include "tcal/cli.hpp"

int main(int argc, char** argv) { return tcal::cli::run_cli(argc, argv, std::cout, std::cerr); }
