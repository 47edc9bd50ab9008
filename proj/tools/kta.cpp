#include <iostream>

#include "kta/cli/commands.hpp"

int main(int argc, char** argv) { return kta::cli::run_cli(argc, argv, std::cout, std::cerr); }
