#include <iostream>

#include "bellsim/cli/app.hpp"

int main(int argc, char** argv) { return bellsim::cli::run_cli(argc, argv, std::cout, std::cerr); }
