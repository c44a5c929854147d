#include <iostream>

#include "ica/cli.hpp"

int main(int argc, char** argv) { return ica::run_cli(argc, argv, std::cout, std::cerr); }
