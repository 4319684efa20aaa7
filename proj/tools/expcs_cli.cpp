#include <iostream>

#include "expcs/cli.hpp"

int main(int argc, char** argv) { return expcs::run_cli(argc, argv, std::cout, std::cerr); }
