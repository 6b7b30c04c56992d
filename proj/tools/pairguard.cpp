#include <iostream>

#include "pairguard/cli.hpp"

int main(int argc, char** argv) { return pairguard::run_cli(argc, argv, std::cout, std::cerr); }
