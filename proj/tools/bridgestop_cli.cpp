#include <iostream>

#include "bridgestop/cli.hpp"

int main(int argc, char** argv) { return bridgestop::cli::main(argc, argv, std::cout, std::cerr); }
