#include "swcbc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return swcbc::cli::main_entry(argc, argv, std::cout, std::cerr); }
