#include <iostream>

#include "qa4ie/cli/commands.hpp"

int main(int argc, char** argv) { return qa4ie::cli::run(argc, argv, std::cout, std::cerr); }
