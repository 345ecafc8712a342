#include "dhr/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dhr::cli::run(argc, argv, std::cout, std::cerr); }
