#include <iostream>

#include "aok/cli.hpp"

int main(int argc, char** argv) { return aok::cli::run(argc, argv, std::cout, std::cerr); }
