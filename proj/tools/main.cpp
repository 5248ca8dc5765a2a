#include <iostream>

#include "csent/cli.hpp"

int main(int argc, char** argv) { return csent::cli::run(argc, argv, std::cout, std::cerr); }
