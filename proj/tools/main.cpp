#include <iostream>

#include "kmech/cli.hpp"

int main(int argc, char** argv) { return kmech::cli::run(argc, argv, std::cout, std::cerr); }
