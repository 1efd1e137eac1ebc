#include "meanaic/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return meanaic::run_cli(argc, argv, std::cout, std::cerr); }
