#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return gkpsim::run(argc, argv, std::cout, std::cerr); }
