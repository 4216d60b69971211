#include <iostream>

#include "viscowave/cli.hpp"

int main(int argc, char** argv) { return viscowave::run_cli(argc, argv, std::cout, std::cerr); }
