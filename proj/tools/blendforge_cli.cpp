#include <iostream>

#include "blendforge/cli.h"

int main(int argc, char** argv) { return blendforge::run_cli(argc, argv, std::cout, std::cerr); }
