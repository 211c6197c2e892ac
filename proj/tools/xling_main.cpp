#include "xling/cli.h"

#include <iostream>

int main(int argc, char** argv) { return xling::cli::run(argc, argv, std::cout, std::cerr); }
