#include <iostream>

#include "hgsp/cli.hpp"

int main(int argc, char** argv) { return hgsp::cli::run(argc, argv, std::cout, std::cerr); }
