#include <iostream>

#include "hiqa/cli.hpp"

int main(int argc, char** argv) { return hiqa::run_cli(argc, argv, std::cout, std::cerr); }
