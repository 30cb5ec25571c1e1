#include <iostream>

#include "bmdp/cli.hpp"

int main(int argc, char** argv) { return bmdp::run_cli(argc, argv, std::cout, std::cerr); }
