#include <iostream>

#include "ddpose/cli.hpp"

int main(int argc, char** argv) { return ddpose::cli::run(argc, argv, std::cout, std::cerr); }
