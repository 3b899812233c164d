#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return radarnet::cli::run(argc, argv, std::cout, std::cerr); }
