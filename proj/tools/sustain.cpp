#include "sustain/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sustain::cli::run(argc, argv, std::cout, std::cerr); }
