#include <iostream>
#include <string>
#include <vector>

#include "lateral_chemostat/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return latchem::cli::run(args, std::cout, std::cerr);
}
