#include <iostream>
#include <vector>

#include "nsgame/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nsg::run_cli(args, std::cout, std::cerr);
}
