#include <iostream>

#include "flowpick/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return flowpick::run_cli(args, std::cout, std::cerr);
}
