#include <iostream>
#include <string>
#include <vector>

#include "lcr/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lcr::run_cli(args, std::cout, std::cerr);
}
