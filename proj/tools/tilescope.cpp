#include <iostream>

#include "tilescope/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return tilescope::run_cli(args, std::cout, std::cerr);
}
