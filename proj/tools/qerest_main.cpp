#include <iostream>
#include <string>
#include <vector>

#include "qerest/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return qerest::run_cli(args, std::cout, std::cerr);
}
