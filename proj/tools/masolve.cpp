#include <iostream>
#include <string>
#include <vector>

#include "masolve/harness.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return masolve::run_cli(args, std::cout, std::cerr);
}
