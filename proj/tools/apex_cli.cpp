#include <iostream>

#include "apex/cli.hpp"

int main(int argc, char** argv) {
    return apex::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
