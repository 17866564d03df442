#include "cli.hpp"

#include <iostream>
#include <vector>

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return maskem::cli::run(args, std::cout, std::cerr);
}
