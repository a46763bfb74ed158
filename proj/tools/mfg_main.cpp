#include <cstdlib>
#include <iostream>

#include <unistd.h>

#include "mfg/cli.hpp"

int main(int argc, char** argv) {
    const bool color = std::getenv("NO_COLOR") == nullptr && isatty(fileno(stdout)) != 0;
    return mfg::cli::run(argc, argv, std::cout, std::cerr, color);
}
