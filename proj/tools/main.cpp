#include <vector>

#include "saabtk/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return saabtk::run_cli(args);
}
