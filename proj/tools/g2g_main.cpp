#include <string>
#include <vector>

#include "g2g/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return g2g::run_cli(args);
}
