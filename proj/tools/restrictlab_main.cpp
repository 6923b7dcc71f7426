#include <string>
#include <vector>

#include "rlab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rlab::run_cli(args);
}
