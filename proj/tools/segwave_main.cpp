#include <vector>

#include "segwave/cli_runner.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return segwave::run_cli(std::move(args));
}
