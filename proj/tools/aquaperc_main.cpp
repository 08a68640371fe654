#include <string>
#include <vector>

#include "aquaperc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return aquaperc::cli::dispatch(args);
}
