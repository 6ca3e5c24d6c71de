#include <string>
#include <vector>

#include "sensaudit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return sensaudit::cli::run(args);
}
