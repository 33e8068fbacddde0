#include <iostream>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        bool help = false;
        const renewal::cli::RunConfig config = renewal::cli::parse_args(args, help);
        if (help) return 0;
        return renewal::cli::run(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
