#include "wgflow/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return wgflow::cli::dispatch(argc, argv, std::cout, std::cerr);
}
