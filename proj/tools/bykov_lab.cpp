#include <iostream>

#include "bykov/cli.hpp"

int main(int argc, char** argv) {
    return bykov::cli::dispatch(argc, argv, std::cout, std::cerr);
}
