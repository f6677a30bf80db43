#include <iostream>

#include "relaykit/cli/app.hpp"

int main(int argc, char** argv) { return relaykit::cli::run(argc, argv, std::cout, std::cerr); }
