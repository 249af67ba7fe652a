// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "nlq/cli/cli.hpp"

int main(int argc, char** argv) { return nlq::cli::run(argc, argv, std::cout, std::cerr); }
