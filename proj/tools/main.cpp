#include <iostream>

#include "lgspdc/cli.hpp"

int main(int argc, char** argv) { return lgspdc::run_cli(argc, argv, std::cout, std::cerr); }
