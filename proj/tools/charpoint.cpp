#include <iostream>

#include "charpoint/cli.hpp"

int main(int argc, char** argv) { return charpoint::cli::main_entry(argc, argv, std::cout, std::cerr); }
