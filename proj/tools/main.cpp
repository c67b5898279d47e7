#include "voltran/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return voltran::cli::run(argc, argv, std::cout, std::cerr); }
