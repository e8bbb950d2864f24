#include "nqkr/cli.hpp"

int main(int argc, char** argv) { return nqkr::cli::main(argc, argv); }
