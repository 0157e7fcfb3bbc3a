#include "distgen/cli.hpp"

int main(int argc, char** argv) { return distgen::cli::main(argc, argv); }
