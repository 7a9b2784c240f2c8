#include "tfilm/cli.hpp"

int main(int argc, char** argv) { return tfilm::cli::main_entry(argc, argv); }
