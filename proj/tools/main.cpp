#include "cli.hpp"

int main(int argc, char** argv) { return silt::cli::main_entry(argc, argv); }
