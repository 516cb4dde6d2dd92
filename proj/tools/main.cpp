#include "cli.hpp"

int main(int argc, char** argv) { return ck::cli::main_entry(argc, argv); }
