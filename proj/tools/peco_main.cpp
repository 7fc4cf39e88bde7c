#include "peco/cli.hpp"

int main(int argc, char** argv) { return peco::cli::main_entry(argc, argv); }
