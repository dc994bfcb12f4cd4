#include "bnlab/cli.hpp"

int main(int argc, char** argv) { return bnlab::cli_main(argc, argv); }
