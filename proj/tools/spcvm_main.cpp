#include "spcvm/cli.hpp"

int main(int argc, char** argv) { return spcvm::run_cli(argc, argv); }
