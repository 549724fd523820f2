#include "argsim/cli.hpp"

int main(int argc, char** argv) { return argsim::cli::run(argc, argv); }
