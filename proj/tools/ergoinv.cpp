#include "ergoinv/cli.hpp"

int main(int argc, char** argv) { return ergoinv::cli::main(argc, argv); }
