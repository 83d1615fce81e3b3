#include "propgen/cli.hpp"

int main(int argc, char** argv) { return propgen::run_cli(argc, argv); }
