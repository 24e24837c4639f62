#include "loadrelay/cli.hpp"

int main(int argc, char** argv) { return loadrelay::run_cli(argc, argv); }
