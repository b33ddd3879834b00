#include "umpire/cli.hpp"

int main(int argc, char** argv) { return umpire::run_cli(argc, argv); }
