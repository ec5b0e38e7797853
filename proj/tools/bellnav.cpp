#include "bellnav/cli.hpp"

int main(int argc, char **argv) { return bellnav::run_cli(argc, argv); }
