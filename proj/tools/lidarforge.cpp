#include "lidarforge/cli.hpp"

int main(int argc, char **argv) { return lidarforge::run_cli(argc, argv); }
