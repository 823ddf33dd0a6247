#include "biceit/cli.hpp"

int main(int argc, char** argv) { return biceit::run_cli(argc, argv); }
