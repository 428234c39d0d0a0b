#include "eit/cli.hpp"

int main(int argc, char** argv) { return eit::cli_main(argc, argv); }
