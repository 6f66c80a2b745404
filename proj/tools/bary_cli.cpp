#include "bary/cli.hpp"

int main(int argc, char** argv) { return bary::cli_main(argc, argv); }
