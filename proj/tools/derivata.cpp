#include "derivata/cli.hpp"

int main(int argc, char** argv) { return derivata::cli_main(argc, argv); }
