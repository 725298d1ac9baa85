#include "cscore/cli.hpp"

int main(int argc, char** argv) { return cscore::cli_main(argc, argv); }
