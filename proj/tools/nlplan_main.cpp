#include "nlplan/cli/cli.hpp"

int main(int argc, char** argv) { return nlplan::cli::cli_main(argc, argv); }
