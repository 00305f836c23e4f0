#include <cse/cli.hpp>

int main(int argc, char** argv) { return cse::cli_main(argc, argv); }
