#include "barankin/cli.hpp"

int main(int argc, char** argv) { return barankin::cli::run_cli(argc, argv); }
