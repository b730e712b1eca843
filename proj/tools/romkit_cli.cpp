#include "romkit/cli.hpp"

int main(int argc, char** argv) { return romkit::run_cli(argc, argv); }
