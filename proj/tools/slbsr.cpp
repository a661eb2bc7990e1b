#include "slbsr/cli.hpp"

int main(int argc, char** argv) { return slbsr::cli::run(argc, argv); }
