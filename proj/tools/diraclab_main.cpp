#include "diraclab/cli.hpp"

int main(int argc, char** argv) { return diraclab::cli::run(argc, argv); }
