#include "fmda/cli.hpp"

int main(int argc, char** argv) { return fmda::cli::run(argc, argv); }
