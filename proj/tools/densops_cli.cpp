#include "densops/cli.hpp"

int main(int argc, char** argv) { return densops::cli::run(argc, argv); }
