#include "msir/cli.hpp"

int main(int argc, char** argv) { return msir::cli::run(argc, argv); }
