#include "rffa/cli.hpp"

int main(int argc, char** argv) { return rffa::cli::run(argc, argv); }
