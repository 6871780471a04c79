#include "decline/cli.hpp"

int main(int argc, char** argv) { return decline::cli::run(argc, argv); }
