#include "sociolex/cli.hpp"

int main(int argc, char** argv) { return sociolex::cli::run(argc, argv); }
