#include "repositioner/cli/cli.hpp"

int main(int argc, char** argv) { return repositioner::cli::run(argc, argv); }
