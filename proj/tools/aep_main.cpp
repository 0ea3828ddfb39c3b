#include "aep/cli/commands.hpp"

int main(int argc, char** argv) { return aep::cli::run(argc, argv); }
