#include "morphforge/cli.hpp"

int main(int argc, char** argv) { return morphforge::cli::run(argc, argv); }
