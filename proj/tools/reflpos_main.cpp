#include "reflpos/cli.hpp"

int main(int argc, char** argv) { return reflpos::cli::run(argc, argv); }
