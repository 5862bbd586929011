#include "cli.hpp"

int main(int argc, char** argv) { return dimsig::cli::run(argc, argv); }
