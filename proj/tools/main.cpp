#include "normreg/cli.hpp"

int main(int argc, char** argv) { return normreg::cli::run(argc, argv); }
