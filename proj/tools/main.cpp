#include "commands.hpp"

int main(int argc, char** argv) { return ollie::cli::run(argc, argv); }
