#include "attnlex/cli.hpp"

int main(int argc, char** argv) { return attnlex::cli::run(argc, argv); }
