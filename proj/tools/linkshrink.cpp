#include "linkshrink/cli.hpp"

int main(int argc, char** argv) { return linkshrink::run_cli(argc, argv); }
