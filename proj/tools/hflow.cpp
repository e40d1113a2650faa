#include "hflow/cli.hpp"

int main(int argc, char** argv) { return hflow::cli::run(argc, argv); }
