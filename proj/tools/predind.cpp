#include "predind/cli.hpp"

int main(int argc, char** argv) { return predind::cli::run(argc, argv); }
