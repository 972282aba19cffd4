#include "aberrate/cli.hpp"

int main(int argc, char** argv) { return aberrate::cli::run(argc, argv); }
