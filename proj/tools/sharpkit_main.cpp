#include "sharpkit/cli.hpp"

int main(int argc, char** argv) { return sharpkit::cli::run(argc, argv); }
