#include "easc/cli.hpp"

int main(int argc, char** argv) { return easc::cli::run(argc, argv); }
