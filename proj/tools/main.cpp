#include "abreu/cli.hpp"

int main(int argc, char** argv) { return abreu::cli::run(argc, argv); }
