#include "nonrecip/scenario.hpp"

int main(int argc, char** argv) { return nonrecip::cli::run_cli(argc, argv); }
