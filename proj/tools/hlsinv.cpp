#include "run.hpp"

int main(int argc, char** argv) { return hls::cli::cli_main(argc, argv); }
