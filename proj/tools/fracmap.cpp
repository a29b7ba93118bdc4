#include "fracmap/cli_app.hpp"

int main(int argc, char** argv) { return fracmap::cli::cli_main(argc, argv); }
