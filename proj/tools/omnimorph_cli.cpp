#include "omnimorph/cli_app.hpp"

int main(int argc, char** argv) { return omnimorph::cli::run_cli(argc, argv); }
