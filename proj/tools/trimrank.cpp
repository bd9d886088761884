#include "trimrank/cli_app.hpp"

int main(int argc, char** argv) { return trimrank::run_cli(argc, argv); }
