#include "phasekit/cli.hpp"

int main(int argc, char** argv) { return phasekit::run_command(argc, argv); }
