#include "geofuse/cli.hpp"

int main(int argc, char** argv) { return geofuse::run_command(argc, argv); }
