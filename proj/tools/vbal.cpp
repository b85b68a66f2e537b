#include "vbal/cli.hpp"

int main(int argc, char** argv) { return vbal::run_command(argc, argv); }
