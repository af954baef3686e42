#include "qesc/cli.hpp"

int main(int argc, char** argv) { return qesc::run_cli(argc, argv); }
