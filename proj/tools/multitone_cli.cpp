#include "multitone/cli.hpp"

int main(int argc, char** argv) { return multitone::run_cli(argc, argv); }
