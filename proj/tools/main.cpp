#include "mhqa/cli.hpp"

int main(int argc, char** argv) { return mhqa::report::run_cli(argc, argv); }
