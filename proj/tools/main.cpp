#include "kurdner/cli.hpp"

int main(int argc, char** argv) { return kurdner::cli::dispatch(argc, argv); }
