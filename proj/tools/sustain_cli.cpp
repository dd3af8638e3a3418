#include "sustain/cli.hpp"

int main(int argc, char** argv) { return sustain::cli::dispatch(argc, argv); }
