#include "cli.hpp"

int main(int argc, char** argv) { return courtgrid_cli::dispatch(argc, argv); }
