#include <causalseg/cli.hpp>

int main(int argc, char** argv) { return causalseg::cli::run_cli(argc, argv); }
