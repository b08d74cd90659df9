#include <reachcast/cli.hpp>

int main(int argc, char** argv) { return reachcast::cli::run(argc, argv); }
