#include <poroflow/cli.hpp>

int main(int argc, char** argv) { return poroflow::cli::main(argc, argv); }
