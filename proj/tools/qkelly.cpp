#include <qkelly/cli.hpp>

int main(int argc, char** argv) { return qkelly::cli::run(argc, argv); }
