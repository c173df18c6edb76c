#include "fse/io.hpp"

int main(int argc, char** argv) { return fse::io::run_command(argc, argv); }
