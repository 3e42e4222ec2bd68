#include "commands.hpp"

int main(int argc, char** argv) { return sasc::cli::run(argc, argv); }
