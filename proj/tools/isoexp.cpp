#include "iso/problem.hpp"

int main(int argc, char** argv) { return iso::run_cli(argc, argv); }
