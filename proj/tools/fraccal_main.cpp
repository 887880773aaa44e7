#include "fraccal/experiment.hpp"

int main(int argc, char** argv) { return fraccal::run_cli(argc, argv); }
