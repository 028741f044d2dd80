#include "pfnts/harness.hpp"

int main(int argc, char** argv) { return pfnts::harness::cli(argc, argv); }
