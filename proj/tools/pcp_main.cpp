#include "pcp/cli.hpp"

int main(int argc, char** argv) { return pcp::cli_dispatch(argc, argv); }
