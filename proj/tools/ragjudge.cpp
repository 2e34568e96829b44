// SPDX-License-Identifier: Apache-2.0
#include "ragjudge/cli.hpp"

int main(int argc, char** argv) { return ragjudge::cli::run_cli(argc, argv); }
