// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#include "scrapopt/cli.hpp"

int main(int argc, char** argv) { return scrapopt::cli::run_cli(argc, argv); }
