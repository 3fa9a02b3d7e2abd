// Copyright 2026 The mrcosts Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return mrcosts::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
