#include <iostream>

#include "hspec/cli.hpp"

int main(int argc, char** argv) {
  auto parsed = hspec::cli::parse(argc, argv);
  if (!parsed.config) return parsed.exit_code;
  return hspec::cli::run(*parsed.config);
}
