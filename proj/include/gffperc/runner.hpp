#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace gffperc {

struct RunOptions {
  std::string command;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  int workers = 0;
};

/// Exit status: 0 ok, 1 verification failure, 2 configuration error.
int run(const RunOptions& opts, std::ostream& log);

}  // namespace gffperc
