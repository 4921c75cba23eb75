// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SCRAPOPT_UTIL_HPP
#define SCRAPOPT_UTIL_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace scrapopt {

// Shortest round-trip-exact decimal form ("%.17g").
std::string format_g17(double x);

// FNV-1a 64-bit hash, used for config/pulse fingerprints in output metadata.
std::uint64_t fnv1a64(std::string_view data);

std::string to_hex(std::uint64_t value);

}  // namespace scrapopt

#endif
