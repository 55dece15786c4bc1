#pragma once

#include <cstdint>
#include <string_view>

namespace hometrend {

/// Stable child seed for a named stream (e.g. "ST1/DTR/annual/SNHT") under a
/// run seed. Independent of platform hashing and of evaluation order.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t root, std::string_view key);

}  // namespace hometrend
