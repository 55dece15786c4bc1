#pragma once

#include <cstdint>
#include <filesystem>

namespace hometrend {

/// Writes a deterministic three-station synthetic dataset (1983-2021) under dir:
/// stations/*.csv, reference/*.csv, stations_meta.csv and run.ini.
/// SYN1 is clean, SYN2 carries a +1.0 C Tmin shift from 2001 that the
/// reference does not share, SYN3 contains one of each QC defect.
void write_synthetic_fixture(const std::filesystem::path& dir, std::uint64_t seed = 42);

}  // namespace hometrend
