#pragma once

// Counter-based random streams (Philox4x32-10).
//
// A stream is addressed by (master seed, stream id, replication index) and
// draw i is a pure function of that address and i. Results therefore do not
// depend on evaluation order or on how replications are spread over threads.

#include <array>
#include <cstdint>
#include <string_view>

namespace selfstart {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Ten-round Philox4x32 bijection.
PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key);

/// 64-bit FNV-1a, used to derive stable stream ids from descriptive keys.
std::uint64_t stable_hash(std::string_view text);

class Substream {
public:
    Substream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint32_t replication);

    /// Uniform on the open interval (0, 1) with 53 random bits; index >= 1.
    double uniform(std::uint64_t index) const;
    /// Standard Normal by inversion of uniform(index).
    double normal(std::uint64_t index) const;

private:
    PhiloxKey key_;
    std::uint32_t replication_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
};

/// Substream for one replication of one scenario.
Substream substream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint32_t replication);

}  // namespace selfstart
