#include "selfstart/random.hpp"

#include "selfstart/special_fn.hpp"

namespace selfstart {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline PhiloxBlock round(const PhiloxBlock& c, const PhiloxKey& k)
{
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key)
{
    counter = round(counter, key);
    for (int r = 1; r < 10; ++r) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
        counter = round(counter, key);
    }
    return counter;
}

std::uint64_t stable_hash(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

Substream::Substream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint32_t replication)
    : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      replication_(replication),
      stream_lo_(static_cast<std::uint32_t>(stream_id)),
      stream_hi_(static_cast<std::uint32_t>(stream_id >> 32))
{
}

double Substream::uniform(std::uint64_t index) const
{
    const PhiloxBlock out = philox4x32_10(
        {static_cast<std::uint32_t>(index), replication_, stream_lo_, stream_hi_ ^ static_cast<std::uint32_t>(index >> 32)},
        key_);
    const std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32 | out[1]) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Substream::normal(std::uint64_t index) const
{
    return special_fn::std_normal_quantile(uniform(index));
}

Substream substream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint32_t replication)
{
    return Substream(master_seed, stream_id, replication);
}

}  // namespace selfstart
