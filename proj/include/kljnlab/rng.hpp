#pragma once

#include <array>
#include <cstdint>

namespace kljnlab {

// Counter-based random stream (Philox4x32-10, keyed by seed, with the stream
// id folded into the counter high words). The value produced at position n
// depends only on (seed, stream, n), so independent streams can be handed to
// parallel trials and replayed in any order with bit-identical results.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    // independent substream k of this stream (same seed, mixed stream id)
    RngStream derive(std::uint64_t k) const;

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // uniform on [0, 1), 53-bit resolution
    double uniform();
    // uniform on (0, 1], safe as a log() argument
    double uniform_pos();
    // standard normal via Box-Muller; pairs are cached
    double gaussian();
    // unbiased integer in [0, bound)
    std::uint64_t below(std::uint64_t bound);
    bool coin();

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace kljnlab
