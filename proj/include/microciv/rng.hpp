#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace microciv {

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t mix64(std::uint64_t x) noexcept;
std::string to_hex(std::uint64_t value);

// Maps 64 random bits onto [0, 1).
double unit_interval(std::uint64_t bits) noexcept;

// Counter-based named random streams. Each consumption point in the engine
// draws from its own named stream, so adding a draw in one subsystem never
// shifts the values another subsystem sees. The whole state is the seed plus
// one counter per stream, which keeps saves small and replay exact.
class RngStreams {
public:
    RngStreams() = default;
    explicit RngStreams(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next(std::string_view stream);
    // Uniform integer in [lo, hi] (inclusive).
    int uniform_int(std::string_view stream, int lo, int hi);
    double uniform01(std::string_view stream);

    std::uint64_t seed() const noexcept { return seed_; }
    const std::map<std::string, std::uint64_t, std::less<>>& counters() const noexcept {
        return counters_;
    }

    void reseed(std::uint64_t seed) {
        seed_ = seed;
        counters_.clear();
    }
    void set_counter(const std::string& stream, std::uint64_t value) { counters_[stream] = value; }

    bool operator==(const RngStreams&) const = default;

private:
    std::uint64_t seed_ = 0;
    std::map<std::string, std::uint64_t, std::less<>> counters_;
};

// Stateless draw: the value a fresh stream `stream` seeded with `seed` would
// produce at position `index`.
std::uint64_t stream_value(std::uint64_t seed, std::string_view stream, std::uint64_t index) noexcept;

} // namespace microciv
