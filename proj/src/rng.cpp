#include "microciv/rng.hpp"

#include <cstdio>

namespace microciv {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

double unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::uint64_t stream_value(std::uint64_t seed, std::string_view stream, std::uint64_t index) noexcept {
    const std::uint64_t key = mix64(seed ^ mix64(fnv1a64(stream)));
    return mix64(key + index * 0x9e3779b97f4a7c15ULL);
}

std::uint64_t RngStreams::next(std::string_view stream) {
    auto it = counters_.find(stream);
    if (it == counters_.end()) {
        it = counters_.emplace(std::string(stream), 0).first;
    }
    return stream_value(seed_, stream, it->second++);
}

int RngStreams::uniform_int(std::string_view stream, int lo, int hi) {
    if (hi <= lo) {
        next(stream);
        return lo;
    }
    const auto range = static_cast<unsigned __int128>(static_cast<std::uint64_t>(hi) -
                                                      static_cast<std::uint64_t>(lo) + 1);
    const auto scaled = (static_cast<unsigned __int128>(next(stream)) * range) >> 64;
    return lo + static_cast<int>(scaled);
}

double RngStreams::uniform01(std::string_view stream) {
    return unit_interval(next(stream));
}

} // namespace microciv
