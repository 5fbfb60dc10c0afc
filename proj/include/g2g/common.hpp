#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace g2g {

using NodeId = std::int32_t;

/// Directed arc or canonical (src < dst) undirected pair, depending on context.
using Edge = std::pair<NodeId, NodeId>;

struct EdgeHash {
    std::size_t operator()(const Edge& e) const noexcept {
        return (static_cast<std::size_t>(static_cast<std::uint32_t>(e.first)) << 32) |
               static_cast<std::uint32_t>(e.second);
    }
};

/// Malformed or inconsistent input data (files, shapes, infeasible splits).
/// The CLI maps this category to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed, a purpose tag and an
/// index (FNV-1a over the tag, mixed with splitmix64). Every stochastic
/// operation in the project draws its generator through this function so a
/// single user-facing seed reproduces the whole run.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return splitmix64(base ^ splitmix64(h ^ splitmix64(index)));
}

inline Rng make_rng(std::uint64_t base, std::string_view tag, std::uint64_t index = 0) {
    return Rng(derive_seed(base, tag, index));
}

} // namespace g2g
