#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

namespace tvwb {

// Work caps for the potentially explosive operations. Every limit can be
// overridden through an environment variable (documented in the README);
// overruns raise Error{too_large} instead of truncating silently.
struct Caps {
    std::uint64_t automorphisms   = 1'000'000;   // TVWB_CAP_AUTOMORPHISMS
    std::uint64_t memo_entries    = 20'000'000;  // TVWB_CAP_MEMO_ENTRIES
    std::uint64_t bfs_successors  = 1'000'000;   // TVWB_CAP_BFS_SUCCESSORS
    std::uint64_t measure_support = 100'000;     // TVWB_CAP_MEASURE_SUPPORT
    std::uint64_t tree_nodes      = 2'000'000;   // TVWB_CAP_TREE_NODES
    std::uint64_t mc_work         = 20'000'000;  // TVWB_CAP_MC_WORK
};

inline std::uint64_t cap_from_env(const char* name, std::uint64_t fallback) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return fallback;
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0' || parsed == 0) return fallback;
    return static_cast<std::uint64_t>(parsed);
}

inline Caps current_caps() {
    Caps c;
    c.automorphisms   = cap_from_env("TVWB_CAP_AUTOMORPHISMS", c.automorphisms);
    c.memo_entries    = cap_from_env("TVWB_CAP_MEMO_ENTRIES", c.memo_entries);
    c.bfs_successors  = cap_from_env("TVWB_CAP_BFS_SUCCESSORS", c.bfs_successors);
    c.measure_support = cap_from_env("TVWB_CAP_MEASURE_SUPPORT", c.measure_support);
    c.tree_nodes      = cap_from_env("TVWB_CAP_TREE_NODES", c.tree_nodes);
    c.mc_work         = cap_from_env("TVWB_CAP_MC_WORK", c.mc_work);
    return c;
}

} // namespace tvwb
