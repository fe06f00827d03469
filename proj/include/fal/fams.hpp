#pragma once

#include <cstdint>
#include <map>

#include "fal/dataset.hpp"

namespace fal {

// Freeze/awaken with subset sampling: zero-EV candidates are parked in the
// dormant pool, a fraction is revived when the unlabeled pool runs low, and
// per-round inference is capped by sampling a fixed-size candidate subset.
struct FamsConfig {
    bool enabled = true;
    int subset_size = 500;      // N_s^U
    int awaken_threshold = 1;   // B'
    double awaken_ratio = 0.4;  // beta

    void validate() const;
};

// Moves zero-EV members of subset \ selected into the dormant pool and
// removes selected from unlabeled (the orchestrator labels them). Clears
// the round's subset/selected fields. Requires ev_map to cover the subset
// and selected to lie within it.
ClientPools freeze(const ClientPools& pools, const std::map<int, int>& ev_map,
                   const IndexSet& selected);

// If |unlabeled| < awaken_threshold, revives a seeded draw of
// ceil(awaken_ratio * |dormant|) dormant samples; otherwise a no-op.
ClientPools awaken(const ClientPools& pools, const FamsConfig& cfg, std::uint64_t seed);

// Sets the round's candidate subset: a seeded draw of subset_size IDs when
// round > 0 and the pool is large enough, the whole unlabeled pool
// otherwise (first-round waiver and small-pool branch).
ClientPools sample_subset(const ClientPools& pools, const FamsConfig& cfg, int round,
                          std::uint64_t seed);

}  // namespace fal
