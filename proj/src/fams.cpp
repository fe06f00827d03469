#include "fal/fams.hpp"

#include <cmath>
#include <string>

#include "fal/errors.hpp"
#include "fal/rng.hpp"

namespace fal {

void FamsConfig::validate() const {
    if (subset_size < 1) throw ConfigError("fams.subset_size: must be >= 1");
    if (awaken_threshold < 1) throw ConfigError("fams.awaken_threshold: must be >= 1");
    if (!(awaken_ratio > 0.0 && awaken_ratio <= 1.0)) {
        throw ConfigError("fams.awaken_ratio: must be in (0,1]");
    }
}

ClientPools freeze(const ClientPools& pools, const std::map<int, int>& ev_map,
                   const IndexSet& selected) {
    if (!idx::is_subset(selected, pools.subset)) {
        throw ProtocolError("freeze: selected samples not within the round's subset");
    }
    IndexSet zero_ev;
    for (int id : idx::set_difference(pools.subset, selected)) {
        auto it = ev_map.find(id);
        if (it == ev_map.end()) {
            throw ProtocolError("freeze: no EV recorded for subset sample " + std::to_string(id));
        }
        if (it->second == 0) zero_ev.push_back(id);
    }
    ClientPools out = pools;
    out.dormant = idx::set_union(pools.dormant, zero_ev);
    out.unlabeled = idx::set_difference(pools.unlabeled, idx::set_union(zero_ev, selected));
    out.subset.clear();
    out.selected.clear();
    return out;
}

ClientPools awaken(const ClientPools& pools, const FamsConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (static_cast<int>(pools.unlabeled.size()) >= cfg.awaken_threshold) return pools;
    if (pools.dormant.empty()) return pools;

    const int k = static_cast<int>(
        std::ceil(cfg.awaken_ratio * static_cast<double>(pools.dormant.size())));
    Rng rng(seed);
    const IndexSet revived = idx::from_unsorted(rng.sample_without_replacement(pools.dormant, k));
    ClientPools out = pools;
    out.dormant = idx::set_difference(pools.dormant, revived);
    out.unlabeled = idx::set_union(pools.unlabeled, revived);
    return out;
}

ClientPools sample_subset(const ClientPools& pools, const FamsConfig& cfg, int round,
                          std::uint64_t seed) {
    cfg.validate();
    ClientPools out = pools;
    if (round > 0 && static_cast<int>(pools.unlabeled.size()) >= cfg.subset_size) {
        Rng rng(seed);
        out.subset =
            idx::from_unsorted(rng.sample_without_replacement(pools.unlabeled, cfg.subset_size));
    } else {
        out.subset = pools.unlabeled;
    }
    out.selected.clear();
    return out;
}

}  // namespace fal
