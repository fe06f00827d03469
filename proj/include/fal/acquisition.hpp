#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fal/index_set.hpp"

namespace fal {

enum class Strategy {
    random,
    entropy,
    margin,
    coreset,
    ev,
    ev_plus_gev,
    ev_classcount,
};

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

// True for strategies ranked by a per-candidate score (everything except
// random and coreset).
bool is_score_based(Strategy s);

struct AcquisitionRequest {
    Strategy strategy = Strategy::random;
    int budget = 0;
    std::vector<int> candidates;
    // Per-candidate score. Entropy/EV variants select the highest; margin
    // holds p_top1 - p_top2 and selects the smallest.
    std::map<int, double> scores;
    std::uint64_t seed = 0;
};

// Picks min(budget, |candidates|) distinct sample IDs. Ties in score-based
// strategies break to the smallest ID. Coreset runs greedy k-center over
// Euclidean feature distances with the labeled set as the initial cover.
std::vector<int> select(const AcquisitionRequest& req,
                        const std::map<int, std::vector<double>>& candidate_features = {},
                        const std::vector<std::vector<double>>& labeled_features = {});

}  // namespace fal
