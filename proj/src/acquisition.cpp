#include "fal/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fal/errors.hpp"
#include "fal/rng.hpp"

namespace fal {
namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ContractError("coreset: feature dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::vector<int> top_by_score(const AcquisitionRequest& req, bool smallest_first) {
    std::vector<int> order = req.candidates;
    for (int id : order) {
        if (req.scores.find(id) == req.scores.end()) {
            throw ContractError("select: missing score for candidate " + std::to_string(id));
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = req.scores.at(a);
        const double sb = req.scores.at(b);
        if (sa != sb) return smallest_first ? sa < sb : sa > sb;
        return a < b;
    });
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(req.budget), order.size());
    order.resize(take);
    return order;
}

std::vector<int> greedy_k_center(const AcquisitionRequest& req,
                                 const std::map<int, std::vector<double>>& feats,
                                 const std::vector<std::vector<double>>& labeled) {
    for (int id : req.candidates) {
        if (feats.find(id) == feats.end()) {
            throw ContractError("select: missing features for candidate " + std::to_string(id));
        }
    }
    // min squared distance to the covered set (labeled + already chosen)
    std::vector<int> cands = req.candidates;
    std::sort(cands.begin(), cands.end());
    std::vector<double> min_d(cands.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto& f = feats.at(cands[i]);
        for (const auto& lf : labeled) min_d[i] = std::min(min_d[i], sq_distance(f, lf));
    }

    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(req.budget), cands.size());
    std::vector<int> chosen;
    std::vector<bool> used(cands.size(), false);
    for (std::size_t pick = 0; pick < take; ++pick) {
        std::size_t best = cands.size();
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (used[i]) continue;
            if (best == cands.size() || min_d[i] > min_d[best]) best = i;  // ties: lowest ID wins
        }
        used[best] = true;
        chosen.push_back(cands[best]);
        const auto& bf = feats.at(cands[best]);
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (!used[i]) min_d[i] = std::min(min_d[i], sq_distance(feats.at(cands[i]), bf));
        }
    }
    return chosen;
}

}  // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::random: return "random";
        case Strategy::entropy: return "entropy";
        case Strategy::margin: return "margin";
        case Strategy::coreset: return "coreset";
        case Strategy::ev: return "ev";
        case Strategy::ev_plus_gev: return "ev_plus_gev";
        case Strategy::ev_classcount: return "ev_classcount";
    }
    throw ContractError("strategy_name: unknown strategy");
}

Strategy strategy_from_name(const std::string& name) {
    for (Strategy s : {Strategy::random, Strategy::entropy, Strategy::margin, Strategy::coreset,
                       Strategy::ev, Strategy::ev_plus_gev, Strategy::ev_classcount}) {
        if (strategy_name(s) == name) return s;
    }
    throw ConfigError("strategy: unknown name '" + name + "'");
}

bool is_score_based(Strategy s) {
    return s != Strategy::random && s != Strategy::coreset;
}

std::vector<int> select(const AcquisitionRequest& req,
                        const std::map<int, std::vector<double>>& candidate_features,
                        const std::vector<std::vector<double>>& labeled_features) {
    if (req.budget < 0) throw ContractError("select: negative budget");
    if (req.budget == 0 || req.candidates.empty()) return {};

    switch (req.strategy) {
        case Strategy::random: {
            Rng rng(req.seed);
            return rng.sample_without_replacement(
                req.candidates, std::min<int>(req.budget, static_cast<int>(req.candidates.size())));
        }
        case Strategy::margin:
            return top_by_score(req, /*smallest_first=*/true);
        case Strategy::entropy:
        case Strategy::ev:
        case Strategy::ev_plus_gev:
        case Strategy::ev_classcount:
            return top_by_score(req, /*smallest_first=*/false);
        case Strategy::coreset:
            return greedy_k_center(req, candidate_features, labeled_features);
    }
    throw ContractError("select: unknown strategy");
}

}  // namespace fal
