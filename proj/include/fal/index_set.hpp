#pragma once

#include <algorithm>
#include <vector>

namespace fal {

// Sample-ID sets are kept as sorted unique vectors: deterministic iteration
// order, cheap set algebra at desk scale.
using IndexSet = std::vector<int>;

namespace idx {

inline bool contains(const IndexSet& s, int id) {
    return std::binary_search(s.begin(), s.end(), id);
}

inline void insert(IndexSet& s, int id) {
    auto it = std::lower_bound(s.begin(), s.end(), id);
    if (it == s.end() || *it != id) s.insert(it, id);
}

inline void erase(IndexSet& s, int id) {
    auto it = std::lower_bound(s.begin(), s.end(), id);
    if (it != s.end() && *it == id) s.erase(it);
}

inline IndexSet from_unsorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    out.reserve(a.size());
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline bool is_subset(const IndexSet& a, const IndexSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool disjoint(const IndexSet& a, const IndexSet& b) {
    return set_intersection(a, b).empty();
}

}  // namespace idx
}  // namespace fal
