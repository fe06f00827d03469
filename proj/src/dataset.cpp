#include "fal/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "fal/rng.hpp"

namespace fal {
namespace {

std::vector<std::vector<double>> class_means(int num_classes, int dim) {
    std::vector<std::vector<double>> means(static_cast<std::size_t>(num_classes),
                                           std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    if (dim == 1) {
        if (num_classes > 2) {
            throw ConfigError("make_synthetic: dim=1 admits at most 2 distinct unit means");
        }
        for (int c = 0; c < num_classes; ++c) means[static_cast<std::size_t>(c)][0] = c == 0 ? 1.0 : -1.0;
        return means;
    }
    for (int c = 0; c < num_classes; ++c) {
        const double theta = 2.0 * M_PI * c / num_classes;
        means[static_cast<std::size_t>(c)][0] = std::cos(theta);
        means[static_cast<std::size_t>(c)][1] = std::sin(theta);
    }
    return means;
}

// Per-class train IDs, sorted.
std::vector<IndexSet> ids_by_class(const Dataset& ds) {
    std::vector<IndexSet> by_class(static_cast<std::size_t>(ds.num_classes));
    for (int id : ds.train_ids) {
        by_class[static_cast<std::size_t>(ds.samples[static_cast<std::size_t>(id)].label)].push_back(id);
    }
    return by_class;
}

// Largest-remainder allocation of n items according to nonnegative weights;
// conserves n exactly. Remainder ties go to the lowest index.
std::vector<int> largest_remainder(const std::vector<double>& weights, int n) {
    const std::size_t k = weights.size();
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<int> counts(k, 0);
    if (n == 0) return counts;
    if (total <= 0.0) {
        for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(i) % k] += 1;
        return counts;
    }
    std::vector<std::pair<double, std::size_t>> rema(k);
    int assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double share = weights[i] / total * n;
        counts[i] = static_cast<int>(std::floor(share));
        assigned += counts[i];
        rema[i] = {share - counts[i], i};
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int r = 0; r < n - assigned; ++r) counts[rema[static_cast<std::size_t>(r)].second] += 1;
    return counts;
}

}  // namespace

Dataset make_synthetic(int num_classes, int per_class, int dim, double spread,
                       std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("make_synthetic: num_classes must be >= 2");
    if (per_class < 1) throw ConfigError("make_synthetic: per_class must be >= 1");
    if (dim < 1) throw ConfigError("make_synthetic: dim must be >= 1");
    if (spread < 0.0) throw ConfigError("make_synthetic: spread must be >= 0");

    const auto means = class_means(num_classes, dim);
    Dataset ds;
    ds.num_classes = num_classes;
    ds.samples.resize(static_cast<std::size_t>(num_classes) * per_class);

    Rng rng(seed);
    const int n_test = per_class / 5;  // 80/20, test rounded down
    const int n_train = per_class - n_test;

    // ID = draw_index * C + class, so classes interleave in ID order.
    for (int s = 0; s < per_class; ++s) {
        for (int c = 0; c < num_classes; ++c) {
            const int id = s * num_classes + c;
            Sample& smp = ds.samples[static_cast<std::size_t>(id)];
            smp.label = c;
            smp.x.resize(static_cast<std::size_t>(dim));
            for (int d = 0; d < dim; ++d) {
                smp.x[static_cast<std::size_t>(d)] =
                    means[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] +
                    spread * rng.normal();
            }
            if (s < n_train) {
                ds.train_ids.push_back(id);
            } else {
                ds.test_ids.push_back(id);
            }
        }
    }
    std::sort(ds.train_ids.begin(), ds.train_ids.end());
    std::sort(ds.test_ids.begin(), ds.test_ids.end());
    return ds;
}

Dataset load_dataset_csv(const std::string& path, std::uint64_t split_seed) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");

    // Header must be f0,...,fD,label.
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
    }
    if (cols.size() < 2 || cols.back() != "label") {
        throw ConfigError(path + ": header must be f0,...,fD,label");
    }
    const int dim = static_cast<int>(cols.size()) - 1;
    for (int d = 0; d < dim; ++d) {
        if (cols[static_cast<std::size_t>(d)] != "f" + std::to_string(d)) {
            throw ConfigError(path + ": feature column " + std::to_string(d) + " must be named f" +
                              std::to_string(d));
        }
    }

    Dataset ds;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        Sample smp;
        smp.x.reserve(static_cast<std::size_t>(dim));
        int field = 0;
        while (std::getline(ss, tok, ',')) {
            try {
                if (field < dim) {
                    smp.x.push_back(std::stod(tok));
                } else {
                    smp.label = std::stoi(tok);
                }
            } catch (const std::exception&) {
                throw ConfigError(path + ":" + std::to_string(line_no) + ": bad value '" + tok + "'");
            }
            ++field;
        }
        if (field != dim + 1) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(dim + 1) + " fields, got " + std::to_string(field));
        }
        if (smp.label < 0) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": negative label");
        }
        ds.num_classes = std::max(ds.num_classes, smp.label + 1);
        ds.samples.push_back(std::move(smp));
    }
    if (ds.samples.empty()) throw ConfigError(path + ": no data rows");
    if (ds.num_classes < 2) throw ConfigError(path + ": need at least 2 classes");

    // Stratified 80/20 split, seeded.
    std::vector<IndexSet> by_class(static_cast<std::size_t>(ds.num_classes));
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        by_class[static_cast<std::size_t>(ds.samples[i].label)].push_back(static_cast<int>(i));
    }
    Rng rng(split_seed);
    for (auto& ids : by_class) {
        rng.shuffle(ids);
        const int n_test = static_cast<int>(ids.size()) / 5;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (static_cast<int>(i) < n_test) {
                ds.test_ids.push_back(ids[i]);
            } else {
                ds.train_ids.push_back(ids[i]);
            }
        }
    }
    std::sort(ds.train_ids.begin(), ds.train_ids.end());
    std::sort(ds.test_ids.begin(), ds.test_ids.end());
    return ds;
}

void PartitionSpec::validate(int num_classes) const {
    if (num_clients < 1) throw ConfigError("partition.num_clients: must be >= 1");
    switch (kind) {
        case PartitionKind::classes_per_client:
            if (classes_per_client < 1 || classes_per_client > num_classes) {
                throw ConfigError("partition.classes_per_client: must be in [1, num_classes]");
            }
            if (static_cast<long long>(num_clients) * classes_per_client < num_classes) {
                throw ConfigError(
                    "partition.classes_per_client: K*C_k < C cannot cover every class");
            }
            break;
        case PartitionKind::dirichlet:
            if (!(alpha > 0.0)) throw ConfigError("partition.alpha: must be > 0");
            break;
        case PartitionKind::iid:
            break;
    }
}

void ClientPools::validate() const {
    if (!idx::disjoint(labeled, unlabeled) || !idx::disjoint(labeled, dormant) ||
        !idx::disjoint(unlabeled, dormant)) {
        throw ProtocolError("pools: labeled/unlabeled/dormant not pairwise disjoint");
    }
    if (!idx::is_subset(subset, unlabeled)) {
        throw ProtocolError("pools: subset not contained in unlabeled");
    }
    if (!idx::is_subset(selected, subset)) {
        throw ProtocolError("pools: selected not contained in subset");
    }
}

std::vector<ClientPools> partition(const Dataset& ds, const PartitionSpec& spec) {
    spec.validate(ds.num_classes);
    const int K = spec.num_clients;
    const int C = ds.num_classes;
    std::vector<ClientPools> pools(static_cast<std::size_t>(K));
    const auto by_class = ids_by_class(ds);

    switch (spec.kind) {
        case PartitionKind::iid: {
            for (int c = 0; c < C; ++c) {
                const IndexSet& ids = by_class[static_cast<std::size_t>(c)];
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    pools[i % static_cast<std::size_t>(K)].unlabeled.push_back(ids[i]);
                }
            }
            break;
        }
        case PartitionKind::classes_per_client: {
            // Seeded class permutation; client k holds the cyclic block of
            // C_k classes starting at k*C_k. Blocks tile all classes when
            // K*C_k >= C, and per-class holder counts differ by at most one.
            std::vector<int> perm(static_cast<std::size_t>(C));
            std::iota(perm.begin(), perm.end(), 0);
            Rng rng(derive_seed(spec.seed, {0x70617274ULL}));
            rng.shuffle(perm);

            std::vector<std::vector<int>> holders(static_cast<std::size_t>(C));
            for (int k = 0; k < K; ++k) {
                for (int j = 0; j < spec.classes_per_client; ++j) {
                    const int slot = (k * spec.classes_per_client + j) % C;
                    holders[static_cast<std::size_t>(perm[static_cast<std::size_t>(slot)])].push_back(k);
                }
            }
            for (int c = 0; c < C; ++c) {
                IndexSet ids = by_class[static_cast<std::size_t>(c)];
                Rng class_rng(derive_seed(spec.seed, {0x636c73ULL, static_cast<std::uint64_t>(c)}));
                class_rng.shuffle(ids);
                const auto& hs = holders[static_cast<std::size_t>(c)];
                const std::size_t h = hs.size();
                // Near-equal contiguous chunks.
                std::size_t start = 0;
                for (std::size_t i = 0; i < h; ++i) {
                    const std::size_t count = ids.size() / h + (i < ids.size() % h ? 1 : 0);
                    for (std::size_t j = 0; j < count; ++j) {
                        pools[static_cast<std::size_t>(hs[i])].unlabeled.push_back(ids[start + j]);
                    }
                    start += count;
                }
            }
            break;
        }
        case PartitionKind::dirichlet: {
            for (int c = 0; c < C; ++c) {
                IndexSet ids = by_class[static_cast<std::size_t>(c)];
                Rng class_rng(derive_seed(spec.seed, {0x646972ULL, static_cast<std::uint64_t>(c)}));
                class_rng.shuffle(ids);
                std::vector<double> draws(static_cast<std::size_t>(K));
                for (int k = 0; k < K; ++k) draws[static_cast<std::size_t>(k)] = class_rng.gamma(spec.alpha);
                const std::vector<int> counts = largest_remainder(draws, static_cast<int>(ids.size()));
                std::size_t start = 0;
                for (int k = 0; k < K; ++k) {
                    for (int j = 0; j < counts[static_cast<std::size_t>(k)]; ++j) {
                        pools[static_cast<std::size_t>(k)].unlabeled.push_back(ids[start + static_cast<std::size_t>(j)]);
                    }
                    start += static_cast<std::size_t>(counts[static_cast<std::size_t>(k)]);
                }
            }
            break;
        }
    }

    for (auto& p : pools) {
        std::sort(p.unlabeled.begin(), p.unlabeled.end());
        p.validate();
    }
    return pools;
}

ClientPools init_labeled(const ClientPools& pools, double init_fraction, std::uint64_t seed) {
    if (!pools.labeled.empty()) throw ContractError("init_labeled: labeled set must start empty");
    if (!(init_fraction > 0.0 && init_fraction < 1.0)) {
        throw ConfigError("init_labeled_fraction: must be in (0,1)");
    }
    const std::size_t n = pools.unlabeled.size();
    const int k = static_cast<int>(std::ceil(init_fraction * static_cast<double>(n)));
    if (k == 0) throw ConfigError("init_labeled: fraction yields zero samples");
    if (static_cast<std::size_t>(k) >= n) {
        throw ConfigError("init_labeled: fraction would label the entire pool");
    }

    Rng rng(seed);
    const IndexSet chosen = idx::from_unsorted(rng.sample_without_replacement(pools.unlabeled, k));
    ClientPools out = pools;
    out.labeled = chosen;
    out.unlabeled = idx::set_difference(pools.unlabeled, chosen);
    out.dormant.clear();
    out.subset.clear();
    out.selected.clear();
    out.validate();
    return out;
}

}  // namespace fal
