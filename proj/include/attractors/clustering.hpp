#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "attractors/common.hpp"
#include "attractors/csv.hpp"
#include "attractors/features.hpp"
#include "attractors/parallel.hpp"

namespace attractors {

using FeatureVector = std::vector<double>;

// 1 - Pearson correlation of the two vectors' elements, in [0, 2].
// Degenerate centered vectors: both constant -> 0, exactly one -> 1.
inline double correlation_distance(const FeatureVector& x, const FeatureVector& y) {
    if (x.size() != y.size()) {
        throw ValidationError("correlation_distance: length mismatch (" + std::to_string(x.size()) +
                              " vs " + std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) throw ValidationError("correlation_distance: vectors must have length >= 2");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());

    double dot = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double cx = x[i] - mx;
        double cy = y[i] - my;
        dot += cx * cy;
        sx += cx * cx;
        sy += cy * cy;
    }
    if (sx == 0.0 && sy == 0.0) return 0.0;
    if (sx == 0.0 || sy == 0.0) return 1.0;
    double d = 1.0 - dot / std::sqrt(sx * sy);
    return std::clamp(d, 0.0, 2.0);
}

struct Merge {
    std::size_t cluster_a = 0;  // smaller cluster id
    std::size_t cluster_b = 0;  // larger cluster id
    double linkage_distance = 0.0;
    std::size_t new_cluster_id = 0;
};

// Leaves are cluster ids 0..n-1 in input order; merge m creates id n+m.
struct MergeTree {
    std::size_t n_leaves = 0;
    std::vector<std::string> leaf_ids;  // zone id per leaf, input order
    std::vector<Merge> merges;          // exactly n_leaves - 1 entries
};

inline std::vector<std::vector<double>> pairwise_correlation_distances(const std::vector<FeatureVector>& vectors,
                                                                       unsigned threads = 1) {
    std::size_t n = vectors.size();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    parallel_for(n, threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dist[i][j] = correlation_distance(vectors[i], vectors[j]);
        }
    });
    return dist;
}

// Complete-linkage agglomeration over correlation distance. Equal-distance
// candidates break lexicographically on (min cluster id, max cluster id),
// which pins the merge sequence for golden tests.
inline MergeTree hac_complete(const std::vector<FeatureVector>& vectors,
                              const std::vector<std::string>& leaf_ids, unsigned threads = 1) {
    std::size_t n = vectors.size();
    if (n < 2) throw ValidationError("hac_complete: need at least 2 vectors");
    if (leaf_ids.size() != n) throw ValidationError("hac_complete: leaf id count mismatch");

    MergeTree tree;
    tree.n_leaves = n;
    tree.leaf_ids = leaf_ids;

    std::vector<std::vector<double>> dist = pairwise_correlation_distances(vectors, threads);

    // Active slots hold current clusters; slot i reuses row i of `dist`.
    std::vector<std::size_t> act(n);
    std::vector<std::size_t> cluster_id(n);
    for (std::size_t i = 0; i < n; ++i) {
        act[i] = i;
        cluster_id[i] = i;
    }

    for (std::size_t step = 0; step + 1 < n; ++step) {
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best_lo = 0, best_hi = 0;      // cluster ids
        std::size_t best_si = 0, best_sj = 0;      // slots
        for (std::size_t a = 0; a < act.size(); ++a) {
            for (std::size_t b = a + 1; b < act.size(); ++b) {
                std::size_t si = act[a], sj = act[b];
                double d = dist[si][sj];
                std::size_t lo = std::min(cluster_id[si], cluster_id[sj]);
                std::size_t hi = std::max(cluster_id[si], cluster_id[sj]);
                if (d < best_d || (d == best_d && (lo < best_lo || (lo == best_lo && hi < best_hi)))) {
                    best_d = d;
                    best_lo = lo;
                    best_hi = hi;
                    best_si = si;
                    best_sj = sj;
                }
            }
        }

        std::size_t new_id = n + step;
        tree.merges.push_back(Merge{best_lo, best_hi, best_d, new_id});

        // Fold slot sj into slot si; complete linkage keeps the max distance.
        for (std::size_t s : act) {
            if (s == best_si || s == best_sj) continue;
            double m = std::max(dist[best_si][s], dist[best_sj][s]);
            dist[best_si][s] = m;
            dist[s][best_si] = m;
        }
        cluster_id[best_si] = new_id;
        act.erase(std::remove(act.begin(), act.end(), best_sj), act.end());
    }
    return tree;
}

// Leaf index sets per cluster after applying the first `n_leaves - k` merges.
inline std::vector<std::vector<std::size_t>> cut_members(const MergeTree& tree, std::size_t k) {
    std::size_t n = tree.n_leaves;
    if (k < 1 || k > n) {
        throw ValidationError("cut: k must be in [1, " + std::to_string(n) + "], got " + std::to_string(k));
    }
    std::vector<std::vector<std::size_t>> members(2 * n - 1);
    std::vector<bool> alive(2 * n - 1, false);
    for (std::size_t i = 0; i < n; ++i) {
        members[i] = {i};
        alive[i] = true;
    }
    for (std::size_t m = 0; m < n - k; ++m) {
        const Merge& mg = tree.merges[m];
        auto& dst = members[mg.new_cluster_id];
        dst = std::move(members[mg.cluster_a]);
        dst.insert(dst.end(), members[mg.cluster_b].begin(), members[mg.cluster_b].end());
        members[mg.cluster_b].clear();
        alive[mg.cluster_a] = false;
        alive[mg.cluster_b] = false;
        alive[mg.new_cluster_id] = true;
    }
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t id = 0; id < members.size(); ++id) {
        if (alive[id]) clusters.push_back(std::move(members[id]));
    }
    return clusters;
}

// Cluster indices ordered by descending size, ties by smallest member zone id.
// Returns cluster index per leaf.
inline std::vector<std::size_t> cut(const MergeTree& tree, std::size_t k) {
    auto clusters = cut_members(tree, k);
    std::vector<std::pair<std::size_t, std::string>> order;  // (cluster pos, min zone id)
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        std::string min_id = tree.leaf_ids[clusters[c][0]];
        for (std::size_t leaf : clusters[c]) min_id = std::min(min_id, tree.leaf_ids[leaf]);
        order.emplace_back(c, min_id);
    }
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        std::size_t sa = clusters[a.first].size(), sb = clusters[b.first].size();
        if (sa != sb) return sa > sb;
        return a.second < b.second;
    });
    std::vector<std::size_t> assignment(tree.n_leaves, 0);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        for (std::size_t leaf : clusters[order[rank].first]) assignment[leaf] = rank;
    }
    return assignment;
}

enum class VarianceScaling { kZScore, kRaw };

inline VarianceScaling variance_scaling_from_string(const std::string& s) {
    if (s == "zscore") return VarianceScaling::kZScore;
    if (s == "raw") return VarianceScaling::kRaw;
    throw ValidationError("variance_scaling must be 'zscore' or 'raw', got '" + s + "'");
}

// Per-feature z-score standardization (population std); constant features
// collapse to zero.
inline std::vector<FeatureVector> zscore_features(const std::vector<FeatureVector>& vectors) {
    if (vectors.empty()) return {};
    std::size_t dims = vectors[0].size();
    std::size_t n = vectors.size();
    std::vector<FeatureVector> out(n, FeatureVector(dims, 0.0));
    for (std::size_t d = 0; d < dims; ++d) {
        double mean = 0.0;
        for (const auto& v : vectors) mean += v[d];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& v : vectors) {
            double c = v[d] - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        double std_dev = std::sqrt(var);
        if (std_dev == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) out[i][d] = (vectors[i][d] - mean) / std_dev;
    }
    return out;
}

struct VariancePoint {
    std::size_t k = 0;
    double within_over_total = 0.0;
};

// Within-cluster over total sum of squares for each cut k = 1..k_max.
//
// Uses the SS decomposition: merging clusters A and B adds
// |A||B|/(|A|+|B|) * ||mean_A - mean_B||^2 to the within-SS, so within(k) is
// the partial sum of the first n-k merge costs. Partial sums of non-negative
// terms make the curve exactly 1.0 at k=1, 0.0 at k=n, and non-increasing.
inline std::vector<VariancePoint> variance_curve(const std::vector<FeatureVector>& vectors,
                                                 const MergeTree& tree, std::size_t k_max = 10,
                                                 VarianceScaling scaling = VarianceScaling::kZScore) {
    std::size_t n = tree.n_leaves;
    if (vectors.size() != n) throw ValidationError("variance_curve: vector count mismatch");
    if (k_max > n) throw ValidationError("variance_curve: k_max exceeds number of vectors");
    if (k_max < 1) throw ValidationError("variance_curve: k_max must be >= 1");

    std::vector<FeatureVector> pts = (scaling == VarianceScaling::kZScore) ? zscore_features(vectors) : vectors;
    std::size_t dims = pts.empty() ? 0 : pts[0].size();

    std::vector<double> cost(tree.merges.size(), 0.0);
    std::vector<FeatureVector> centroid(2 * n - 1, FeatureVector(dims, 0.0));
    std::vector<double> size(2 * n - 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        centroid[i] = pts[i];
        size[i] = 1.0;
    }
    for (std::size_t m = 0; m < tree.merges.size(); ++m) {
        const Merge& mg = tree.merges[m];
        double sa = size[mg.cluster_a], sb = size[mg.cluster_b];
        const auto& ca = centroid[mg.cluster_a];
        const auto& cb = centroid[mg.cluster_b];
        double gap2 = 0.0;
        auto& cn = centroid[mg.new_cluster_id];
        for (std::size_t d = 0; d < dims; ++d) {
            double diff = ca[d] - cb[d];
            gap2 += diff * diff;
            cn[d] = (sa * ca[d] + sb * cb[d]) / (sa + sb);
        }
        size[mg.new_cluster_id] = sa + sb;
        cost[m] = sa * sb / (sa + sb) * gap2;
    }

    double total = 0.0;
    for (double c : cost) total += c;

    std::vector<VariancePoint> curve;
    curve.reserve(k_max);
    // within(k) accumulated from the tail: start at within(1) = total and
    // peel merges off as k grows, so each within is a prefix sum of costs.
    std::vector<double> prefix(cost.size() + 1, 0.0);
    for (std::size_t m = 0; m < cost.size(); ++m) prefix[m + 1] = prefix[m] + cost[m];
    for (std::size_t k = 1; k <= k_max; ++k) {
        double within = prefix[n - k];
        double ratio;
        if (total > 0.0) {
            ratio = (k == 1) ? 1.0 : within / total;
        } else {
            ratio = (k == 1) ? 1.0 : 0.0;
        }
        curve.push_back(VariancePoint{k, ratio});
    }
    return curve;
}

struct SelectKResult {
    std::size_t k = 0;
    bool fallback = false;  // elbow rule never fired; k_max - 1 returned
};

// Smallest k whose step down the curve falls below elbow_tau times the
// total drop across the curve.
inline SelectKResult select_k(const std::vector<VariancePoint>& curve, double elbow_tau = 0.05) {
    if (curve.size() < 3) throw ValidationError("select_k: curve needs at least 3 points");
    double total_drop = curve.front().within_over_total - curve.back().within_over_total;
    double threshold = elbow_tau * total_drop;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        double drop = curve[i].within_over_total - curve[i + 1].within_over_total;
        if (drop < threshold) return SelectKResult{curve[i].k, false};
    }
    return SelectKResult{curve[curve.size() - 2].k, true};
}

enum class Archetype { kGlobal, kDowntown, kResidential, kOther };

inline const char* archetype_name(Archetype a) {
    switch (a) {
        case Archetype::kGlobal: return "Global";
        case Archetype::kDowntown: return "Downtown";
        case Archetype::kResidential: return "Residential";
        default: return "Other";
    }
}

inline Archetype archetype_from_string(const std::string& s) {
    if (s == "Global") return Archetype::kGlobal;
    if (s == "Downtown") return Archetype::kDowntown;
    if (s == "Residential") return Archetype::kResidential;
    if (s == "Other") return Archetype::kOther;
    throw ValidationError("unknown archetype '" + s + "'");
}

struct LabelResult {
    std::vector<Archetype> labels;  // per cluster index
    bool disagreement = false;      // Downtown rule conditions conflicted
};

// Reporting heuristic for k=3: the cluster with the widest origin dispersion
// is Global; of the rest, higher inflow density plus shorter mean distance
// marks Downtown. Any other k, or conflicting conditions, labels "Other".
inline LabelResult label_archetypes(std::size_t k, const std::vector<std::size_t>& assignment,
                                    const std::vector<AttractionFeatures>& features) {
    LabelResult result;
    result.labels.assign(k, Archetype::kOther);
    if (k != 3) return result;
    if (assignment.size() != features.size()) {
        throw ValidationError("label_archetypes: assignment/features size mismatch");
    }

    std::vector<double> sum_sd(k, 0.0), sum_ipm(k, 0.0), sum_mu(k, 0.0), count(k, 0.0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        std::size_t c = assignment[i];
        sum_sd[c] += features[i].sd;
        sum_ipm[c] += features[i].inflow_per_m2;
        sum_mu[c] += features[i].mu;
        count[c] += 1.0;
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] == 0.0) return result;  // empty cluster, keep Other
        sum_sd[c] /= count[c];
        sum_ipm[c] /= count[c];
        sum_mu[c] /= count[c];
    }

    std::size_t global = 0;
    for (std::size_t c = 1; c < k; ++c) {
        if (sum_sd[c] > sum_sd[global]) global = c;
    }
    std::vector<std::size_t> rest;
    for (std::size_t c = 0; c < k; ++c) {
        if (c != global) rest.push_back(c);
    }
    std::size_t a = rest[0], b = rest[1];
    bool a_downtown = sum_ipm[a] > sum_ipm[b] && sum_mu[a] < sum_mu[b];
    bool b_downtown = sum_ipm[b] > sum_ipm[a] && sum_mu[b] < sum_mu[a];
    if (a_downtown == b_downtown) {
        result.disagreement = true;
        return result;  // all Other
    }
    result.labels[global] = Archetype::kGlobal;
    result.labels[a_downtown ? a : b] = Archetype::kDowntown;
    result.labels[a_downtown ? b : a] = Archetype::kResidential;
    return result;
}

// ---- artifact writers -----------------------------------------------------

inline void write_clusters_csv(const std::vector<std::string>& zone_ids,
                               const std::vector<std::size_t>& assignment,
                               const std::vector<Archetype>& labels, const std::string& path) {
    std::vector<std::size_t> order(zone_ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return zone_ids[x] < zone_ids[y]; });
    CsvWriter w(path);
    w.row({"zone_id", "cluster", "archetype"});
    for (std::size_t i : order) {
        w.row({zone_ids[i], std::to_string(assignment[i]), archetype_name(labels[assignment[i]])});
    }
    w.close();
}

inline void write_variance_curve_csv(const std::vector<VariancePoint>& curve, const std::string& path) {
    CsvWriter w(path);
    w.row({"k", "within_over_total"});
    for (const VariancePoint& p : curve) w.row({std::to_string(p.k), fmt_double(p.within_over_total)});
    w.close();
}

inline void write_merges_csv(const MergeTree& tree, const std::string& path) {
    CsvWriter w(path);
    w.row({"cluster_a", "cluster_b", "linkage_distance", "new_cluster_id"});
    for (const Merge& m : tree.merges) {
        w.row({std::to_string(m.cluster_a), std::to_string(m.cluster_b), fmt_double(m.linkage_distance),
               std::to_string(m.new_cluster_id)});
    }
    w.close();
}

// zone_id -> (cluster, archetype) from a clusters.csv produced here or by an
// earlier stage.
inline std::map<std::string, std::pair<std::size_t, Archetype>> read_clusters_csv(const std::string& path) {
    CsvReader reader(path, {"zone_id", "cluster", "archetype"});
    std::map<std::string, std::pair<std::size_t, Archetype>> out;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const std::string row_ctx = path + " line " + std::to_string(reader.line_number());
        long long cluster = parse_int(fields[1], row_ctx);
        if (cluster < 0) throw ValidationError(row_ctx + ": negative cluster index");
        out[fields[0]] = {static_cast<std::size_t>(cluster), archetype_from_string(fields[2])};
    }
    return out;
}

}  // namespace attractors
