// Independent reference implementations used only by tests. Each oracle
// deliberately takes a different route than the library code it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace oracles {

// ---- Floyd-Warshall all-pairs shortest paths ------------------------------

inline std::vector<std::vector<double>> floyd_warshall(
    std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& arcs) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, inf));
    for (std::size_t i = 0; i < n; ++i) dist[i][i] = 0.0;
    for (const auto& [u, v, w] : arcs) dist[u][v] = std::min(dist[u][v], w);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double via = dist[i][k] + dist[k][j];
                if (via < dist[i][j]) dist[i][j] = via;
            }
        }
    }
    return dist;
}

// ---- dense inflow (column sum, diagonal zeroed) ----------------------------

inline double dense_inflow(const std::vector<std::vector<double>>& dense, std::size_t dest) {
    double s = 0.0;
    for (std::size_t o = 0; o < dense.size(); ++o) {
        if (o != dest) s += dense[o][dest];
    }
    return s;
}

// ---- two-pass weighted dispersion in long double ---------------------------

struct DispersionRef {
    long double sd;
    long double xc;
    long double yc;
};

inline DispersionRef dispersion_two_pass(const std::vector<double>& w, const std::vector<double>& x,
                                         const std::vector<double>& y) {
    long double wsum = 0.0L, wx = 0.0L, wy = 0.0L;
    for (std::size_t i = 0; i < w.size(); ++i) {
        wsum += w[i];
        wx += static_cast<long double>(w[i]) * x[i];
        wy += static_cast<long double>(w[i]) * y[i];
    }
    long double xc = wx / wsum, yc = wy / wsum;
    long double acc = 0.0L;
    for (std::size_t i = 0; i < w.size(); ++i) {
        long double dx = x[i] - xc, dy = y[i] - yc;
        acc += w[i] * (dx * dx + dy * dy);
    }
    return DispersionRef{std::sqrt(acc / wsum), xc, yc};
}

// ---- multiset-expansion distance statistics --------------------------------
//
// Repeats each distance round(w*1000) times and takes plain unweighted
// mean/population-std of the expanded multiset.

struct StatsRef {
    double mu;
    double sigma;
};

inline StatsRef multiset_stats(const std::vector<double>& w, const std::vector<double>& d) {
    std::vector<double> expanded;
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto reps = static_cast<std::size_t>(std::llround(w[i] * 1000.0));
        for (std::size_t r = 0; r < reps; ++r) expanded.push_back(d[i]);
    }
    long double mean = 0.0L;
    for (double v : expanded) mean += v;
    mean /= static_cast<long double>(expanded.size());
    long double var = 0.0L;
    for (double v : expanded) {
        long double c = v - mean;
        var += c * c;
    }
    var /= static_cast<long double>(expanded.size());
    return StatsRef{static_cast<double>(mean), static_cast<double>(std::sqrt(var))};
}

// ---- direct Pearson correlation --------------------------------------------

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

// ---- naive complete-linkage HAC --------------------------------------------
//
// Keeps explicit member lists and recomputes every cluster-pair linkage from
// the original point-pair distance matrix on each step (no Lance-Williams
// update), with the same (distance, min id, max id) tie-break.

struct NaiveMerge {
    std::size_t a;
    std::size_t b;
    double distance;
    std::size_t new_id;
};

inline std::vector<NaiveMerge> naive_hac_complete(const std::vector<std::vector<double>>& point_dist) {
    std::size_t n = point_dist.size();
    std::vector<std::size_t> ids;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back(i);
        members.push_back({i});
    }
    std::vector<NaiveMerge> merges;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0, blo = 0, bhi = 0;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                double link = 0.0;
                for (std::size_t p : members[i])
                    for (std::size_t q : members[j]) link = std::max(link, point_dist[p][q]);
                std::size_t lo = std::min(ids[i], ids[j]);
                std::size_t hi = std::max(ids[i], ids[j]);
                if (link < best || (link == best && (lo < blo || (lo == blo && hi < bhi)))) {
                    best = link;
                    bi = i;
                    bj = j;
                    blo = lo;
                    bhi = hi;
                }
            }
        }
        std::size_t new_id = n + step;
        merges.push_back(NaiveMerge{blo, bhi, best, new_id});
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        ids[bi] = new_id;
        members.erase(members.begin() + static_cast<std::ptrdiff_t>(bj));
        ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return merges;
}

// ---- exact hypergeometric tail as a rational number -------------------------
//
// Works in exact unsigned arithmetic via binomial coefficients:
//   P(X = a) = C(a+b, a) * C(c+d, c) / C(n, a+c),
// valid for n <= 60 since C(60,30) < 2^63. The tail numerator accumulates in
// unsigned __int128.

inline unsigned long long binomial_u64(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 acc = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        acc = acc * static_cast<unsigned long long>(n - k + i) / static_cast<unsigned long long>(i);
    }
    return static_cast<unsigned long long>(acc);
}

struct Rational {
    unsigned __int128 num;
    unsigned __int128 den;

    long double value() const { return static_cast<long double>(num) / static_cast<long double>(den); }

    bool equals(unsigned long long n, unsigned long long d) const {
        return num * d == den * static_cast<unsigned __int128>(n);
    }
};

inline Rational exact_fet_tail(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    std::int64_t r1 = a + b, r2 = c + d, c1 = a + c, n = a + b + c + d;
    unsigned long long den = binomial_u64(n, c1);
    if (den == 0 || r1 == 0 || r2 == 0 || c1 == 0 || b + d == 0) return Rational{1, 1};
    std::int64_t hi = std::min(r1, c1);
    unsigned __int128 num = 0;
    for (std::int64_t ap = a; ap <= hi; ++ap) {
        num += static_cast<unsigned __int128>(binomial_u64(r1, ap)) * binomial_u64(r2, c1 - ap);
    }
    return Rational{num, den};
}

inline Rational exact_fet_point(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    std::int64_t r1 = a + b, r2 = c + d, c1 = a + c, n = a + b + c + d;
    unsigned long long den = binomial_u64(n, c1);
    if (den == 0 || r1 == 0 || r2 == 0 || c1 == 0 || b + d == 0) return Rational{1, 1};
    unsigned __int128 num = static_cast<unsigned __int128>(binomial_u64(r1, a)) * binomial_u64(r2, c);
    return Rational{num, den};
}

// ---- Adjusted Rand Index ----------------------------------------------------

inline double adjusted_rand_index(const std::vector<std::size_t>& u, const std::vector<std::size_t>& v) {
    std::size_t n = u.size();
    std::map<std::pair<std::size_t, std::size_t>, double> cont;
    std::map<std::size_t, double> row, col;
    for (std::size_t i = 0; i < n; ++i) {
        cont[{u[i], v[i]}] += 1.0;
        row[u[i]] += 1.0;
        col[v[i]] += 1.0;
    }
    auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_ij = 0.0, sum_r = 0.0, sum_c = 0.0;
    for (const auto& [key, m] : cont) sum_ij += choose2(m);
    for (const auto& [key, m] : row) sum_r += choose2(m);
    for (const auto& [key, m] : col) sum_c += choose2(m);
    double total = choose2(static_cast<double>(n));
    double expected = sum_r * sum_c / total;
    double max_index = (sum_r + sum_c) / 2.0;
    if (max_index == expected) return 1.0;
    return (sum_ij - expected) / (max_index - expected);
}

}  // namespace oracles
