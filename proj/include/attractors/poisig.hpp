#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "attractors/clustering.hpp"
#include "attractors/csv.hpp"
#include "attractors/ingest.hpp"
#include "attractors/parallel.hpp"

namespace attractors {

struct ContingencyTable {
    std::int64_t a = 0;  // POIs of type t inside class z
    std::int64_t b = 0;  // type t outside z
    std::int64_t c = 0;  // other types inside z
    std::int64_t d = 0;  // other types outside z

    std::int64_t n() const { return a + b + c + d; }
};

// log(k!) for k up to a fixed bound; built once per run since the city-wide
// POI count can reach tens of thousands and raw factorials overflow.
class LogFactorialTable {
public:
    explicit LogFactorialTable(std::size_t max_n) : lf_(max_n + 1, 0.0) {
        for (std::size_t i = 1; i <= max_n; ++i) {
            lf_[i] = lf_[i - 1] + std::log(static_cast<double>(i));
        }
    }
    double operator()(std::int64_t k) const { return lf_[static_cast<std::size_t>(k)]; }
    std::size_t max_n() const { return lf_.size() - 1; }

private:
    std::vector<double> lf_;
};

// Hypergeometric point probability of the observed table given its margins:
// (a+b)!(c+d)!(a+c)!(b+d)! / (a!b!c!d!n!), via log-factorial accumulation.
inline double fet_point_probability(const ContingencyTable& t, const LogFactorialTable& lf) {
    if (t.a + t.b == 0 || t.c + t.d == 0 || t.a + t.c == 0 || t.b + t.d == 0) return 1.0;
    double logp = lf(t.a + t.b) + lf(t.c + t.d) + lf(t.a + t.c) + lf(t.b + t.d) -
                  lf(t.a) - lf(t.b) - lf(t.c) - lf(t.d) - lf(t.n());
    return std::exp(logp);
}

// Upper-tail p-value: probability of observing `a` or more type-t POIs in
// the class under fixed margins.
inline double fet_one_sided(const ContingencyTable& t, const LogFactorialTable& lf) {
    if (t.a + t.b == 0 || t.c + t.d == 0 || t.a + t.c == 0 || t.b + t.d == 0) return 1.0;
    std::int64_t hi = std::min(t.a + t.b, t.a + t.c);
    long double acc = 0.0L;
    for (std::int64_t shift = 0; t.a + shift <= hi; ++shift) {
        ContingencyTable u{t.a + shift, t.b - shift, t.c - shift, t.d + shift};
        acc += static_cast<long double>(fet_point_probability(u, lf));
    }
    double p = static_cast<double>(acc);
    return std::min(p, 1.0);
}

// Counts for one (attractor class, POI type) pair. `zone_class` maps zone
// index -> archetype; zones without a class (unclassified) count as outside
// every class. Only zone-assigned POIs enter the universe.
inline ContingencyTable build_table(const POITable& pois,
                                    const std::vector<std::optional<Archetype>>& zone_class, Archetype cls,
                                    const std::string& poi_type) {
    if (!std::binary_search(pois.vocabulary.begin(), pois.vocabulary.end(), poi_type)) {
        throw ValidationError("build_table: unknown poi_type '" + poi_type + "'");
    }
    ContingencyTable t;
    for (const POIRecord& rec : pois.records) {
        if (!rec.assigned) continue;
        if (rec.zone >= zone_class.size()) throw ValidationError("build_table: POI zone index out of range");
        bool in_class = zone_class[rec.zone].has_value() && *zone_class[rec.zone] == cls;
        bool is_type = rec.type == poi_type;
        if (is_type && in_class) ++t.a;
        else if (is_type) ++t.b;
        else if (in_class) ++t.c;
        else ++t.d;
    }
    return t;
}

struct SignificanceRow {
    std::string poi_type;
    std::int64_t a = 0;
    double expected_a = 0.0;
    double p_value = 1.0;
    double p_bonferroni = 1.0;
};

struct SignificanceRanking {
    Archetype attractor_class = Archetype::kOther;
    std::vector<SignificanceRow> rows;  // ascending p_value, ties by poi_type
};

// One row per vocabulary type present in the class (a >= 1), ranked by
// one-sided FET p-value. Bonferroni column adjusts for the rows tested
// within this class.
inline SignificanceRanking rank_types(const POITable& pois,
                                      const std::vector<std::optional<Archetype>>& zone_class, Archetype cls,
                                      const LogFactorialTable& lf, unsigned threads = 1) {
    SignificanceRanking ranking;
    ranking.attractor_class = cls;

    std::vector<ContingencyTable> tables(pois.vocabulary.size());
    for (std::size_t i = 0; i < pois.vocabulary.size(); ++i) {
        tables[i] = build_table(pois, zone_class, cls, pois.vocabulary[i]);
    }

    std::vector<double> pvals(tables.size(), 1.0);
    parallel_for(tables.size(), threads, [&](std::size_t i) {
        if (tables[i].a >= 1) pvals[i] = fet_one_sided(tables[i], lf);
    });

    for (std::size_t i = 0; i < tables.size(); ++i) {
        const ContingencyTable& t = tables[i];
        if (t.a < 1) continue;
        SignificanceRow row;
        row.poi_type = pois.vocabulary[i];
        row.a = t.a;
        row.expected_a = t.n() > 0
                             ? static_cast<double>(t.a + t.b) * static_cast<double>(t.a + t.c) /
                                   static_cast<double>(t.n())
                             : 0.0;
        row.p_value = pvals[i];
        ranking.rows.push_back(std::move(row));
    }
    std::sort(ranking.rows.begin(), ranking.rows.end(), [](const SignificanceRow& x, const SignificanceRow& y) {
        if (x.p_value != y.p_value) return x.p_value < y.p_value;
        return x.poi_type < y.poi_type;
    });
    double m = static_cast<double>(ranking.rows.size());
    for (SignificanceRow& row : ranking.rows) {
        row.p_bonferroni = std::min(1.0, row.p_value * m);
    }
    return ranking;
}

inline void write_poi_significance_csv(const std::vector<SignificanceRanking>& rankings,
                                       const std::string& path) {
    CsvWriter w(path);
    w.row({"attractor_class", "poi_type", "a", "expected_a", "p_value", "p_bonferroni"});
    for (const SignificanceRanking& r : rankings) {
        for (const SignificanceRow& row : r.rows) {
            w.row({archetype_name(r.attractor_class), row.poi_type, std::to_string(row.a),
                   fmt_double(row.expected_a), fmt_double(row.p_value), fmt_double(row.p_bonferroni)});
        }
    }
    w.close();
}

}  // namespace attractors
