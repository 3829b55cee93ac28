#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "attractors/csv.hpp"
#include "attractors/ingest.hpp"
#include "attractors/roadnet.hpp"

namespace attractors {

// One inbound flow source for a fixed destination zone.
struct FlowOrigin {
    std::size_t zone = 0;
    double trips = 0.0;
    Point location;                       // origin zone centroid
    std::optional<double> road_dist_m;    // absent when unreachable
};

struct FlowOriginSet {
    std::size_t dest = 0;
    std::vector<FlowOrigin> origins;  // positive trips, unique origin zones
};

enum class SdFormula {
    kStandard,   // sqrt(sum w*d^2 / sum w): weighted standard distance deviation
    kAsPrinted,  // sqrt(sum w*d^2) / sum w
};

inline SdFormula sd_formula_from_string(const std::string& s) {
    if (s == "standard") return SdFormula::kStandard;
    if (s == "as_printed") return SdFormula::kAsPrinted;
    throw ValidationError("sd_formula must be 'standard' or 'as_printed', got '" + s + "'");
}

struct AttractionFeatures {
    std::string zone_id;
    double inflow = 0.0;
    double inflow_per_m2 = 0.0;
    double sd = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    Point center_of_mass;
    double excluded_trips = 0.0;  // trips whose origin had no road distance
};

// Trip-weighted sum of inbound flows, self-loops excluded.
inline double inflow(const std::vector<std::pair<std::size_t, double>>& od_column, std::size_t dest) {
    double s = 0.0;
    for (const auto& [origin, trips] : od_column) {
        if (origin != dest) s += trips;
    }
    return s;
}

struct Dispersion {
    double sd = 0.0;
    Point center;
};

// Weighted center of mass of the origins and the weighted standard distance
// deviation about it. Two passes: the center first, then the spread, which
// stays accurate when the point cloud is far from the coordinate origin.
inline Dispersion spatial_dispersion(const std::vector<FlowOrigin>& origins,
                                     SdFormula formula = SdFormula::kStandard) {
    double wsum = 0.0, wx = 0.0, wy = 0.0;
    for (const FlowOrigin& o : origins) {
        wsum += o.trips;
        wx += o.trips * o.location.x;
        wy += o.trips * o.location.y;
    }
    if (!(wsum > 0.0)) throw ValidationError("spatial_dispersion: empty origin set");
    Point center{wx / wsum, wy / wsum};

    double acc = 0.0;
    for (const FlowOrigin& o : origins) {
        double dx = o.location.x - center.x;
        double dy = o.location.y - center.y;
        acc += o.trips * (dx * dx + dy * dy);
    }
    double sd = (formula == SdFormula::kStandard) ? std::sqrt(acc / wsum) : std::sqrt(acc) / wsum;
    return Dispersion{sd, center};
}

struct DistanceStats {
    double mu = 0.0;
    double sigma = 0.0;
    double excluded_trips = 0.0;
    bool defined = false;  // false when no origin has a finite road distance
};

// Trip-weighted mean and population standard deviation of the road-distance
// distribution; origins without a finite distance contribute only to
// excluded_trips.
inline DistanceStats distance_stats(const std::vector<FlowOrigin>& origins) {
    DistanceStats out;
    double wsum = 0.0, wd = 0.0;
    for (const FlowOrigin& o : origins) {
        if (o.road_dist_m.has_value()) {
            wsum += o.trips;
            wd += o.trips * *o.road_dist_m;
        } else {
            out.excluded_trips += o.trips;
        }
    }
    if (!(wsum > 0.0)) return out;
    out.mu = wd / wsum;
    double acc = 0.0;
    for (const FlowOrigin& o : origins) {
        if (!o.road_dist_m.has_value()) continue;
        double d = *o.road_dist_m - out.mu;
        acc += o.trips * d * d;
    }
    out.sigma = std::sqrt(acc / wsum);
    out.defined = true;
    return out;
}

struct UnclassifiedZone {
    std::string zone_id;
    std::string reason;  // "low_inflow" | "no_reachable_origins"
};

struct FeatureBuildResult {
    std::vector<AttractionFeatures> features;    // ascending zone_id
    std::vector<UnclassifiedZone> unclassified;  // ascending zone_id
    double unreachable_trips_total = 0.0;
};

// Assembles the per-zone feature vectors for every zone whose self-loop-
// excluded inflow reaches min_inflow. `columns` must hold a DistanceColumn
// for each zone index that passes the threshold (indexed lookup by dest).
inline FeatureBuildResult build_feature_vectors(const ODMatrix& od, const ZoneSet& zones,
                                                const std::vector<DistanceColumn>& columns,
                                                double min_inflow = 1.0,
                                                SdFormula formula = SdFormula::kStandard) {
    std::vector<const DistanceColumn*> by_dest(zones.size(), nullptr);
    for (const DistanceColumn& c : columns) by_dest[c.dest] = &c;

    auto od_columns = od.columns_by_dest(zones.size());
    FeatureBuildResult result;

    for (std::size_t zi : zones.sorted_indices()) {
        const Zone& zone = zones[zi];
        FlowOriginSet set;
        set.dest = zi;
        double flow = 0.0;
        for (const auto& [origin, trips] : od_columns[zi]) {
            if (origin == zi) continue;  // self-loops excluded from all features
            FlowOrigin o;
            o.zone = origin;
            o.trips = trips;
            o.location = zones[origin].centroid;
            if (by_dest[zi] != nullptr) {
                auto it = by_dest[zi]->dist_m.find(origin);
                if (it != by_dest[zi]->dist_m.end()) o.road_dist_m = it->second;
            }
            set.origins.push_back(std::move(o));
            flow += trips;
        }

        if (flow < min_inflow) {
            result.unclassified.push_back(UnclassifiedZone{zone.id, "low_inflow"});
            continue;
        }

        DistanceStats stats = distance_stats(set.origins);
        if (!stats.defined) {
            result.unclassified.push_back(UnclassifiedZone{zone.id, "no_reachable_origins"});
            result.unreachable_trips_total += stats.excluded_trips;
            continue;
        }
        Dispersion disp = spatial_dispersion(set.origins, formula);

        AttractionFeatures f;
        f.zone_id = zone.id;
        f.inflow = flow;
        f.inflow_per_m2 = zone.area_m2 > 0.0 ? flow / zone.area_m2 : 0.0;
        f.sd = disp.sd;
        f.center_of_mass = disp.center;
        f.mu = stats.mu;
        f.sigma = stats.sigma;
        f.excluded_trips = stats.excluded_trips;
        result.unreachable_trips_total += stats.excluded_trips;
        result.features.push_back(std::move(f));
    }
    return result;
}

inline const std::vector<std::string>& features_csv_header() {
    static const std::vector<std::string> header = {"zone_id", "inflow", "inflow_per_m2", "sd_m",
                                                    "mu_m",    "sigma_m", "xc",            "yc",
                                                    "excluded_trips"};
    return header;
}

inline void write_features_csv(const std::vector<AttractionFeatures>& features, const std::string& path) {
    CsvWriter w(path);
    w.row(features_csv_header());
    for (const AttractionFeatures& f : features) {
        w.row({f.zone_id, fmt_double(f.inflow), fmt_double(f.inflow_per_m2), fmt_double(f.sd),
               fmt_double(f.mu), fmt_double(f.sigma), fmt_double(f.center_of_mass.x),
               fmt_double(f.center_of_mass.y), fmt_double(f.excluded_trips)});
    }
    w.close();
}

inline std::vector<AttractionFeatures> read_features_csv(const std::string& path) {
    CsvReader reader(path, features_csv_header());
    std::vector<AttractionFeatures> out;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const std::string row_ctx = path + " line " + std::to_string(reader.line_number());
        AttractionFeatures f;
        f.zone_id = fields[0];
        f.inflow = parse_double(fields[1], row_ctx);
        f.inflow_per_m2 = parse_double(fields[2], row_ctx);
        f.sd = parse_double(fields[3], row_ctx);
        f.mu = parse_double(fields[4], row_ctx);
        f.sigma = parse_double(fields[5], row_ctx);
        f.center_of_mass = Point{parse_double(fields[6], row_ctx), parse_double(fields[7], row_ctx)};
        f.excluded_trips = parse_double(fields[8], row_ctx);
        out.push_back(std::move(f));
    }
    return out;
}

inline void write_unclassified_csv(const std::vector<UnclassifiedZone>& roster, const std::string& path) {
    CsvWriter w(path);
    w.row({"zone_id", "reason"});
    for (const UnclassifiedZone& u : roster) w.row({u.zone_id, u.reason});
    w.close();
}

}  // namespace attractors
