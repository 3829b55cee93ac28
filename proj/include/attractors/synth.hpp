#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "attractors/clustering.hpp"
#include "attractors/ingest.hpp"

namespace attractors {

// Deterministic uniform draws on top of mt19937_64; all generator randomness
// goes through this so a seed pins every output byte.
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

    // Weighted index draw over a cumulative-sum table.
    std::size_t weighted(const std::vector<double>& cumulative) {
        double r = uniform() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
        return std::min(i, cumulative.size() - 1);
    }

private:
    std::mt19937_64 eng_;
};

struct PoiPlantRule {
    Archetype archetype = Archetype::kOther;
    std::string poi_type;
    double multiplier = 1.0;
};

struct SynthConfig {
    std::uint64_t seed = 1;
    std::size_t n_zones = 400;
    double grid_extent_m = 20000.0;
    std::size_t n_global = 8;
    double downtown_radius_m = 2500.0;
    double flow_scale = 100.0;
    std::size_t road_grid_side = 0;  // 0: one road node per zone cell
    std::size_t n_pois = 3000;
    bool uniform_pois = false;  // true: ignore plant rules (null model)
    std::vector<PoiPlantRule> poi_plant = default_poi_plant();

    static std::vector<PoiPlantRule> default_poi_plant() {
        return {
            {Archetype::kGlobal, "factory", 5.0},
            {Archetype::kGlobal, "embassy", 5.0},
            {Archetype::kGlobal, "university", 5.0},
            {Archetype::kGlobal, "hospital", 5.0},
            {Archetype::kDowntown, "firm", 5.0},
            {Archetype::kDowntown, "shopping_center", 5.0},
            {Archetype::kDowntown, "hotel", 5.0},
            {Archetype::kResidential, "furnished_apartment", 5.0},
            {Archetype::kResidential, "mosque", 5.0},
            {Archetype::kResidential, "public_school", 5.0},
        };
    }
};

// The closed service vocabulary used by the generator (23 types).
inline const std::vector<std::string>& synth_poi_vocabulary() {
    static const std::vector<std::string> vocab = {
        "bakery",        "bank",     "cafe",           "car_dealership", "clinic",
        "embassy",       "factory",  "firm",           "furnished_apartment", "gas_station",
        "government_office", "grocery", "hospital",    "hotel",          "mosque",
        "park",          "pharmacy", "private_school", "public_school",  "restaurant",
        "shopping_center", "sports_facility", "university"};
    return vocab;
}

struct SynthCity {
    ZoneSet zones;
    ODMatrix od;
    RoadGraphSpec roadnet;
    POITable pois;
    std::vector<Archetype> ground_truth;  // by zone index
};

namespace detail {

inline std::string padded_id(const char* prefix, std::size_t i, std::size_t width) {
    std::string digits = std::to_string(i);
    std::string out(prefix);
    for (std::size_t p = digits.size(); p < width; ++p) out.push_back('0');
    out += digits;
    return out;
}

}  // namespace detail

// Square-grid city with planted Global / Downtown / Residential structure.
//
// Flow model per destination archetype (decay lengths in zone pitches):
//   Global      ~ U(100,200)*flow_scale trips from jittered-uniform origins
//                 citywide; placement radius from the center grows with the
//                 inflow draw (the strongest attractors sit farthest out).
//   Downtown    ~ U(50,100)*flow_scale from tightly decayed origins
//                 (lambda = 0.4 pitch): high inflow, short accessible trips.
//   Residential ~ U(1,10)*flow_scale from locally decayed origins
//                 (lambda = 2 pitches): low, local flow.
inline SynthCity generate(const SynthConfig& config) {
    if (config.n_zones < 1) throw ValidationError("synth: n_zones must be >= 1");
    if (config.n_global < 1) throw ValidationError("synth: n_global must be >= 1");
    if (config.n_global > config.n_zones) {
        throw ValidationError("synth: n_global (" + std::to_string(config.n_global) +
                              ") exceeds n_zones (" + std::to_string(config.n_zones) + ")");
    }
    if (!(config.downtown_radius_m < config.grid_extent_m)) {
        throw ValidationError("synth: downtown_radius_m must be smaller than grid_extent_m");
    }
    if (!(config.flow_scale > 0.0)) throw ValidationError("synth: flow_scale must be positive");
    for (const PoiPlantRule& rule : config.poi_plant) {
        const auto& vocab = synth_poi_vocabulary();
        if (std::find(vocab.begin(), vocab.end(), rule.poi_type) == vocab.end()) {
            throw ValidationError("synth: poi_plant type '" + rule.poi_type + "' not in vocabulary");
        }
        if (!(rule.multiplier > 0.0)) throw ValidationError("synth: poi_plant multiplier must be positive");
    }

    SynthRng rng(config.seed);
    SynthCity city;

    std::size_t side = 1;
    while (side * side < config.n_zones) ++side;
    double pitch = config.grid_extent_m / static_cast<double>(side);
    std::size_t id_width = std::to_string(config.n_zones - 1).size();

    std::vector<Point> centers(config.n_zones);
    for (std::size_t i = 0; i < config.n_zones; ++i) {
        std::size_t row = i / side, col = i % side;
        double x0 = static_cast<double>(col) * pitch;
        double y0 = static_cast<double>(row) * pitch;
        centers[i] = Point{x0 + pitch / 2.0, y0 + pitch / 2.0};
        Zone z;
        z.id = detail::padded_id("z", i, id_width);
        z.geometry.push_back(Polygon{Ring{Point{x0, y0}, Point{x0 + pitch, y0},
                                          Point{x0 + pitch, y0 + pitch}, Point{x0, y0 + pitch}}});
        z.centroid = centers[i];
        z.area_m2 = pitch * pitch;
        for (const Point& p : z.geometry[0][0]) z.bbox.expand(p);
        city.zones.add(std::move(z));
    }

    const Point center{config.grid_extent_m / 2.0, config.grid_extent_m / 2.0};
    std::vector<double> center_dist(config.n_zones);
    for (std::size_t i = 0; i < config.n_zones; ++i) {
        double dx = centers[i].x - center.x, dy = centers[i].y - center.y;
        center_dist[i] = std::sqrt(dx * dx + dy * dy);
    }

    // Downtown first, then globals among the remaining zones.
    city.ground_truth.assign(config.n_zones, Archetype::kResidential);
    std::vector<std::size_t> non_downtown;
    for (std::size_t i = 0; i < config.n_zones; ++i) {
        if (center_dist[i] <= config.downtown_radius_m) city.ground_truth[i] = Archetype::kDowntown;
        else non_downtown.push_back(i);
    }
    if (non_downtown.size() < config.n_global) {
        throw ValidationError("synth: downtown covers too many zones to place " +
                              std::to_string(config.n_global) + " global zones");
    }

    // Global inflow draws, ascending, each mapped to a placement radius so
    // that inflow and travel distance rise together across the global class.
    std::vector<double> global_inflow(config.n_global);
    for (double& v : global_inflow) v = rng.uniform(100.0, 200.0) * config.flow_scale;
    std::sort(global_inflow.begin(), global_inflow.end());

    double r_max = 0.0;
    for (std::size_t i : non_downtown) r_max = std::max(r_max, center_dist[i]);
    double r_min = std::min(config.downtown_radius_m + pitch, r_max);

    std::vector<std::size_t> global_zone(config.n_global);
    std::vector<bool> used(config.n_zones, false);
    std::vector<double> global_target(config.n_global, 0.0);
    for (std::size_t g = 0; g < config.n_global; ++g) {
        double frac = (global_inflow[g] / config.flow_scale - 100.0) / 100.0;
        double target = r_min + frac * (r_max - r_min);
        global_target[g] = target;
        // Shortlist the closest-radius free zones, pick one at random for
        // angular variety.
        std::vector<std::size_t> candidates;
        for (std::size_t i : non_downtown) {
            if (!used[i]) candidates.push_back(i);
        }
        std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
            double da = std::fabs(center_dist[a] - target);
            double db = std::fabs(center_dist[b] - target);
            if (da != db) return da < db;
            return a < b;
        });
        std::size_t shortlist = std::min<std::size_t>(candidates.size(), 8);
        std::size_t pick = candidates[rng.index(shortlist)];
        used[pick] = true;
        global_zone[g] = pick;
        city.ground_truth[pick] = Archetype::kGlobal;
    }

    // ---- flows ----
    auto manhattan = [&](std::size_t a, std::size_t b) {
        return std::fabs(centers[a].x - centers[b].x) + std::fabs(centers[a].y - centers[b].y);
    };
    const double lambda_downtown = 0.4 * pitch;
    const double lambda_residential = 2.0 * pitch;

    std::map<std::pair<std::size_t, std::size_t>, double> entries;
    std::vector<std::size_t> origin_buf;
    std::vector<double> weight_buf;
    for (std::size_t dest = 0; dest < config.n_zones; ++dest) {
        Archetype kind = city.ground_truth[dest];
        double target_inflow;
        double lambda = 0.0;
        double cutoff = std::numeric_limits<double>::infinity();
        if (kind == Archetype::kGlobal) {
            std::size_t g = static_cast<std::size_t>(
                std::find(global_zone.begin(), global_zone.end(), dest) - global_zone.begin());
            target_inflow = global_inflow[g];
        } else if (kind == Archetype::kDowntown) {
            target_inflow = rng.uniform(50.0, 100.0) * config.flow_scale;
            lambda = lambda_downtown;
            cutoff = std::max(2.0 * pitch, 4.0 * lambda) + pitch * 0.5;
        } else {
            target_inflow = rng.uniform(1.0, 10.0) * config.flow_scale;
            lambda = lambda_residential;
            cutoff = 4.0 * lambda + pitch * 0.5;
        }

        origin_buf.clear();
        weight_buf.clear();
        double wsum = 0.0;
        for (std::size_t o = 0; o < config.n_zones; ++o) {
            if (o == dest) continue;
            double dist = manhattan(o, dest);
            if (dist > cutoff) continue;
            double w = rng.uniform(0.5, 1.5);
            if (lambda > 0.0) w *= std::exp(-dist / lambda);
            origin_buf.push_back(o);
            weight_buf.push_back(w);
            wsum += w;
        }
        for (std::size_t i = 0; i < origin_buf.size(); ++i) {
            double trips = target_inflow * weight_buf[i] / wsum;
            if (trips > 0.0) entries[{origin_buf[i], dest}] = trips;
        }
    }
    for (const auto& [key, trips] : entries) {
        city.od.entries.push_back(ODEntry{key.first, key.second, trips});
    }
    city.od.window = "synthetic";

    // ---- road lattice ----
    std::size_t road_side = config.road_grid_side > 0 ? config.road_grid_side : side;
    double spacing = config.grid_extent_m / static_cast<double>(road_side);
    std::size_t node_width = std::to_string(road_side * road_side - 1).size();
    for (std::size_t i = 0; i < road_side * road_side; ++i) {
        std::size_t row = i / road_side, col = i % road_side;
        std::string id = detail::padded_id("n", i, node_width);
        city.roadnet.node_index.emplace(id, city.roadnet.node_ids.size());
        city.roadnet.node_ids.push_back(id);
        city.roadnet.node_coords.push_back(Point{(static_cast<double>(col) + 0.5) * spacing,
                                                 (static_cast<double>(row) + 0.5) * spacing});
    }
    for (std::size_t row = 0; row < road_side; ++row) {
        for (std::size_t col = 0; col < road_side; ++col) {
            std::size_t u = row * road_side + col;
            if (col + 1 < road_side) city.roadnet.edges.push_back(RoadEdgeSpec{u, u + 1, spacing, false});
            if (row + 1 < road_side) {
                city.roadnet.edges.push_back(RoadEdgeSpec{u, u + road_side, spacing, false});
            }
        }
    }

    // ---- POIs ----
    const auto& vocab = synth_poi_vocabulary();
    std::size_t poi_id = 0;
    std::size_t poi_width = config.n_pois > 0 ? std::to_string(config.n_pois - 1).size() : 1;
    for (std::size_t t = 0; t < vocab.size(); ++t) {
        std::size_t count = config.n_pois / vocab.size() + (t < config.n_pois % vocab.size() ? 1 : 0);
        std::vector<double> cumulative(config.n_zones, 0.0);
        double acc = 0.0;
        for (std::size_t z = 0; z < config.n_zones; ++z) {
            double w = 1.0;
            if (!config.uniform_pois) {
                for (const PoiPlantRule& rule : config.poi_plant) {
                    if (rule.poi_type == vocab[t] && rule.archetype == city.ground_truth[z]) {
                        w = rule.multiplier;
                    }
                }
            }
            acc += w;
            cumulative[z] = acc;
        }
        for (std::size_t j = 0; j < count; ++j) {
            std::size_t z = rng.weighted(cumulative);
            std::size_t row = z / side, col = z % side;
            POIRecord rec;
            rec.id = detail::padded_id("p", poi_id++, poi_width);
            rec.type = vocab[t];
            rec.location = Point{(static_cast<double>(col) + 0.05 + 0.9 * rng.uniform()) * pitch,
                                 (static_cast<double>(row) + 0.05 + 0.9 * rng.uniform()) * pitch};
            rec.assigned = true;
            rec.zone = z;
            ++city.pois.assigned_count;
            city.pois.records.push_back(std::move(rec));
        }
    }
    city.pois.vocabulary = vocab;
    return city;
}

// Writes the exact file set the ingest module consumes, plus the planted
// labels. Returns the list of created file names.
inline std::vector<std::string> write_synth_city(const SynthCity& city, const std::string& dir) {
    std::vector<std::string> files;
    auto path = [&](const std::string& name) { return dir + "/" + name; };

    write_zones_geojson(city.zones, path("zones.geojson"), [](const Zone& z) {
        nlohmann::ordered_json props;
        props["id"] = z.id;
        return props;
    });
    files.push_back("zones.geojson");

    write_od(city.od, city.zones, path("od.csv"));
    files.push_back("od.csv");

    {
        CsvWriter w(path("nodes.csv"));
        w.row({"node_id", "x", "y"});
        for (std::size_t i = 0; i < city.roadnet.node_ids.size(); ++i) {
            w.row({city.roadnet.node_ids[i], fmt_double(city.roadnet.node_coords[i].x),
                   fmt_double(city.roadnet.node_coords[i].y)});
        }
        w.close();
        files.push_back("nodes.csv");
    }
    {
        CsvWriter w(path("edges.csv"));
        w.row({"u", "v", "length_m", "oneway"});
        for (const RoadEdgeSpec& e : city.roadnet.edges) {
            w.row({city.roadnet.node_ids[e.u], city.roadnet.node_ids[e.v], fmt_double(e.length_m),
                   e.oneway ? "1" : "0"});
        }
        w.close();
        files.push_back("edges.csv");
    }
    {
        CsvWriter w(path("pois.csv"));
        w.row({"poi_id", "poi_type", "x", "y"});
        for (const POIRecord& rec : city.pois.records) {
            w.row({rec.id, rec.type, fmt_double(rec.location.x), fmt_double(rec.location.y)});
        }
        w.close();
        files.push_back("pois.csv");
    }
    {
        CsvWriter w(path("ground_truth.csv"));
        w.row({"zone_id", "archetype"});
        for (std::size_t i : city.zones.sorted_indices()) {
            w.row({city.zones[i].id, archetype_name(city.ground_truth[i])});
        }
        w.close();
        files.push_back("ground_truth.csv");
    }
    return files;
}

}  // namespace attractors
