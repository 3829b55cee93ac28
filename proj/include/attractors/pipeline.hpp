#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attractors/clustering.hpp"
#include "attractors/features.hpp"
#include "attractors/ingest.hpp"
#include "attractors/poisig.hpp"
#include "attractors/roadnet.hpp"

namespace attractors {

struct PipelineConfig {
    std::string zones;
    std::string od;
    std::string nodes;
    std::string edges;
    std::string pois;
    std::string output_dir = "out";
    std::string window = "default";
    double max_snap_m = 5000.0;
    double min_inflow = 1.0;
    double elbow_tau = 0.05;
    std::size_t k = 0;  // 0: select via the variance curve
    std::size_t k_max = 10;
    std::string sd_formula = "standard";
    std::string variance_scaling = "zscore";
    bool standardize_features = false;
    bool skip_poi = false;
    unsigned threads = 0;  // 0: hardware concurrency
    std::string distance_cache;
};

struct ClusterOutput {
    MergeTree tree;
    std::vector<VariancePoint> curve;
    std::size_t k = 0;
    bool k_fallback = false;
    std::vector<std::size_t> assignment;  // per feature row
    LabelResult labels;
};

inline std::vector<FeatureVector> eq4_vectors(const std::vector<AttractionFeatures>& features) {
    std::vector<FeatureVector> vectors;
    vectors.reserve(features.size());
    for (const AttractionFeatures& f : features) {
        vectors.push_back(FeatureVector{f.inflow, f.sd, f.mu, f.sigma});
    }
    return vectors;
}

// Clustering stage over an already-built feature table. `k_override` of 0
// selects k from the variance curve.
inline ClusterOutput cluster_features(const std::vector<AttractionFeatures>& features,
                                      const PipelineConfig& config) {
    std::size_t n = features.size();
    if (n < 2) throw ValidationError("clustering requires at least 2 classified zones, got " + std::to_string(n));

    std::vector<FeatureVector> raw = eq4_vectors(features);
    std::vector<std::string> ids;
    ids.reserve(n);
    for (const AttractionFeatures& f : features) ids.push_back(f.zone_id);

    std::vector<FeatureVector> cluster_input = config.standardize_features ? zscore_features(raw) : raw;

    ClusterOutput out;
    out.tree = hac_complete(cluster_input, ids, config.threads);

    std::size_t k_max = std::min<std::size_t>(config.k_max, n);
    out.curve = variance_curve(raw, out.tree, k_max, variance_scaling_from_string(config.variance_scaling));

    if (config.k > 0) {
        if (config.k > n) {
            throw ValidationError("k (" + std::to_string(config.k) + ") exceeds classified zone count (" +
                                  std::to_string(n) + ")");
        }
        out.k = config.k;
    } else {
        SelectKResult sel = select_k(out.curve, config.elbow_tau);
        out.k = sel.k;
        out.k_fallback = sel.fallback;
    }
    out.assignment = cut(out.tree, out.k);
    out.labels = label_archetypes(out.k, out.assignment, features);
    return out;
}

struct PipelineResult {
    std::size_t zones = 0;
    std::size_t classified = 0;
    std::size_t unclassified = 0;
    std::size_t k = 0;
    bool k_fallback = false;
    bool label_disagreement = false;
    double unreachable_trips = 0.0;
    std::vector<std::string> artifacts;  // file names written under output_dir
    std::string manifest_path;
};

namespace detail {

inline std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path + ": cannot re-open for hashing");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
        if (!in) break;
    }
    return h;
}

// Removes everything this run managed to write; called on stage failure so
// no partial artifact set survives.
class OutputTracker {
public:
    explicit OutputTracker(std::string dir) : dir_(std::move(dir)) {}

    std::string path(const std::string& name) {
        written_.push_back(name);
        return dir_ + "/" + name;
    }
    const std::vector<std::string>& written() const { return written_; }

    void discard_all() {
        for (const std::string& name : written_) {
            std::error_code ec;
            std::filesystem::remove(dir_ + "/" + name, ec);
        }
    }

private:
    std::string dir_;
    std::vector<std::string> written_;
};

}  // namespace detail

// Full pipeline: ingest -> road distances -> features -> clustering -> POI
// significance -> manifest. All artifacts land in config.output_dir.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
    std::filesystem::create_directories(config.output_dir);
    detail::OutputTracker out(config.output_dir);
    try {
        PipelineResult result;

        ZoneSet zones = load_zones(config.zones);
        result.zones = zones.size();
        ODMatrix od = load_od(config.od, zones, config.window);
        RoadGraphSpec roadnet_spec = load_roadnet(config.nodes, config.edges);
        RoadGraph graph(roadnet_spec);

        POITable pois;
        bool run_poi = !config.skip_poi;
        if (run_poi) {
            if (config.pois.empty()) throw ValidationError("pois path missing (use --skip_poi to omit the stage)");
            pois = load_pois(config.pois, zones);
        }

        std::vector<ZoneAnchor> anchors = snap_zones(zones, graph, config.max_snap_m);
        auto od_columns = od.columns_by_dest(zones.size());

        // Distance columns only for destinations that can reach the
        // min_inflow threshold.
        std::vector<std::size_t> dests;
        for (std::size_t zi = 0; zi < zones.size(); ++zi) {
            if (inflow(od_columns[zi], zi) >= config.min_inflow) dests.push_back(zi);
        }

        std::vector<DistanceColumn> columns;
        bool cache_hit = false;
        std::uint64_t cache_hash = 0;
        if (!config.distance_cache.empty()) {
            cache_hash = anchors_hash(anchors, zones, graph);
            cache_hit = load_distance_cache(config.distance_cache, cache_hash, zones, dests, od_columns, columns);
        }
        if (!cache_hit) {
            columns = compute_distance_columns(dests, anchors, graph, od_columns, config.threads);
            if (!config.distance_cache.empty()) {
                write_distance_cache(config.distance_cache, cache_hash, zones, columns);
            }
        }

        FeatureBuildResult features = build_feature_vectors(od, zones, columns, config.min_inflow,
                                                            sd_formula_from_string(config.sd_formula));
        result.classified = features.features.size();
        result.unclassified = features.unclassified.size();
        result.unreachable_trips = features.unreachable_trips_total;

        write_features_csv(features.features, out.path("features.csv"));
        write_unclassified_csv(features.unclassified, out.path("unclassified.csv"));

        ClusterOutput clusters = cluster_features(features.features, config);
        result.k = clusters.k;
        result.k_fallback = clusters.k_fallback;
        result.label_disagreement = clusters.labels.disagreement;

        std::vector<std::string> zone_ids;
        zone_ids.reserve(features.features.size());
        for (const AttractionFeatures& f : features.features) zone_ids.push_back(f.zone_id);

        write_clusters_csv(zone_ids, clusters.assignment, clusters.labels.labels, out.path("clusters.csv"));
        write_variance_curve_csv(clusters.curve, out.path("variance_curve.csv"));
        write_merges_csv(clusters.tree, out.path("merges.csv"));

        // zone id -> archetype for the GeoJSON map and the POI stage.
        std::vector<std::optional<Archetype>> zone_class(zones.size());
        std::vector<std::optional<std::size_t>> zone_cluster(zones.size());
        for (std::size_t row = 0; row < zone_ids.size(); ++row) {
            std::size_t zi = zones.index_of(zone_ids[row]);
            zone_cluster[zi] = clusters.assignment[row];
            zone_class[zi] = clusters.labels.labels[clusters.assignment[row]];
        }

        write_zones_geojson(zones, out.path("clusters.geojson"), [&](const Zone& z) {
            nlohmann::ordered_json props;
            props["id"] = z.id;
            std::size_t zi = zones.index_of(z.id);
            if (zone_cluster[zi].has_value()) {
                props["cluster"] = *zone_cluster[zi];
                props["archetype"] = archetype_name(*zone_class[zi]);
            } else {
                props["cluster"] = nullptr;
                props["archetype"] = "Unclassified";
            }
            return props;
        });

        if (run_poi) {
            LogFactorialTable lf(pois.assigned_count);
            std::vector<SignificanceRanking> rankings;
            for (Archetype cls :
                 {Archetype::kGlobal, Archetype::kDowntown, Archetype::kResidential, Archetype::kOther}) {
                bool present = false;
                for (const auto& oc : zone_class) {
                    if (oc.has_value() && *oc == cls) present = true;
                }
                if (!present) continue;
                rankings.push_back(rank_types(pois, zone_class, cls, lf, config.threads));
            }
            write_poi_significance_csv(rankings, out.path("poi_significance.csv"));
        }

        // ---- manifest (written last; hashes every artifact above) ----
        nlohmann::ordered_json manifest;
        nlohmann::ordered_json jconfig;
        jconfig["zones"] = config.zones;
        jconfig["od"] = config.od;
        jconfig["nodes"] = config.nodes;
        jconfig["edges"] = config.edges;
        jconfig["pois"] = config.pois;
        jconfig["output_dir"] = config.output_dir;
        jconfig["window"] = config.window;
        jconfig["max_snap_m"] = config.max_snap_m;
        jconfig["min_inflow"] = config.min_inflow;
        jconfig["elbow_tau"] = config.elbow_tau;
        jconfig["k"] = config.k;
        jconfig["k_max"] = config.k_max;
        jconfig["sd_formula"] = config.sd_formula;
        jconfig["variance_scaling"] = config.variance_scaling;
        jconfig["standardize_features"] = config.standardize_features;
        jconfig["skip_poi"] = config.skip_poi;
        jconfig["distance_cache"] = config.distance_cache;
        manifest["config"] = jconfig;

        nlohmann::ordered_json counts;
        counts["zones"] = zones.size();
        counts["od_entries"] = od.entries.size();
        counts["od_total_flow"] = od.total_flow();
        counts["od_duplicate_warnings"] = od.duplicate_warnings;
        counts["od_zero_rows_dropped"] = od.zero_rows_dropped;
        counts["classified_zones"] = result.classified;
        counts["unclassified_zones"] = result.unclassified;
        counts["unreachable_trips"] = result.unreachable_trips;
        counts["selected_k"] = result.k;
        counts["k_fallback"] = result.k_fallback;
        counts["label_disagreement"] = result.label_disagreement;
        if (run_poi) {
            counts["pois_total"] = pois.records.size();
            counts["pois_assigned"] = pois.assigned_count;
            counts["pois_unassigned"] = pois.unassigned_count;
            counts["poi_overlap_warnings"] = pois.overlap_warnings;
        }
        manifest["counts"] = counts;

        nlohmann::ordered_json jlabels;
        for (std::size_t c = 0; c < clusters.labels.labels.size(); ++c) {
            jlabels[std::to_string(c)] = archetype_name(clusters.labels.labels[c]);
        }
        manifest["labels"] = jlabels;

        nlohmann::ordered_json artifacts;
        for (const std::string& name : out.written()) {
            artifacts[name] = hex64(detail::file_hash(config.output_dir + "/" + name));
        }
        manifest["artifacts"] = artifacts;

        result.artifacts = out.written();
        result.manifest_path = config.output_dir + "/run_manifest.json";
        std::ofstream mf(result.manifest_path, std::ios::binary);
        if (!mf) throw ValidationError(result.manifest_path + ": cannot open for writing");
        mf << manifest.dump(2) << "\n";
        mf.close();
        if (!mf) throw ValidationError(result.manifest_path + ": write failed");

        return result;
    } catch (...) {
        out.discard_all();
        throw;
    }
}

}  // namespace attractors
