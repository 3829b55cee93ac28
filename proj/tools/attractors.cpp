// Command-line front end: full pipeline plus independently runnable stages.
//
// Exit codes: 0 success, 1 usage, 2 data validation, 3 internal error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "attractors/pipeline.hpp"
#include "attractors/synth.hpp"

namespace {

constexpr const char* kVersion = "attractors 0.1.0";

struct SynthArgs {
    attractors::SynthConfig config;
    std::string out_dir = "synth_out";
};

void add_common_cluster_options(CLI::App* cmd, attractors::PipelineConfig& config) {
    cmd->add_option("--k", config.k, "Fixed cluster count; 0 selects k from the variance curve");
    cmd->add_option("--k_max,--k-max", config.k_max, "Largest k evaluated on the variance curve");
    cmd->add_option("--elbow_tau,--elbow-tau", config.elbow_tau, "Elbow threshold fraction");
    cmd->add_option("--variance_scaling,--variance-scaling", config.variance_scaling,
                    "Feature scaling for the variance curve: zscore|raw");
    cmd->add_flag("--standardize_features,--standardize-features", config.standardize_features,
                  "Z-score features before correlation distance");
}

int run_full(const attractors::PipelineConfig& config) {
    attractors::PipelineResult result = attractors::run_pipeline(config);
    std::cout << "zones: " << result.zones << " (classified " << result.classified << ", unclassified "
              << result.unclassified << ")\n";
    std::cout << "k: " << result.k << (result.k_fallback ? " (fallback: no elbow found)" : "") << "\n";
    if (result.label_disagreement) {
        std::cerr << "warning: archetype labeling conditions disagreed; clusters labeled Other\n";
    }
    if (result.unreachable_trips > 0.0) {
        std::cerr << "warning: " << attractors::fmt_double(result.unreachable_trips)
                  << " trips excluded from distance statistics (unreachable origins)\n";
    }
    std::cout << "wrote " << result.artifacts.size() + 1 << " artifacts to " << config.output_dir << "\n";
    return 0;
}

int run_features_stage(const attractors::PipelineConfig& config) {
    namespace at = attractors;
    std::filesystem::create_directories(config.output_dir);

    at::ZoneSet zones = at::load_zones(config.zones);
    at::ODMatrix od = at::load_od(config.od, zones, config.window);
    at::RoadGraph graph(at::load_roadnet(config.nodes, config.edges));
    std::vector<at::ZoneAnchor> anchors = at::snap_zones(zones, graph, config.max_snap_m);
    auto od_columns = od.columns_by_dest(zones.size());

    std::vector<std::size_t> dests;
    for (std::size_t zi = 0; zi < zones.size(); ++zi) {
        if (at::inflow(od_columns[zi], zi) >= config.min_inflow) dests.push_back(zi);
    }
    std::vector<at::DistanceColumn> columns;
    bool cache_hit = false;
    std::uint64_t cache_hash = 0;
    if (!config.distance_cache.empty()) {
        cache_hash = at::anchors_hash(anchors, zones, graph);
        cache_hit = at::load_distance_cache(config.distance_cache, cache_hash, zones, dests, od_columns, columns);
    }
    if (!cache_hit) {
        columns = at::compute_distance_columns(dests, anchors, graph, od_columns, config.threads);
        if (!config.distance_cache.empty()) {
            at::write_distance_cache(config.distance_cache, cache_hash, zones, columns);
        }
    }

    at::FeatureBuildResult features = at::build_feature_vectors(
        od, zones, columns, config.min_inflow, at::sd_formula_from_string(config.sd_formula));
    at::write_features_csv(features.features, config.output_dir + "/features.csv");
    at::write_unclassified_csv(features.unclassified, config.output_dir + "/unclassified.csv");
    std::cout << "features: " << features.features.size() << " zones classified, "
              << features.unclassified.size() << " unclassified\n";
    return 0;
}

int run_cluster_stage(const std::string& features_path, const std::string& zones_path,
                      const attractors::PipelineConfig& config) {
    namespace at = attractors;
    std::filesystem::create_directories(config.output_dir);

    std::vector<at::AttractionFeatures> features = at::read_features_csv(features_path);
    at::ClusterOutput clusters = at::cluster_features(features, config);

    std::vector<std::string> zone_ids;
    zone_ids.reserve(features.size());
    for (const auto& f : features) zone_ids.push_back(f.zone_id);

    at::write_clusters_csv(zone_ids, clusters.assignment, clusters.labels.labels,
                           config.output_dir + "/clusters.csv");
    at::write_variance_curve_csv(clusters.curve, config.output_dir + "/variance_curve.csv");
    at::write_merges_csv(clusters.tree, config.output_dir + "/merges.csv");

    if (!zones_path.empty()) {
        at::ZoneSet zones = at::load_zones(zones_path);
        std::vector<std::optional<std::size_t>> zone_cluster(zones.size());
        for (std::size_t row = 0; row < zone_ids.size(); ++row) {
            zone_cluster[zones.index_of(zone_ids[row])] = clusters.assignment[row];
        }
        at::write_zones_geojson(zones, config.output_dir + "/clusters.geojson", [&](const at::Zone& z) {
            nlohmann::ordered_json props;
            props["id"] = z.id;
            std::size_t zi = zones.index_of(z.id);
            if (zone_cluster[zi].has_value()) {
                props["cluster"] = *zone_cluster[zi];
                props["archetype"] = at::archetype_name(clusters.labels.labels[*zone_cluster[zi]]);
            } else {
                props["cluster"] = nullptr;
                props["archetype"] = "Unclassified";
            }
            return props;
        });
    }

    std::cout << "k: " << clusters.k << (clusters.k_fallback ? " (fallback: no elbow found)" : "") << "\n";
    if (clusters.labels.disagreement) {
        std::cerr << "warning: archetype labeling conditions disagreed; clusters labeled Other\n";
    }
    return 0;
}

int run_poi_stage(const std::string& pois_path, const std::string& zones_path,
                  const std::string& clusters_path, const attractors::PipelineConfig& config) {
    namespace at = attractors;
    std::filesystem::create_directories(config.output_dir);

    at::ZoneSet zones = at::load_zones(zones_path);
    at::POITable pois = at::load_pois(pois_path, zones);
    auto cluster_map = at::read_clusters_csv(clusters_path);

    std::vector<std::optional<at::Archetype>> zone_class(zones.size());
    for (const auto& [zone_id, entry] : cluster_map) {
        if (!zones.contains(zone_id)) {
            throw at::ValidationError(clusters_path + ": zone '" + zone_id + "' not present in " + zones_path);
        }
        zone_class[zones.index_of(zone_id)] = entry.second;
    }

    at::LogFactorialTable lf(pois.assigned_count);
    std::vector<at::SignificanceRanking> rankings;
    for (at::Archetype cls : {at::Archetype::kGlobal, at::Archetype::kDowntown, at::Archetype::kResidential,
                              at::Archetype::kOther}) {
        bool present = false;
        for (const auto& oc : zone_class) {
            if (oc.has_value() && *oc == cls) present = true;
        }
        if (!present) continue;
        rankings.push_back(at::rank_types(pois, zone_class, cls, lf, config.threads));
    }
    at::write_poi_significance_csv(rankings, config.output_dir + "/poi_significance.csv");
    std::cout << "poi significance: " << rankings.size() << " classes, " << pois.assigned_count
              << " assigned POIs\n";
    return 0;
}

int run_synth(const SynthArgs& args) {
    namespace at = attractors;
    std::filesystem::create_directories(args.out_dir);
    at::SynthCity city = at::generate(args.config);
    std::vector<std::string> files = at::write_synth_city(city, args.out_dir);
    std::cout << "synthetic city: " << city.zones.size() << " zones, " << city.od.entries.size()
              << " od entries, " << city.pois.records.size() << " pois -> " << args.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Urban zone attraction profiling from origin-destination matrices"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    attractors::PipelineConfig config;
    SynthArgs synth_args;
    std::string features_path, zones_path, clusters_path, pois_path;

    CLI::App* run = app.add_subcommand("run", "Run the full pipeline");
    run->set_config("--config", "", "Key-value config file; every key matches a flag name");
    run->add_option("--zones", config.zones, "Zone polygons (GeoJSON)")->required();
    run->add_option("--od", config.od, "OD matrix CSV: origin_id,dest_id,trips")->required();
    run->add_option("--nodes", config.nodes, "Road nodes CSV: node_id,x,y")->required();
    run->add_option("--edges", config.edges, "Road edges CSV: u,v,length_m,oneway")->required();
    run->add_option("--pois", config.pois, "POI CSV: poi_id,poi_type,x,y");
    run->add_option("--output_dir,--output-dir", config.output_dir, "Artifact directory");
    run->add_option("--window", config.window, "Time-window label recorded in the manifest");
    run->add_option("--max_snap_m,--max-snap-m", config.max_snap_m, "Max centroid-to-road snap distance (m)");
    run->add_option("--min_inflow,--min-inflow", config.min_inflow, "Minimum inflow for classification");
    run->add_option("--sd_formula,--sd-formula", config.sd_formula, "standard|as_printed");
    run->add_flag("--skip_poi,--skip-poi", config.skip_poi, "Skip the POI significance stage");
    run->add_option("--threads", config.threads, "Worker threads (0 = hardware)");
    run->add_option("--distance_cache,--distance-cache", config.distance_cache,
                    "Optional distance-column cache CSV");
    add_common_cluster_options(run, config);

    CLI::App* features_cmd = app.add_subcommand("features", "Compute attraction features only");
    features_cmd->add_option("--zones", config.zones, "Zone polygons (GeoJSON)")->required();
    features_cmd->add_option("--od", config.od, "OD matrix CSV")->required();
    features_cmd->add_option("--nodes", config.nodes, "Road nodes CSV")->required();
    features_cmd->add_option("--edges", config.edges, "Road edges CSV")->required();
    features_cmd->add_option("--output_dir,--output-dir", config.output_dir, "Artifact directory");
    features_cmd->add_option("--window", config.window, "Time-window label");
    features_cmd->add_option("--max_snap_m,--max-snap-m", config.max_snap_m, "Max snap distance (m)");
    features_cmd->add_option("--min_inflow,--min-inflow", config.min_inflow, "Minimum inflow");
    features_cmd->add_option("--sd_formula,--sd-formula", config.sd_formula, "standard|as_printed");
    features_cmd->add_option("--threads", config.threads, "Worker threads (0 = hardware)");
    features_cmd->add_option("--distance_cache,--distance-cache", config.distance_cache,
                             "Optional distance-column cache CSV");

    CLI::App* cluster_cmd = app.add_subcommand("cluster", "Cluster a features.csv produced earlier");
    cluster_cmd->add_option("--features", features_path, "features.csv path")->required();
    cluster_cmd->add_option("--zones", zones_path, "Optional zones GeoJSON for the cluster map");
    cluster_cmd->add_option("--output_dir,--output-dir", config.output_dir, "Artifact directory");
    cluster_cmd->add_option("--threads", config.threads, "Worker threads (0 = hardware)");
    add_common_cluster_options(cluster_cmd, config);

    CLI::App* poi_cmd = app.add_subcommand("poi-sig", "Rank POI types per attractor class");
    poi_cmd->add_option("--pois", pois_path, "POI CSV")->required();
    poi_cmd->add_option("--zones", zones_path, "Zone polygons (GeoJSON)")->required();
    poi_cmd->add_option("--clusters", clusters_path, "clusters.csv path")->required();
    poi_cmd->add_option("--output_dir,--output-dir", config.output_dir, "Artifact directory");
    poi_cmd->add_option("--threads", config.threads, "Worker threads (0 = hardware)");

    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic city with planted structure");
    synth_cmd->add_option("--seed", synth_args.config.seed, "Generator seed");
    synth_cmd->add_option("--out", synth_args.out_dir, "Output directory")->required();
    synth_cmd->add_option("--n_zones,--n-zones", synth_args.config.n_zones, "Zone count");
    synth_cmd->add_option("--grid_extent_m,--grid-extent-m", synth_args.config.grid_extent_m, "City size (m)");
    synth_cmd->add_option("--n_global,--n-global", synth_args.config.n_global, "Planted global zones");
    synth_cmd->add_option("--downtown_radius_m,--downtown-radius-m", synth_args.config.downtown_radius_m,
                          "Downtown radius (m)");
    synth_cmd->add_option("--flow_scale,--flow-scale", synth_args.config.flow_scale, "Flow magnitude scale");
    synth_cmd->add_option("--road_grid_side,--road-grid-side", synth_args.config.road_grid_side,
                          "Road lattice side (0 = one node per zone)");
    synth_cmd->add_option("--n_pois,--n-pois", synth_args.config.n_pois, "POI count");
    synth_cmd->add_flag("--uniform_pois,--uniform-pois", synth_args.config.uniform_pois,
                        "Place POIs uniformly (ignore plant rules)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return run_full(config);
        if (features_cmd->parsed()) return run_features_stage(config);
        if (cluster_cmd->parsed()) return run_cluster_stage(features_path, zones_path, config);
        if (poi_cmd->parsed()) return run_poi_stage(pois_path, zones_path, clusters_path, config);
        if (synth_cmd->parsed()) return run_synth(synth_args);
    } catch (const attractors::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
