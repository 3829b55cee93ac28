#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "attractors/common.hpp"
#include "attractors/csv.hpp"
#include "attractors/ingest.hpp"
#include "attractors/parallel.hpp"

namespace attractors {

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Immutable routing graph. Forward and reverse adjacency are kept side by
// side: feature extraction needs distances from many origins to one
// destination, which is a single Dijkstra on the reverse graph.
class RoadGraph {
public:
    explicit RoadGraph(const RoadGraphSpec& spec)
        : node_ids_(spec.node_ids),
          node_coords_(spec.node_coords),
          adjacency_(spec.node_ids.size()),
          reverse_adjacency_(spec.node_ids.size()) {
        for (const RoadEdgeSpec& e : spec.edges) {
            add_arc(e.u, e.v, e.length_m);
            if (!e.oneway) add_arc(e.v, e.u, e.length_m);
        }
    }

    std::size_t node_count() const { return node_ids_.size(); }
    const std::vector<std::string>& node_ids() const { return node_ids_; }
    const std::vector<Point>& node_coords() const { return node_coords_; }
    const std::vector<std::vector<std::pair<std::size_t, double>>>& adjacency() const { return adjacency_; }
    const std::vector<std::vector<std::pair<std::size_t, double>>>& reverse_adjacency() const {
        return reverse_adjacency_;
    }

    // Shortest distances from `source` to all nodes over the given adjacency.
    static std::vector<double> dijkstra(const std::vector<std::vector<std::pair<std::size_t, double>>>& adj,
                                        std::size_t source) {
        std::vector<double> dist(adj.size(), kUnreachable);
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
        dist[source] = 0.0;
        heap.emplace(0.0, source);
        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[u]) continue;  // stale entry
            for (const auto& [v, w] : adj[u]) {
                double nd = d + w;
                if (nd < dist[v]) {
                    dist[v] = nd;
                    heap.emplace(nd, v);
                }
            }
        }
        return dist;
    }

    std::vector<double> distances_from(std::size_t source) const { return dijkstra(adjacency_, source); }
    std::vector<double> distances_to_node(std::size_t sink) const { return dijkstra(reverse_adjacency_, sink); }

    // Stable digest of the graph topology, coordinates and weights; used to
    // invalidate the distance cache.
    std::uint64_t content_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (std::size_t u = 0; u < node_ids_.size(); ++u) {
            h = fnv1a64(node_ids_[u], h);
            h = fnv1a64(fmt_double(node_coords_[u].x), h);
            h = fnv1a64(fmt_double(node_coords_[u].y), h);
            for (const auto& [v, w] : adjacency_[u]) {
                h = fnv1a64(node_ids_[v], h);
                h = fnv1a64(fmt_double(w), h);
            }
        }
        return h;
    }

private:
    void add_arc(std::size_t u, std::size_t v, double w) {
        adjacency_[u].emplace_back(v, w);
        reverse_adjacency_[v].emplace_back(u, w);
    }

    std::vector<std::string> node_ids_;
    std::vector<Point> node_coords_;
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
    std::vector<std::vector<std::pair<std::size_t, double>>> reverse_adjacency_;
};

struct ZoneAnchor {
    std::size_t zone = 0;        // zone index
    std::size_t node = 0;        // graph node index
    double snap_distance_m = 0.0;
};

// Maps every zone centroid to its Euclidean-nearest graph node. Distance
// ties break toward the lexicographically smallest node id.
inline std::vector<ZoneAnchor> snap_zones(const ZoneSet& zones, const RoadGraph& graph, double max_snap_m) {
    if (graph.node_count() == 0) throw ValidationError("road graph has no nodes");
    std::vector<ZoneAnchor> anchors(zones.size());
    const auto& coords = graph.node_coords();
    const auto& ids = graph.node_ids();
    for (std::size_t zi = 0; zi < zones.size(); ++zi) {
        const Point c = zones[zi].centroid;
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t ni = 0; ni < coords.size(); ++ni) {
            double dx = coords[ni].x - c.x;
            double dy = coords[ni].y - c.y;
            double d2 = dx * dx + dy * dy;
            if (d2 < best_d2 || (d2 == best_d2 && ids[ni] < ids[best])) {
                best_d2 = d2;
                best = ni;
            }
        }
        double d = std::sqrt(best_d2);
        if (d > max_snap_m) {
            throw ValidationError("zone '" + zones[zi].id + "': nearest road node is " + fmt_double(d) +
                                  " m away (max_snap_m " + fmt_double(max_snap_m) + ")");
        }
        anchors[zi] = ZoneAnchor{zi, best, d};
    }
    return anchors;
}

struct DistanceColumn {
    std::size_t dest = 0;  // zone index
    // origin zone index -> shortest road distance (m); absent = unreachable.
    std::unordered_map<std::size_t, double> dist_m;
    std::size_t unreachable_origins = 0;
    double unreachable_trips = 0.0;
};

// One reverse-Dijkstra from the destination's anchor. Only origins with OD
// trips into `dest` (plus the destination itself) are retained.
inline DistanceColumn distances_to(std::size_t dest, const std::vector<ZoneAnchor>& anchors,
                                   const RoadGraph& graph,
                                   const std::vector<std::pair<std::size_t, double>>& od_column) {
    DistanceColumn col;
    col.dest = dest;
    std::vector<double> node_dist = graph.distances_to_node(anchors[dest].node);
    for (const auto& [origin, trips] : od_column) {
        double d = node_dist[anchors[origin].node];
        if (d == kUnreachable) {
            ++col.unreachable_origins;
            col.unreachable_trips += trips;
        } else {
            col.dist_m.emplace(origin, d);
        }
    }
    double self_d = node_dist[anchors[dest].node];
    if (self_d != kUnreachable) col.dist_m.emplace(dest, self_d);
    return col;
}

// Distance columns for the requested destinations, computed in parallel.
// Column i of the result corresponds to dests[i].
inline std::vector<DistanceColumn> compute_distance_columns(
    const std::vector<std::size_t>& dests, const std::vector<ZoneAnchor>& anchors, const RoadGraph& graph,
    const std::vector<std::vector<std::pair<std::size_t, double>>>& od_columns, unsigned threads) {
    std::vector<DistanceColumn> cols(dests.size());
    parallel_for(dests.size(), threads, [&](std::size_t i) {
        cols[i] = distances_to(dests[i], anchors, graph, od_columns[dests[i]]);
    });
    return cols;
}

// ---- optional distance cache -------------------------------------------
//
// CSV `dest_id,origin_id,dist_m` preceded by a comment line carrying a hash
// of graph + anchors; a stale hash invalidates the cache.

inline std::uint64_t anchors_hash(const std::vector<ZoneAnchor>& anchors, const ZoneSet& zones,
                                  const RoadGraph& graph) {
    std::uint64_t h = graph.content_hash();
    for (const ZoneAnchor& a : anchors) {
        h = fnv1a64(zones[a.zone].id, h);
        h = fnv1a64(graph.node_ids()[a.node], h);
    }
    return h;
}

inline void write_distance_cache(const std::string& path, std::uint64_t hash, const ZoneSet& zones,
                                 const std::vector<DistanceColumn>& columns) {
    CsvWriter w(path);
    w.comment("hash=" + hex64(hash));
    w.row({"dest_id", "origin_id", "dist_m"});
    for (const DistanceColumn& col : columns) {
        std::vector<std::pair<std::string, double>> rows;
        rows.reserve(col.dist_m.size());
        for (const auto& [origin, d] : col.dist_m) rows.emplace_back(zones[origin].id, d);
        std::sort(rows.begin(), rows.end());
        for (const auto& [oid, d] : rows) w.row({zones[col.dest].id, oid, fmt_double(d)});
    }
    w.close();
}

// Returns true and fills `columns` (ordered as `dests`) when the cache is
// present, hash-valid, and covers every requested destination.
inline bool load_distance_cache(const std::string& path, std::uint64_t hash, const ZoneSet& zones,
                                const std::vector<std::size_t>& dests,
                                const std::vector<std::vector<std::pair<std::size_t, double>>>& od_columns,
                                std::vector<DistanceColumn>& columns) {
    std::ifstream probe(path);
    if (!probe) return false;
    probe.close();

    CsvReader reader(path, {"dest_id", "origin_id", "dist_m"});
    bool hash_ok = false;
    for (const std::string& c : reader.comments()) {
        if (c.find("hash=" + hex64(hash)) != std::string::npos) hash_ok = true;
    }
    if (!hash_ok) return false;

    std::unordered_map<std::size_t, std::unordered_map<std::size_t, double>> by_dest;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const std::string row_ctx = path + " line " + std::to_string(reader.line_number());
        if (!zones.contains(fields[0]) || !zones.contains(fields[1])) return false;
        by_dest[zones.index_of(fields[0])][zones.index_of(fields[1])] = parse_double(fields[2], row_ctx);
    }

    columns.clear();
    columns.reserve(dests.size());
    for (std::size_t dest : dests) {
        auto it = by_dest.find(dest);
        if (it == by_dest.end()) return false;
        DistanceColumn col;
        col.dest = dest;
        for (const auto& [origin, trips] : od_columns[dest]) {
            auto dit = it->second.find(origin);
            if (dit == it->second.end()) {
                ++col.unreachable_origins;
                col.unreachable_trips += trips;
            } else {
                col.dist_m.emplace(origin, dit->second);
            }
        }
        auto self_it = it->second.find(dest);
        if (self_it != it->second.end()) col.dist_m.emplace(dest, self_it->second);
        columns.push_back(std::move(col));
    }
    return true;
}

}  // namespace attractors
