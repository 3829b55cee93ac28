#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "attractors/csv.hpp"
#include "attractors/geometry.hpp"

namespace attractors {

struct Zone {
    std::string id;
    std::vector<Polygon> geometry;
    Point centroid;
    double area_m2 = 0.0;
    BBox bbox;
};

class ZoneSet {
public:
    void add(Zone z) {
        auto [it, inserted] = index_.emplace(z.id, zones_.size());
        if (!inserted) throw ValidationError("duplicate zone id '" + z.id + "'");
        zones_.push_back(std::move(z));
    }

    std::size_t size() const { return zones_.size(); }
    const Zone& operator[](std::size_t i) const { return zones_[i]; }
    const std::vector<Zone>& all() const { return zones_; }

    bool contains(const std::string& id) const { return index_.count(id) > 0; }
    std::size_t index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw ValidationError("unknown zone id '" + id + "'");
        return it->second;
    }

    // Zone indices ordered by ascending id; fixes the row order of every
    // emitted artifact.
    std::vector<std::size_t> sorted_indices() const {
        std::vector<std::size_t> idx(zones_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return zones_[a].id < zones_[b].id;
        });
        return idx;
    }

private:
    std::vector<Zone> zones_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct ODEntry {
    std::size_t origin = 0;
    std::size_t dest = 0;
    double trips = 0.0;
};

struct ODMatrix {
    std::vector<ODEntry> entries;  // unique (origin,dest), sorted by index pair
    std::string window = "default";
    std::size_t duplicate_warnings = 0;
    std::size_t zero_rows_dropped = 0;

    double total_flow() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.trips;
        return s;
    }

    // entries regrouped as one (origin, trips) list per destination index.
    std::vector<std::vector<std::pair<std::size_t, double>>> columns_by_dest(std::size_t n_zones) const {
        std::vector<std::vector<std::pair<std::size_t, double>>> cols(n_zones);
        for (const auto& e : entries) cols[e.dest].emplace_back(e.origin, e.trips);
        return cols;
    }
};

struct POIRecord {
    std::string id;
    std::string type;
    Point location;
    bool assigned = false;
    std::size_t zone = 0;  // valid only when assigned
};

struct POITable {
    std::vector<POIRecord> records;
    std::vector<std::string> vocabulary;  // distinct types, ascending
    std::size_t assigned_count = 0;
    std::size_t unassigned_count = 0;
    std::size_t overlap_warnings = 0;
};

struct RoadEdgeSpec {
    std::size_t u = 0;
    std::size_t v = 0;
    double length_m = 0.0;
    bool oneway = false;
};

struct RoadGraphSpec {
    std::vector<std::string> node_ids;
    std::vector<Point> node_coords;
    std::vector<RoadEdgeSpec> edges;
    std::unordered_map<std::string, std::size_t> node_index;

    std::size_t index_of(const std::string& id) const {
        auto it = node_index.find(id);
        if (it == node_index.end()) throw ValidationError("unknown road node id '" + id + "'");
        return it->second;
    }
};

namespace detail {

inline Ring parse_ring(const nlohmann::json& jring, std::size_t feature_idx) {
    Ring ring;
    for (const auto& jpt : jring) {
        if (!jpt.is_array() || jpt.size() < 2) {
            throw ValidationError("feature " + std::to_string(feature_idx) + ": malformed coordinate");
        }
        ring.push_back(Point{jpt[0].get<double>(), jpt[1].get<double>()});
    }
    // GeoJSON rings repeat the first vertex at the end; store them open.
    if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
    if (ring.size() < 3) {
        throw ValidationError("feature " + std::to_string(feature_idx) + ": ring with fewer than 3 vertices");
    }
    return ring;
}

inline Polygon parse_polygon(const nlohmann::json& jpoly, std::size_t feature_idx) {
    Polygon poly;
    for (const auto& jring : jpoly) poly.push_back(parse_ring(jring, feature_idx));
    if (poly.empty()) {
        throw ValidationError("feature " + std::to_string(feature_idx) + ": empty polygon");
    }
    return poly;
}

}  // namespace detail

// GeoJSON FeatureCollection of Polygon/MultiPolygon features carrying a
// string `id` property. An optional numeric-pair `centroid` property
// overrides the computed area centroid.
inline ZoneSet load_zones(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }

    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
        throw ValidationError(path + ": not a GeoJSON FeatureCollection");
    }

    ZoneSet zones;
    std::size_t idx = 0;
    for (const auto& feature : doc["features"]) {
        Zone z;
        const auto props = feature.find("properties");
        if (props == feature.end() || !props->is_object() || !props->contains("id")) {
            throw ValidationError(path + ": feature " + std::to_string(idx) + ": missing 'id' property");
        }
        const auto& jid = (*props)["id"];
        if (!jid.is_string()) {
            throw ValidationError(path + ": feature " + std::to_string(idx) + ": 'id' property must be a string");
        }
        z.id = jid.get<std::string>();

        const auto geom = feature.find("geometry");
        if (geom == feature.end() || !geom->is_object()) {
            throw ValidationError(path + ": feature " + std::to_string(idx) + ": missing geometry");
        }
        const std::string gtype = geom->value("type", "");
        const auto& coords = (*geom)["coordinates"];
        if (gtype == "Polygon") {
            z.geometry.push_back(detail::parse_polygon(coords, idx));
        } else if (gtype == "MultiPolygon") {
            for (const auto& jpoly : coords) z.geometry.push_back(detail::parse_polygon(jpoly, idx));
            if (z.geometry.empty()) {
                throw ValidationError(path + ": feature " + std::to_string(idx) + ": empty MultiPolygon");
            }
        } else {
            throw ValidationError(path + ": feature " + std::to_string(idx) +
                                  ": geometry type '" + gtype + "' is not Polygon/MultiPolygon");
        }

        for (const Polygon& poly : z.geometry)
            for (const Ring& r : poly)
                for (const Point& p : r) z.bbox.expand(p);
        z.area_m2 = multipolygon_area(z.geometry);

        if (props->contains("centroid")) {
            const auto& jc = (*props)["centroid"];
            if (!jc.is_array() || jc.size() != 2) {
                throw ValidationError(path + ": feature " + std::to_string(idx) + ": 'centroid' must be [x,y]");
            }
            z.centroid = Point{jc[0].get<double>(), jc[1].get<double>()};
        } else {
            z.centroid = multipolygon_centroid(z.geometry);
        }
        if (!z.bbox.contains(z.centroid)) {
            throw ValidationError(path + ": feature " + std::to_string(idx) +
                                  ": centroid lies outside the polygon bounding box");
        }

        try {
            zones.add(std::move(z));
        } catch (const ValidationError& e) {
            throw ValidationError(path + ": feature " + std::to_string(idx) + ": " + e.what());
        }
        ++idx;
    }
    if (zones.size() == 0) throw ValidationError(path + ": no features");
    return zones;
}

// CSV `origin_id,dest_id,trips`. Zero-trip rows are dropped, duplicate
// (origin,dest) pairs are summed and counted as warnings.
inline ODMatrix load_od(const std::string& path, const ZoneSet& zones, const std::string& window = "default") {
    CsvReader reader(path, {"origin_id", "dest_id", "trips"});
    ODMatrix od;
    od.window = window;

    std::map<std::pair<std::size_t, std::size_t>, double> acc;
    std::set<std::string> unknown;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const std::string& o = fields[0];
        const std::string& d = fields[1];
        double trips = parse_double(fields[2], path + " line " + std::to_string(reader.line_number()));
        bool known = true;
        if (!zones.contains(o)) {
            unknown.insert(o);
            known = false;
        }
        if (!zones.contains(d)) {
            unknown.insert(d);
            known = false;
        }
        if (!known) continue;
        if (trips < 0.0) {
            throw ValidationError(path + " line " + std::to_string(reader.line_number()) +
                                  ": negative trips value " + fields[2]);
        }
        if (trips == 0.0) {
            ++od.zero_rows_dropped;
            continue;
        }
        auto key = std::make_pair(zones.index_of(o), zones.index_of(d));
        auto [it, inserted] = acc.emplace(key, trips);
        if (!inserted) {
            it->second += trips;
            ++od.duplicate_warnings;
        }
    }
    if (!unknown.empty()) {
        std::ostringstream msg;
        msg << path << ": " << unknown.size() << " unknown zone id(s):";
        std::size_t shown = 0;
        for (const auto& id : unknown) {
            if (shown++ == 20) {
                msg << " ...";
                break;
            }
            msg << " '" << id << "'";
        }
        throw ValidationError(msg.str());
    }

    od.entries.reserve(acc.size());
    for (const auto& [key, trips] : acc) od.entries.push_back(ODEntry{key.first, key.second, trips});
    return od;
}

// Rows ordered by ascending (origin_id, dest_id); numbers round-trip exactly.
inline void write_od(const ODMatrix& od, const ZoneSet& zones, const std::string& path) {
    std::vector<const ODEntry*> rows;
    rows.reserve(od.entries.size());
    for (const auto& e : od.entries) rows.push_back(&e);
    std::sort(rows.begin(), rows.end(), [&](const ODEntry* a, const ODEntry* b) {
        const std::string& ao = zones[a->origin].id;
        const std::string& bo = zones[b->origin].id;
        if (ao != bo) return ao < bo;
        return zones[a->dest].id < zones[b->dest].id;
    });
    CsvWriter w(path);
    w.row({"origin_id", "dest_id", "trips"});
    for (const ODEntry* e : rows) {
        w.row({zones[e->origin].id, zones[e->dest].id, fmt_double(e->trips)});
    }
    w.close();
}

// CSV `poi_id,poi_type,x,y`; each record resolved to its containing zone by
// even-odd point-in-polygon, first matching zone in file order wins.
inline POITable load_pois(const std::string& path, const ZoneSet& zones) {
    CsvReader reader(path, {"poi_id", "poi_type", "x", "y"});
    POITable table;
    std::set<std::string> vocab;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const std::string row_ctx = path + " line " + std::to_string(reader.line_number());
        POIRecord rec;
        rec.id = fields[0];
        rec.type = fields[1];
        if (rec.type.empty()) throw ValidationError(row_ctx + ": empty poi_type");
        rec.location = Point{parse_double(fields[2], row_ctx), parse_double(fields[3], row_ctx)};

        bool matched = false;
        for (std::size_t zi = 0; zi < zones.size(); ++zi) {
            const Zone& z = zones[zi];
            if (!z.bbox.contains(rec.location)) continue;
            if (!point_in_multipolygon(rec.location, z.geometry)) continue;
            if (!matched) {
                matched = true;
                rec.assigned = true;
                rec.zone = zi;
            } else {
                ++table.overlap_warnings;
                break;  // keep first match
            }
        }
        if (rec.assigned) ++table.assigned_count;
        else ++table.unassigned_count;
        vocab.insert(rec.type);
        table.records.push_back(std::move(rec));
    }
    table.vocabulary.assign(vocab.begin(), vocab.end());
    return table;
}

// Two CSVs: nodes `node_id,x,y`, edges `u,v,length_m,oneway`.
inline RoadGraphSpec load_roadnet(const std::string& nodes_path, const std::string& edges_path) {
    RoadGraphSpec spec;
    {
        CsvReader reader(nodes_path, {"node_id", "x", "y"});
        std::vector<std::string> fields;
        while (reader.next(fields)) {
            const std::string row_ctx = nodes_path + " line " + std::to_string(reader.line_number());
            auto [it, inserted] = spec.node_index.emplace(fields[0], spec.node_ids.size());
            if (!inserted) throw ValidationError(row_ctx + ": duplicate node id '" + fields[0] + "'");
            spec.node_ids.push_back(fields[0]);
            spec.node_coords.push_back(Point{parse_double(fields[1], row_ctx), parse_double(fields[2], row_ctx)});
        }
        if (spec.node_ids.empty()) throw ValidationError(nodes_path + ": no nodes");
    }
    {
        CsvReader reader(edges_path, {"u", "v", "length_m", "oneway"});
        std::vector<std::string> fields;
        while (reader.next(fields)) {
            const std::string row_ctx = edges_path + " line " + std::to_string(reader.line_number());
            RoadEdgeSpec e;
            auto u_it = spec.node_index.find(fields[0]);
            auto v_it = spec.node_index.find(fields[1]);
            if (u_it == spec.node_index.end()) throw ValidationError(row_ctx + ": unknown node '" + fields[0] + "'");
            if (v_it == spec.node_index.end()) throw ValidationError(row_ctx + ": unknown node '" + fields[1] + "'");
            e.u = u_it->second;
            e.v = v_it->second;
            if (e.u == e.v) throw ValidationError(row_ctx + ": self-loop edge on node '" + fields[0] + "'");
            e.length_m = parse_double(fields[2], row_ctx);
            if (!(e.length_m > 0.0)) throw ValidationError(row_ctx + ": non-positive edge length " + fields[2]);
            long long ow = parse_int(fields[3], row_ctx);
            if (ow != 0 && ow != 1) throw ValidationError(row_ctx + ": oneway must be 0 or 1");
            e.oneway = (ow == 1);
            spec.edges.push_back(e);
        }
    }
    return spec;
}

// GeoJSON emitter shared by the synthetic generator and the cluster-map
// artifact; `props` supplies the property object per zone.
template <typename PropsFn>
inline void write_zones_geojson(const ZoneSet& zones, const std::string& path, PropsFn&& props) {
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = nlohmann::ordered_json::array();
    for (std::size_t i : zones.sorted_indices()) {
        const Zone& z = zones[i];
        nlohmann::ordered_json feature;
        feature["type"] = "Feature";
        feature["properties"] = props(z);
        nlohmann::ordered_json geom;
        auto ring_json = [](const Ring& r) {
            nlohmann::ordered_json jr = nlohmann::ordered_json::array();
            for (const Point& p : r) jr.push_back({p.x, p.y});
            jr.push_back({r.front().x, r.front().y});
            return jr;
        };
        if (z.geometry.size() == 1) {
            geom["type"] = "Polygon";
            nlohmann::ordered_json rings = nlohmann::ordered_json::array();
            for (const Ring& r : z.geometry[0]) rings.push_back(ring_json(r));
            geom["coordinates"] = rings;
        } else {
            geom["type"] = "MultiPolygon";
            nlohmann::ordered_json polys = nlohmann::ordered_json::array();
            for (const Polygon& poly : z.geometry) {
                nlohmann::ordered_json rings = nlohmann::ordered_json::array();
                for (const Ring& r : poly) rings.push_back(ring_json(r));
                polys.push_back(rings);
            }
            geom["coordinates"] = polys;
        }
        feature["geometry"] = geom;
        doc["features"].push_back(feature);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError(path + ": cannot open for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw ValidationError(path + ": write failed");
}

}  // namespace attractors
