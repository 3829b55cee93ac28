#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testutil {

// Fresh directory under the system temp root; unique per call within the
// process so tests can run in any order.
inline std::string make_temp_dir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("attractors_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Unit-square grid zones as a GeoJSON string: `count` squares of `size`
// meters side by side along the x axis, ids A, B, C, ...
inline std::string grid_zones_geojson(int count, double size) {
    std::ostringstream out;
    out << "{\"type\":\"FeatureCollection\",\"features\":[";
    for (int i = 0; i < count; ++i) {
        double x0 = i * size;
        if (i) out << ",";
        out << "{\"type\":\"Feature\",\"properties\":{\"id\":\"" << static_cast<char>('A' + i)
            << "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[" << x0 << ",0],[" << x0 + size
            << ",0],[" << x0 + size << "," << size << "],[" << x0 << "," << size << "],[" << x0 << ",0]]]}}";
    }
    out << "]}";
    return out.str();
}

}  // namespace testutil
