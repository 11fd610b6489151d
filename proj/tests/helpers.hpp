#ifndef HNRAD_TESTS_HELPERS_HPP
#define HNRAD_TESTS_HELPERS_HPP

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "hnrad/volume.hpp"

namespace hnrad_tests {

inline hnrad::GridGeometry geometry(hnrad::Index3 dims, hnrad::Vec3 spacing = {1, 1, 1},
                                    hnrad::Vec3 origin = {0, 0, 0}) {
    hnrad::GridGeometry g;
    g.dims = dims;
    g.spacing = spacing;
    g.origin = origin;
    return g;
}

inline hnrad::VoxelGrid random_grid(hnrad::Index3 dims, uint64_t seed, double lo = 0.0, double hi = 10.0) {
    hnrad::VoxelGrid grid = hnrad::make_grid(geometry(dims));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : grid.values) v = float(dist(rng));
    return grid;
}

// Unique temp path; files are small and the OS cleans /tmp.
inline std::string temp_path(const std::string& name) {
    static int counter = 0;
    return (std::filesystem::temp_directory_path() /
            ("hnrad_test_" + std::to_string(++counter) + "_" + name))
        .string();
}

} // namespace hnrad_tests

#endif
