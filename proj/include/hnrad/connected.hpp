#ifndef HNRAD_CONNECTED_HPP
#define HNRAD_CONNECTED_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "hnrad/geometry.hpp"

namespace hnrad {

enum class Connectivity { faces6 = 6, full26 = 26 };

namespace detail {

inline const std::vector<Index3>& neighbor_offsets(Connectivity c) {
    static const std::vector<Index3> six = {
        {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    static const std::vector<Index3> twentysix = [] {
        std::vector<Index3> v;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if (dx || dy || dz) v.push_back({dx, dy, dz});
        return v;
    }();
    return c == Connectivity::faces6 ? six : twentysix;
}

} // namespace detail

/// Connected components of the voxels where `inside(idx)` is true.
/// Components are emitted in storage order of their first voxel, each
/// listed in BFS discovery order.
inline std::vector<std::vector<int64_t>> connected_components(
    const Index3& dims, const std::function<bool(int64_t)>& inside, Connectivity conn) {
    const int64_t n = int64_t(dims[0]) * dims[1] * dims[2];
    const auto& offsets = detail::neighbor_offsets(conn);
    std::vector<uint8_t> visited(size_t(n), 0);
    std::vector<std::vector<int64_t>> components;
    std::vector<int64_t> stack;

    auto index = [&](int i, int j, int k) {
        return int64_t(i) + int64_t(dims[0]) * (int64_t(j) + int64_t(dims[1]) * int64_t(k));
    };

    for (int64_t seed = 0; seed < n; ++seed) {
        if (visited[size_t(seed)] || !inside(seed)) continue;
        components.emplace_back();
        auto& comp = components.back();
        stack.clear();
        stack.push_back(seed);
        visited[size_t(seed)] = 1;
        while (!stack.empty()) {
            const int64_t cur = stack.back();
            stack.pop_back();
            comp.push_back(cur);
            const int ci = int(cur % dims[0]);
            const int cj = int((cur / dims[0]) % dims[1]);
            const int ck = int(cur / (int64_t(dims[0]) * dims[1]));
            for (const auto& o : offsets) {
                const int ni = ci + o[0], nj = cj + o[1], nk = ck + o[2];
                if (ni < 0 || nj < 0 || nk < 0 || ni >= dims[0] || nj >= dims[1] || nk >= dims[2]) continue;
                const int64_t nid = index(ni, nj, nk);
                if (visited[size_t(nid)] || !inside(nid)) continue;
                visited[size_t(nid)] = 1;
                stack.push_back(nid);
            }
        }
    }
    return components;
}

/// Chebyshev distance (in voxels) from every voxel to the nearest voxel where
/// `source(idx)` is true, via multi-source BFS over the 26-neighbourhood.
/// Voxels beyond the grid border act as sources when `border_is_source`.
inline std::vector<int> chebyshev_distance_map(const Index3& dims,
                                               const std::function<bool(int64_t)>& source,
                                               bool border_is_source) {
    const int64_t n = int64_t(dims[0]) * dims[1] * dims[2];
    const auto& offsets = detail::neighbor_offsets(Connectivity::full26);
    std::vector<int> dist(size_t(n), -1);
    std::vector<int64_t> frontier, next;

    auto index = [&](int i, int j, int k) {
        return int64_t(i) + int64_t(dims[0]) * (int64_t(j) + int64_t(dims[1]) * int64_t(k));
    };

    for (int64_t idx = 0; idx < n; ++idx) {
        if (source(idx)) {
            dist[size_t(idx)] = 0;
            frontier.push_back(idx);
        } else if (border_is_source) {
            const int i = int(idx % dims[0]);
            const int j = int((idx / dims[0]) % dims[1]);
            const int k = int(idx / (int64_t(dims[0]) * dims[1]));
            if (i == 0 || j == 0 || k == 0 || i == dims[0] - 1 || j == dims[1] - 1 || k == dims[2] - 1) {
                dist[size_t(idx)] = 1; // nearest out-of-grid voxel is one step away
                frontier.push_back(idx);
            }
        }
    }

    while (!frontier.empty()) {
        next.clear();
        for (const int64_t cur : frontier) {
            const int d = dist[size_t(cur)];
            const int ci = int(cur % dims[0]);
            const int cj = int((cur / dims[0]) % dims[1]);
            const int ck = int(cur / (int64_t(dims[0]) * dims[1]));
            for (const auto& o : offsets) {
                const int ni = ci + o[0], nj = cj + o[1], nk = ck + o[2];
                if (ni < 0 || nj < 0 || nk < 0 || ni >= dims[0] || nj >= dims[1] || nk >= dims[2]) continue;
                const int64_t nid = index(ni, nj, nk);
                if (dist[size_t(nid)] < 0 || dist[size_t(nid)] > d + 1) {
                    dist[size_t(nid)] = d + 1;
                    next.push_back(nid);
                }
            }
        }
        frontier.swap(next);
    }
    return dist;
}

} // namespace hnrad

#endif
