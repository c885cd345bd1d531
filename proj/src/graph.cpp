#include "carpetlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace carpetlab {

Graph::Graph(VertexId vertex_count, std::vector<std::pair<VertexId, VertexId>> edges,
             std::vector<double> measure, int coord_dim, std::vector<std::int32_t> coords)
    : measure_(std::move(measure)), coord_dim_(coord_dim), coords_(std::move(coords)) {
    if (vertex_count < 0) throw std::invalid_argument("graph: negative vertex count");
    if (measure_.empty()) measure_.assign(static_cast<std::size_t>(vertex_count), 1.0);
    if (measure_.size() != static_cast<std::size_t>(vertex_count)) {
        throw std::invalid_argument("graph: measure length mismatch");
    }
    for (double m : measure_) {
        if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("graph: measure must be positive");
    }
    if (coord_dim_ > 0 && coords_.size() != static_cast<std::size_t>(vertex_count) * coord_dim_) {
        throw std::invalid_argument("graph: coordinate array length mismatch");
    }

    for (auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= vertex_count || v >= vertex_count || u == v) {
            throw std::invalid_argument("graph: invalid edge");
        }
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
        throw std::invalid_argument("graph: duplicate edge");
    }
    edges_ = std::move(edges);

    offsets_.assign(static_cast<std::size_t>(vertex_count) + 1, 0);
    for (const auto& [u, v] : edges_) {
        ++offsets_[u + 1];
        ++offsets_[v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    targets_.resize(offsets_.back());
    edge_ids_.resize(offsets_.back());
    std::vector<std::int32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId e = 0; e < static_cast<EdgeId>(edges_.size()); ++e) {
        const auto [u, v] = edges_[e];
        targets_[cursor[u]] = v;
        edge_ids_[cursor[u]++] = e;
        targets_[cursor[v]] = u;
        edge_ids_[cursor[v]++] = e;
    }
}

double Graph::total_measure() const { return std::accumulate(measure_.begin(), measure_.end(), 0.0); }

std::vector<int> bfs_distances(const Graph& g, std::span<const VertexId> sources, int max_radius) {
    std::vector<int> dist(static_cast<std::size_t>(g.size()), kUnreached);
    std::vector<VertexId> queue;
    queue.reserve(static_cast<std::size_t>(g.size()));
    for (VertexId s : sources) {
        if (s < 0 || s >= g.size()) throw std::out_of_range("bfs: source out of range");
        if (dist[s] == kUnreached) {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const VertexId v = queue[head];
        if (max_radius >= 0 && dist[v] >= max_radius) continue;
        for (VertexId w : g.neighbors(v)) {
            if (dist[w] == kUnreached) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

std::vector<int> bfs_distances(const Graph& g, VertexId source, int max_radius) {
    const VertexId src[1] = {source};
    return bfs_distances(g, std::span<const VertexId>(src, 1), max_radius);
}

Ball ball(const Graph& g, VertexId center, double r) {
    if (center < 0 || center >= g.size()) throw std::out_of_range("ball: center out of range");
    if (!(r >= 0.0)) throw std::invalid_argument("ball: negative radius");
    Ball b;
    b.radius = r >= static_cast<double>(g.size()) ? static_cast<int>(g.size()) : static_cast<int>(std::floor(r));
    const auto dist = bfs_distances(g, center, b.radius);
    for (VertexId v = 0; v < g.size(); ++v) {
        if (dist[v] != kUnreached) {
            b.vertices.push_back(v);
            b.volume += g.measure()[v];
        }
    }
    return b;
}

VertexSet open_annulus(std::span<const int> dist, double lo, double hi) {
    VertexSet out;
    for (std::size_t v = 0; v < dist.size(); ++v) {
        if (dist[v] == kUnreached) continue;
        const double d = dist[v];
        if (d > lo && d < hi) out.push_back(static_cast<VertexId>(v));
    }
    return out;
}

VertexSet closed_ball_from(std::span<const int> dist, double r) {
    VertexSet out;
    const double rf = std::floor(r);
    for (std::size_t v = 0; v < dist.size(); ++v) {
        if (dist[v] != kUnreached && dist[v] <= rf) out.push_back(static_cast<VertexId>(v));
    }
    return out;
}

bool is_connected(const Graph& g) {
    if (g.size() == 0) return true;
    const auto dist = bfs_distances(g, VertexId{0});
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d == kUnreached; });
}

int diameter_estimate(const Graph& g) {
    if (g.size() == 0) return 0;
    auto sweep = [&](VertexId s) {
        const auto dist = bfs_distances(g, s);
        VertexId far = s;
        for (VertexId v = 0; v < g.size(); ++v) {
            if (dist[v] > dist[far]) far = v;
        }
        return std::pair{far, dist[far]};
    };
    const auto [a, da] = sweep(0);
    const auto [b, db] = sweep(a);
    (void)b;
    return std::max(da, db);
}

VertexSet make_vertex_set(std::vector<VertexId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

VertexSet complement(const Graph& g, const VertexSet& set) {
    const auto mask = membership_mask(g.size(), set);
    VertexSet out;
    for (VertexId v = 0; v < g.size(); ++v) {
        if (!mask[v]) out.push_back(v);
    }
    return out;
}

std::vector<char> membership_mask(VertexId n, const VertexSet& set) {
    std::vector<char> mask(static_cast<std::size_t>(n), 0);
    for (VertexId v : set) {
        if (v < 0 || v >= n) throw std::out_of_range("vertex set: id out of range");
        mask[v] = 1;
    }
    return mask;
}

double set_measure(const Graph& g, const VertexSet& set) {
    double s = 0.0;
    for (VertexId v : set) s += g.measure()[v];
    return s;
}

}  // namespace carpetlab
