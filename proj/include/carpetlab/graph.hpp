#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace carpetlab {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;

/// Sorted, duplicate-free list of vertex ids.
using VertexSet = std::vector<VertexId>;

/// Undirected simple graph in CSR form with a positive vertex measure and,
/// optionally, integer lattice coordinates per vertex.
///
/// Every undirected edge {u,v} has one id; both CSR slots of the edge carry it
/// so per-edge data (conductances) can be stored once.
class Graph {
public:
    Graph() = default;
    Graph(VertexId vertex_count, std::vector<std::pair<VertexId, VertexId>> edges,
          std::vector<double> measure = {}, int coord_dim = 0, std::vector<std::int32_t> coords = {});

    VertexId size() const { return static_cast<VertexId>(offsets_.empty() ? 0 : offsets_.size() - 1); }
    EdgeId edge_count() const { return static_cast<EdgeId>(edges_.size()); }

    std::span<const VertexId> neighbors(VertexId v) const {
        return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
    }
    std::span<const EdgeId> incident_edges(VertexId v) const {
        return {edge_ids_.data() + offsets_[v], edge_ids_.data() + offsets_[v + 1]};
    }
    int degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
    const std::pair<VertexId, VertexId>& edge(EdgeId e) const { return edges_[e]; }
    const std::vector<std::pair<VertexId, VertexId>>& edges() const { return edges_; }

    const std::vector<double>& measure() const { return measure_; }
    double total_measure() const;

    bool has_coords() const { return coord_dim_ > 0; }
    int coord_dim() const { return coord_dim_; }
    std::span<const std::int32_t> coords(VertexId v) const {
        return {coords_.data() + static_cast<std::size_t>(v) * coord_dim_, static_cast<std::size_t>(coord_dim_)};
    }

private:
    std::vector<std::int32_t> offsets_;
    std::vector<VertexId> targets_;
    std::vector<EdgeId> edge_ids_;
    std::vector<std::pair<VertexId, VertexId>> edges_;
    std::vector<double> measure_;
    int coord_dim_ = 0;
    std::vector<std::int32_t> coords_;
};

inline constexpr int kUnreached = -1;

/// Hop distances from `sources`; vertices farther than max_radius (if >= 0)
/// or unreachable are kUnreached.
std::vector<int> bfs_distances(const Graph& g, std::span<const VertexId> sources, int max_radius = -1);
std::vector<int> bfs_distances(const Graph& g, VertexId source, int max_radius = -1);

struct Ball {
    VertexSet vertices;
    double volume = 0.0;
    int radius = 0;  // floor of the requested radius
};

/// Closed graph-distance ball of radius floor(r) and its measure V(x,r).
Ball ball(const Graph& g, VertexId center, double r);

/// Vertices with lo < dist < hi (strict on both sides), from precomputed distances.
VertexSet open_annulus(std::span<const int> dist, double lo, double hi);
/// Vertices with dist <= floor(r).
VertexSet closed_ball_from(std::span<const int> dist, double r);

bool is_connected(const Graph& g);
/// Double-sweep lower bound on the diameter (exact on trees and lattice boxes).
int diameter_estimate(const Graph& g);

VertexSet make_vertex_set(std::vector<VertexId> ids);
VertexSet complement(const Graph& g, const VertexSet& set);
std::vector<char> membership_mask(VertexId n, const VertexSet& set);
double set_measure(const Graph& g, const VertexSet& set);

}  // namespace carpetlab
