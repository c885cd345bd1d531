#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "carpetlab/carpet.hpp"
#include "carpetlab/form.hpp"
#include "carpetlab/graph.hpp"

namespace testutil {

using namespace carpetlab;

// Path 0 - 1 - ... - (n-1).
inline std::shared_ptr<const Graph> path_graph(int n) {
    std::vector<std::pair<VertexId, VertexId>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return std::make_shared<const Graph>(n, std::move(e));
}

// Vertex 0 joined to k leaves.
inline std::shared_ptr<const Graph> star_graph(int k) {
    std::vector<std::pair<VertexId, VertexId>> e;
    for (int i = 1; i <= k; ++i) e.emplace_back(0, i);
    return std::make_shared<const Graph>(k + 1, std::move(e));
}

inline std::vector<double> uniform_field(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> f(n);
    for (auto& v : f) v = u(rng);
    return f;
}

// Carpet form with random conductances in [1/2, 2] and measure in [1/2, 2].
inline DirichletForm random_weighted_form(const CarpetGraph& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto c = uniform_field(rng, static_cast<std::size_t>(g.graph().edge_count()), 0.5, 2.0);
    auto m = uniform_field(rng, static_cast<std::size_t>(g.size()), 0.5, 2.0);
    return DirichletForm(g.graph_ptr(), std::move(c), std::move(m));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace testutil
