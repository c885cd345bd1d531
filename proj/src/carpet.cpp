#include "carpetlab/carpet.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "carpetlab/errors.hpp"

namespace carpetlab {

namespace {

std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > (std::int64_t{1} << 62) / base) throw BudgetExceeded("integer power overflow");
        r *= base;
    }
    return r;
}

// Bit k set iff the k-th base-3 digit of c equals 1.
std::uint32_t ones_mask(std::int64_t c, int generations) {
    std::uint32_t m = 0;
    for (int k = 0; k < generations; ++k) {
        if (c % 3 == 1) m |= (1u << k);
        c /= 3;
    }
    return m;
}

CarpetGraph build_box_complex(const CarpetSpec& spec, std::int64_t side, bool holes, std::int64_t budget) {
    const int d = spec.dim;
    const std::int64_t total = ipow(side, d);
    if (total > std::int64_t{1} << 31) throw BudgetExceeded("bounding box too large to index");

    std::vector<std::uint32_t> masks(static_cast<std::size_t>(side), 0);
    if (holes) {
        for (std::int64_t c = 0; c < side; ++c) masks[c] = ones_mask(c, spec.generations);
    }

    std::vector<VertexId> lookup(static_cast<std::size_t>(total), -1);
    std::vector<std::int32_t> coords;
    std::vector<std::int64_t> x(static_cast<std::size_t>(d), 0);
    VertexId count = 0;
    for (std::int64_t lin = 0; lin < total; ++lin) {
        std::uint32_t all_ones = holes ? ~0u : 0u;
        if (holes) {
            for (int i = 0; i < d; ++i) all_ones &= masks[x[i]];
        }
        if (all_ones == 0u) {
            if (count >= budget) throw BudgetExceeded("cell budget exceeded during construction");
            lookup[lin] = count++;
            for (int i = 0; i < d; ++i) coords.push_back(static_cast<std::int32_t>(x[i]));
        }
        for (int i = 0; i < d; ++i) {
            if (++x[i] < side) break;
            x[i] = 0;
        }
    }

    std::vector<std::pair<VertexId, VertexId>> edges;
    edges.reserve(static_cast<std::size_t>(count) * d);
    std::vector<std::int64_t> stride(static_cast<std::size_t>(d), 1);
    for (int i = 1; i < d; ++i) stride[i] = stride[i - 1] * side;
    for (VertexId v = 0; v < count; ++v) {
        std::int64_t lin = 0;
        for (int i = 0; i < d; ++i) lin += coords[static_cast<std::size_t>(v) * d + i] * stride[i];
        for (int i = 0; i < d; ++i) {
            if (coords[static_cast<std::size_t>(v) * d + i] + 1 >= side) continue;
            const VertexId w = lookup[lin + stride[i]];
            if (w >= 0) edges.emplace_back(v, w);
        }
    }

    auto graph = std::make_shared<const Graph>(count, std::move(edges), std::vector<double>{}, d, std::move(coords));
    return CarpetGraph(spec, side, holes, std::move(graph), std::move(lookup));
}

}  // namespace

std::int64_t kept_subcubes(int dim) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    return ipow(3, dim) - 1;
}

std::int64_t carpet_cell_count(const CarpetSpec& spec) {
    if (spec.generations < 0) throw std::invalid_argument("generations must be >= 0");
    return ipow(kept_subcubes(spec.dim), spec.generations);
}

double fractal_dimension(int dim) {
    return std::log(static_cast<double>(kept_subcubes(dim))) / std::log(3.0);
}

bool cell_in_carpet(int dim, std::span<const std::int64_t> coords, int generations) {
    if (dim < 1 || static_cast<int>(coords.size()) != dim) throw std::invalid_argument("coordinate arity mismatch");
    if (generations < 0) throw std::invalid_argument("generations must be >= 0");
    const std::int64_t side = ipow(3, generations);
    for (std::int64_t c : coords) {
        if (c < 0 || c >= side) throw std::out_of_range("cell coordinate outside [0, 3^n)");
    }
    std::int64_t scale = 1;
    for (int k = 1; k <= generations; ++k) {
        bool all_one = true;
        for (std::int64_t c : coords) {
            if ((c / scale) % 3 != 1) {
                all_one = false;
                break;
            }
        }
        if (all_one) return false;
        scale *= 3;
    }
    return true;
}

CarpetGraph::CarpetGraph(CarpetSpec spec, std::int64_t side, bool holes, std::shared_ptr<const Graph> graph,
                         std::vector<VertexId> lookup)
    : spec_(spec), side_(side), holes_(holes), graph_(std::move(graph)), lookup_(std::move(lookup)) {}

VertexId CarpetGraph::find(std::span<const std::int64_t> coords) const {
    if (static_cast<int>(coords.size()) != spec_.dim) throw std::invalid_argument("coordinate arity mismatch");
    std::int64_t lin = 0;
    std::int64_t stride = 1;
    for (int i = 0; i < spec_.dim; ++i) {
        if (coords[i] < 0 || coords[i] >= side_) return -1;
        lin += coords[i] * stride;
        stride *= side_;
    }
    return lookup_[lin];
}

VertexSet CarpetGraph::far_shell() const {
    VertexSet out;
    for (VertexId v = 0; v < graph_->size(); ++v) {
        const auto c = graph_->coords(v);
        if (std::any_of(c.begin(), c.end(), [&](std::int32_t x) { return x == side_ - 1; })) out.push_back(v);
    }
    return out;
}

CarpetGraph build_precarpet(const CarpetSpec& spec, std::int64_t cell_budget) {
    if (spec.dim < 2) throw std::invalid_argument("carpet dimension must be >= 2");
    if (spec.generations < 0) throw std::invalid_argument("generations must be >= 0");
    if (spec.generations > 30) throw BudgetExceeded("too many generations");
    const std::int64_t cells = carpet_cell_count(spec);
    if (cells > cell_budget) {
        throw BudgetExceeded("pre-carpet with " + std::to_string(cells) + " cells exceeds budget of " +
                             std::to_string(cell_budget));
    }
    auto g = build_box_complex(spec, ipow(3, spec.generations), true, cell_budget);
    if (g.size() != cells || !is_connected(g.graph())) {
        throw std::logic_error("pre-carpet construction produced an inconsistent graph");
    }
    return g;
}

CarpetGraph build_lattice_box(int dim, std::int64_t side, std::int64_t cell_budget) {
    if (dim < 1 || side < 1) throw std::invalid_argument("lattice box needs dim >= 1 and side >= 1");
    if (ipow(side, dim) > cell_budget) throw BudgetExceeded("lattice box exceeds cell budget");
    return build_box_complex(CarpetSpec{dim, 0}, side, false, cell_budget);
}

VdReport vd_scan(const Graph& g, int sample_count, const std::vector<double>& radii, std::uint64_t seed) {
    if (sample_count <= 0 || radii.empty()) throw std::invalid_argument("vd_scan: empty sample");
    if (g.size() == 0) throw std::invalid_argument("vd_scan: empty graph");
    for (double r : radii) {
        if (!(r >= 0.0)) throw std::invalid_argument("vd_scan: negative radius");
    }

    VdReport rep;
    rep.radii = radii;
    std::vector<VertexId> centers;
    if (sample_count >= g.size()) {
        rep.exhaustive = true;
        centers.resize(static_cast<std::size_t>(g.size()));
        for (VertexId v = 0; v < g.size(); ++v) centers[v] = v;
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<VertexId> pick(0, g.size() - 1);
        for (int i = 0; i < sample_count; ++i) centers.push_back(pick(rng));
    }
    const double rmax = *std::max_element(radii.begin(), radii.end());
    const int reach = static_cast<int>(std::min<double>(std::floor(2.0 * rmax), g.size()));

    std::vector<double> shell_mass;
    for (VertexId x : centers) {
        const auto dist = bfs_distances(g, x, reach);
        shell_mass.assign(static_cast<std::size_t>(reach) + 1, 0.0);
        for (VertexId v = 0; v < g.size(); ++v) {
            if (dist[v] != kUnreached) shell_mass[dist[v]] += g.measure()[v];
        }
        for (std::size_t k = 1; k < shell_mass.size(); ++k) shell_mass[k] += shell_mass[k - 1];
        for (double r : radii) {
            const auto small = static_cast<std::size_t>(std::min<double>(std::floor(r), reach));
            const auto big = static_cast<std::size_t>(std::min<double>(std::floor(2.0 * r), reach));
            rep.c_d_estimate = std::max(rep.c_d_estimate, shell_mass[big] / shell_mass[small]);
        }
        ++rep.samples;
    }
    return rep;
}

void write_adjacency_csv(const CarpetGraph& g, std::ostream& os) {
    const Graph& gr = g.graph();
    os << "id";
    for (int i = 0; i < g.dim(); ++i) os << ",x" << i;
    os << ",neighbors\n";
    for (VertexId v = 0; v < gr.size(); ++v) {
        os << v;
        for (auto c : gr.coords(v)) os << ',' << c;
        os << ',';
        bool first = true;
        for (VertexId w : gr.neighbors(v)) {
            if (!first) os << ';';
            os << w;
            first = false;
        }
        os << '\n';
    }
}

}  // namespace carpetlab
