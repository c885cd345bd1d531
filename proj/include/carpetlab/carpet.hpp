#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "carpetlab/graph.hpp"

namespace carpetlab {

inline constexpr std::int64_t kDefaultCellBudget = 2'000'000;

struct CarpetSpec {
    int dim = 2;
    int generations = 0;
};

/// M_d = 3^d - 1, the number of subcubes kept per refinement.
std::int64_t kept_subcubes(int dim);
/// M_d^n.
std::int64_t carpet_cell_count(const CarpetSpec& spec);
/// log M_d / log 3.
double fractal_dimension(int dim);

/// True iff the unit cell with lower corner `coords` survives in the
/// generation-n pre-carpet, i.e. at no base-3 digit position are all
/// coordinates' digits equal to 1.
bool cell_in_carpet(int dim, std::span<const std::int64_t> coords, int generations);

/// Unit-cell complex inside the box [0, side)^dim with face adjacency.
/// Cells are numbered in lexicographic order of their coordinates (axis 0
/// fastest), so the cell at the origin corner is vertex 0.
class CarpetGraph {
public:
    CarpetGraph(CarpetSpec spec, std::int64_t side, bool holes, std::shared_ptr<const Graph> graph,
                std::vector<VertexId> lookup);

    const CarpetSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim; }
    std::int64_t side() const { return side_; }
    /// False for the plain lattice box used as a Euclidean reference.
    bool has_holes() const { return holes_; }

    const Graph& graph() const { return *graph_; }
    std::shared_ptr<const Graph> graph_ptr() const { return graph_; }
    VertexId origin() const { return 0; }
    VertexId size() const { return graph_->size(); }

    /// Vertex id of the cell at `coords`, or -1 if the cell is absent.
    VertexId find(std::span<const std::int64_t> coords) const;

    /// Cells whose coordinates touch the far faces x_i = side - 1 of the box.
    VertexSet far_shell() const;

private:
    CarpetSpec spec_;
    std::int64_t side_;
    bool holes_;
    std::shared_ptr<const Graph> graph_;
    std::vector<VertexId> lookup_;
};

/// Generation-n pre-carpet graph on M_d^n unit cells; throws BudgetExceeded if
/// M_d^n > cell_budget.
CarpetGraph build_precarpet(const CarpetSpec& spec, std::int64_t cell_budget = kDefaultCellBudget);

/// Solid lattice box side^dim (no cells removed).
CarpetGraph build_lattice_box(int dim, std::int64_t side, std::int64_t cell_budget = kDefaultCellBudget);

struct VdReport {
    double c_d_estimate = 1.0;
    int samples = 0;
    std::vector<double> radii;
    bool exhaustive = false;
};

/// Max over sampled centers and radii of V(x,2r)/V(x,r). When sample_count is
/// at least the vertex count every vertex is used and the seed is irrelevant.
VdReport vd_scan(const Graph& g, int sample_count, const std::vector<double>& radii, std::uint64_t seed);

/// CSV dump: id, coordinates, neighbour ids separated by ';'.
void write_adjacency_csv(const CarpetGraph& g, std::ostream& os);

}  // namespace carpetlab
