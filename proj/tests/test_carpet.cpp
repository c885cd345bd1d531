#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "carpetlab/carpet.hpp"
#include "carpetlab/errors.hpp"

using namespace carpetlab;

namespace {

// Recursive construction: keep all 3^d subcubes except the centre one at
// every level, starting from the full box.
void recursive_cells(int d, int level, std::vector<std::int64_t> corner, std::int64_t size,
                     std::set<std::vector<std::int64_t>>& out) {
    if (level == 0) {
        out.insert(corner);
        return;
    }
    const std::int64_t sub = size / 3;
    std::vector<int> digit(static_cast<std::size_t>(d), 0);
    while (true) {
        const bool centre = std::all_of(digit.begin(), digit.end(), [](int x) { return x == 1; });
        if (!centre) {
            auto c = corner;
            for (int i = 0; i < d; ++i) c[i] += digit[i] * sub;
            recursive_cells(d, level - 1, c, sub, out);
        }
        int i = 0;
        while (i < d && ++digit[i] == 3) digit[i++] = 0;
        if (i == d) break;
    }
}

}  // namespace

TEST_CASE("cell membership examples") {
    CHECK_FALSE(cell_in_carpet(2, std::array<std::int64_t, 2>{1, 1}, 1));
    CHECK(cell_in_carpet(2, std::array<std::int64_t, 2>{0, 0}, 3));
    CHECK_FALSE(cell_in_carpet(2, std::array<std::int64_t, 2>{4, 4}, 2));
    CHECK_THROWS_AS(cell_in_carpet(2, std::array<std::int64_t, 2>{9, 0}, 2), std::out_of_range);
    CHECK_THROWS_AS(cell_in_carpet(2, std::array<std::int64_t, 2>{-1, 0}, 2), std::out_of_range);
}

TEST_CASE("cell membership matches the recursive construction") {
    for (auto [d, n] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}}) {
        std::set<std::vector<std::int64_t>> cells;
        const std::int64_t side = static_cast<std::int64_t>(std::pow(3, n));
        recursive_cells(d, n, std::vector<std::int64_t>(static_cast<std::size_t>(d), 0), side, cells);
        CHECK(static_cast<std::int64_t>(cells.size()) == carpet_cell_count({d, n}));
        std::vector<std::int64_t> x(static_cast<std::size_t>(d), 0);
        std::int64_t total = 1;
        for (int i = 0; i < d; ++i) total *= side;
        for (std::int64_t lin = 0; lin < total; ++lin) {
            std::int64_t r = lin;
            for (int i = 0; i < d; ++i) {
                x[i] = r % side;
                r /= side;
            }
            CHECK(cell_in_carpet(d, x, n) == (cells.count(x) == 1));
        }
    }
}

TEST_CASE("pre-carpet cell counts and basic structure") {
    CHECK(build_precarpet({2, 2}).size() == 64);
    CHECK(build_precarpet({3, 1}).size() == 26);
    const auto unit = build_precarpet({2, 0});
    CHECK(unit.size() == 1);
    CHECK(unit.graph().edge_count() == 0);
    CHECK(fractal_dimension(2) == doctest::Approx(std::log(8.0) / std::log(3.0)));
    CHECK(kept_subcubes(3) == 26);

    for (auto [d, n] : std::vector<std::pair<int, int>>{{2, 0}, {2, 1}, {2, 3}, {2, 4}, {3, 0}, {3, 2}, {4, 1}}) {
        const auto g = build_precarpet({d, n});
        const auto& gr = g.graph();
        CHECK(g.size() == carpet_cell_count({d, n}));
        CHECK(is_connected(gr));
        CHECK(g.origin() == 0);
        for (auto c : gr.coords(0)) CHECK(c == 0);
        for (VertexId v = 0; v < gr.size(); ++v) {
            for (auto c : gr.coords(v)) {
                CHECK(c >= 0);
                CHECK(c < g.side());
            }
            for (VertexId w : gr.neighbors(v)) {
                const auto nb = gr.neighbors(w);
                CHECK(std::find(nb.begin(), nb.end(), v) != nb.end());
                int diff = 0;
                for (int i = 0; i < d; ++i) diff += std::abs(gr.coords(v)[i] - gr.coords(w)[i]);
                CHECK(diff == 1);
            }
        }
    }
}

TEST_CASE("face-adjacent cells are all joined") {
    const auto g = build_precarpet({2, 3});
    const auto& gr = g.graph();
    std::int64_t expected = 0;
    for (VertexId v = 0; v < gr.size(); ++v) {
        for (int axis = 0; axis < 2; ++axis) {
            std::vector<std::int64_t> c(gr.coords(v).begin(), gr.coords(v).end());
            ++c[axis];
            if (g.find(c) >= 0) ++expected;
        }
    }
    CHECK(gr.edge_count() == expected);
}

TEST_CASE("build budget is enforced") {
    CHECK_THROWS_AS(build_precarpet({2, 5}, 1000), BudgetExceeded);
    CHECK_NOTHROW(build_precarpet({2, 3}, 512));
    CHECK_THROWS_AS(build_precarpet({1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(build_precarpet({2, -1}), std::invalid_argument);
}

TEST_CASE("balls around the origin") {
    const auto g = build_precarpet({2, 5});
    const auto b0 = ball(g.graph(), g.origin(), 0.0);
    CHECK(b0.vertices == VertexSet{0});
    CHECK(b0.volume == 1.0);
    CHECK(ball(g.graph(), g.origin(), 1.0).volume == 3.0);
    CHECK(ball(g.graph(), g.origin(), 1.9).volume == 3.0);
    CHECK(ball(build_precarpet({2, 2}).graph(), 0, 1.0).volume == 3.0);
    for (int k = 2; k <= 4; ++k) {
        const double ratio = ball(g.graph(), 0, std::pow(3, k)).volume / ball(g.graph(), 0, std::pow(3, k - 1)).volume;
        CHECK(ratio >= 4.0);
        CHECK(ratio <= 16.0);
    }
}

TEST_CASE("graph distance dominates the sup-norm distance") {
    for (int d : {2, 3}) {
        const auto g = build_precarpet({d, d == 2 ? 3 : 2});
        const auto& gr = g.graph();
        std::mt19937_64 rng(21 + d);
        std::uniform_int_distribution<VertexId> pick(0, gr.size() - 1);
        for (int trial = 0; trial < 30; ++trial) {
            const VertexId x = pick(rng);
            const auto dist = bfs_distances(gr, x);
            for (VertexId y = 0; y < gr.size(); ++y) {
                int sup = 0;
                for (int i = 0; i < d; ++i) sup = std::max(sup, std::abs(gr.coords(x)[i] - gr.coords(y)[i]));
                CHECK(dist[y] >= sup);
            }
        }
    }
}

TEST_CASE("volume doubling scan") {
    const auto single = build_precarpet({2, 0});
    CHECK(vd_scan(single.graph(), 5, {1.0, 2.0}, 1).c_d_estimate == 1.0);
    CHECK_THROWS_AS(vd_scan(single.graph(), 0, {1.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(vd_scan(single.graph(), 3, {}, 1), std::invalid_argument);

    const auto g4 = build_precarpet({2, 4});
    const auto g5 = build_precarpet({2, 5});
    const auto r4 = vd_scan(g4.graph(), 200, {3, 9, 27}, 7);
    const auto r5 = vd_scan(g5.graph(), 200, {3, 9, 27}, 7);
    CHECK(std::isfinite(r5.c_d_estimate));
    CHECK(r4.samples == 200);
    CHECK(r5.c_d_estimate / r4.c_d_estimate <= 1.5);
    CHECK(r4.c_d_estimate / r5.c_d_estimate <= 1.5);
    CHECK(vd_scan(g5.graph(), 200, {3, 9, 27}, 7).c_d_estimate == r5.c_d_estimate);

    const auto g2 = build_precarpet({2, 2});
    const int diam = diameter_estimate(g2.graph());
    CHECK(vd_scan(g2.graph(), 64, {static_cast<double>(diam)}, 3).c_d_estimate == 1.0);

    const auto a = vd_scan(g2.graph(), 64, {1, 2, 3}, 1);
    const auto b = vd_scan(g2.graph(), 1000, {1, 2, 3}, 99);
    CHECK(a.exhaustive);
    CHECK(a.c_d_estimate == b.c_d_estimate);
    // Exhaustive estimate dominates any sub-sample.
    CHECK(vd_scan(g2.graph(), 10, {1, 2, 3}, 5).c_d_estimate <= a.c_d_estimate);
}

TEST_CASE("lattice box and far shell") {
    const auto box = build_lattice_box(2, 5);
    CHECK(box.size() == 25);
    CHECK(box.graph().edge_count() == 40);
    CHECK_FALSE(box.has_holes());
    CHECK(box.far_shell().size() == 9);
    const auto g = build_precarpet({2, 1});
    CHECK(g.far_shell().size() == 5);
}

TEST_CASE("adjacency export") {
    const auto g = build_precarpet({2, 1});
    std::ostringstream os;
    write_adjacency_csv(g, os);
    const std::string s = os.str();
    CHECK(s.rfind("id,x0,x1,neighbors\n0,0,0,1;3\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 9);
}
