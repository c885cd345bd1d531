#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "carpetlab/carpet.hpp"
#include "carpetlab/timechange.hpp"
#include "test_util.hpp"

using namespace carpetlab;

namespace {

const CarpetGraph& carpet4() {
    static const CarpetGraph g = build_precarpet({2, 4});
    return g;
}

double edge_weight(const VertexField& a, VertexId x, VertexId y) {
    return 0.5 * (1.0 / std::sqrt(a[x]) + 1.0 / std::sqrt(a[y]));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("time change weights and measure") {
    const CarpetGraph& g = carpet4();
    const auto d = bfs_distances(g.graph(), g.origin());
    const DirichletForm df(g.graph_ptr());
    for (double p : {0.0, 0.5, 1.0, 3.0}) {
        const TimeChangeSpec spec{p, g.origin()};
        const VertexField a = time_change_weights(g.graph(), spec);
        const DirichletForm dfa = time_changed_form(df, spec);
        for (VertexId v = 0; v < g.size(); ++v) {
            CHECK(a[v] >= 1.0);
            CHECK(a[v] == doctest::Approx(std::max(1.0, std::pow(static_cast<double>(d[v]), p))));
            CHECK(dfa.measure()[v] <= df.measure()[v]);
            CHECK(dfa.measure()[v] == doctest::Approx(df.measure()[v] / a[v]));
        }
        CHECK(dfa.conductances() == df.conductances());
    }
}

TEST_CASE("rho_a with p = 0 is the graph distance") {
    const CarpetGraph& g = carpet4();
    const auto d = bfs_distances(g.graph(), g.origin());
    const auto rho = rho_a_distances(g.graph(), {0.0, g.origin()});
    for (VertexId v = 0; v < g.size(); ++v) CHECK(rho[v] == static_cast<double>(d[v]));
}

TEST_CASE("rho_a solves the shortest-path equations") {
    const CarpetGraph& g = carpet4();
    const auto d = bfs_distances(g.graph(), g.origin());
    for (double p : {1.0, 2.5, 4.0}) {
        const TimeChangeSpec spec{p, g.origin()};
        const VertexField a = time_change_weights(g.graph(), spec);
        const auto rho = rho_a_distances(g.graph(), spec);
        CHECK(rho[g.origin()] == 0.0);
        for (VertexId x = 0; x < g.size(); ++x) {
            CHECK(rho[x] <= d[x] + 1e-12);
            double best = x == g.origin() ? 0.0 : std::numeric_limits<double>::infinity();
            for (VertexId y : g.graph().neighbors(x)) {
                const double w = edge_weight(a, x, y);
                // Triangle inequality along every edge.
                CHECK(rho[x] <= rho[y] + w + 1e-12);
                best = std::min(best, rho[y] + w);
            }
            CHECK(rho[x] == doctest::Approx(best).epsilon(1e-12));
        }
        std::vector<VertexId> targets = {5, 77, 300, g.size() - 1};
        const auto sub = rho_a_metric(g.graph(), spec, targets);
        for (std::size_t i = 0; i < targets.size(); ++i) CHECK(sub[i] == rho[targets[i]]);
    }
}

TEST_CASE("increment classification") {
    CHECK(classify_increments({1.0, 1.5, 1.75, 1.875}).label == "convergent");
    CHECK(classify_increments({1.0, 2.0, 3.0, 4.0}).label == "divergent");
    CHECK(classify_increments({1.0, 2.0, 4.0, 8.0}).label == "divergent");
    CHECK(classify_increments({1.0, 2.0, 2.5, 3.3}).label == "inconclusive");
    CHECK(classify_increments({1.0, 2.0}).label == "inconclusive");
    const SequenceTrend s = classify_increments({0.0, 4.0, 6.0});
    CHECK(s.increments == std::vector<double>{4.0, 2.0});
    CHECK(s.ratios == std::vector<double>{0.5});
}

TEST_CASE("rho_a shell distances scale as R^(1 - p/2)") {
    const CarpetGraph g = build_precarpet({2, 5});
    for (double p : {1.0, 3.0}) {
        const RhoShellReport rep = rho_shell_scan(g.graph(), {p, g.origin()}, {9, 27, 81});
        CHECK(rep.predicted_exponent == doctest::Approx(1 - p / 2));
        CHECK(std::abs(rep.fit.exponent - rep.predicted_exponent) < 0.1);
    }
    CHECK_THROWS_AS(rho_shell_scan(g.graph(), {1.0, g.origin()}, {9}), std::invalid_argument);
}

TEST_CASE("rho_a to the far shell converges for p = 4") {
    const SequenceTrend s = rho_truncation_sweep(2, {3, 4, 5}, 4.0);
    CHECK(s.label == "convergent");
    CHECK(std::is_sorted(s.values.begin(), s.values.end()));
    const SequenceTrend flat = rho_truncation_sweep(2, {3, 4, 5}, 1.0);
    CHECK(flat.label != "convergent");
}

TEST_CASE("m_a totals and intrinsic balls") {
    const CarpetGraph& g = carpet4();
    const DirichletForm df(g.graph_ptr());
    const MaProfile flat = ma_profile(df, {0.0, g.origin()}, {3, 10, 40});
    CHECK(flat.total == doctest::Approx(4096.0));
    for (std::size_t i = 0; i < flat.rho_radii.size(); ++i) {
        CHECK(flat.ball_measure[i] == doctest::Approx(ball(g.graph(), g.origin(), flat.rho_radii[i]).volume));
    }

    const TimeChangeSpec spec{1.5, g.origin()};
    const MaProfile prof = ma_profile(df, spec, {1, 2, 4, 8});
    const auto rho = rho_a_distances(g.graph(), spec);
    const VertexField a = time_change_weights(g.graph(), spec);
    double total = 0.0;
    for (VertexId v = 0; v < g.size(); ++v) total += df.measure()[v] / a[v];
    CHECK(prof.total == doctest::Approx(total));
    for (std::size_t i = 0; i < prof.rho_radii.size(); ++i) {
        double m = 0.0;
        for (VertexId v = 0; v < g.size(); ++v) {
            if (rho[v] <= prof.rho_radii[i]) m += df.measure()[v] / a[v];
        }
        CHECK(prof.ball_measure[i] == doctest::Approx(m));
    }
    CHECK(std::is_sorted(prof.ball_measure.begin(), prof.ball_measure.end()));
}

TEST_CASE("m_a total sweeps") {
    const double df2 = fractal_dimension(2);
    const SequenceTrend heavy = ma_total_sweep(2, {3, 4, 5}, df2 + 1);
    CHECK(heavy.label == "convergent");
    const SequenceTrend light = ma_total_sweep(2, {3, 4, 5}, 1.0);
    CHECK(light.label == "divergent");
    const double growth = light.values[2] / light.values[1];
    CHECK(growth == doctest::Approx(std::pow(3.0, df2 - 1)).epsilon(0.15));
}

TEST_CASE("vgc classification on the planar carpet") {
    const CarpetGraph g = build_precarpet({2, 5});
    const VgcReport one = vgc_classify(g, {1.0, g.origin()});
    CHECK(one.verdict == VgcVerdict::holds);
    CHECK(!one.rho_bounded);
    const VgcReport heavy = vgc_classify(g, {fractal_dimension(2) + 1, g.origin()});
    CHECK(heavy.verdict == VgcVerdict::holds);
    CHECK(heavy.mass_regime == "finite");
    CHECK(std::string(to_string(VgcVerdict::fails)) == "fails");
}

TEST_CASE("green sweep") {
    CHECK_THROWS_AS(a_infty_green(2, {2, 3}, {1.0}), std::invalid_argument);

    const GreenColumns cols = green_columns(3, {1, 2, 3});
    REQUIRE(cols.exit_times.size() == 3);
    REQUIRE(cols.walk_dimension.size() == 2);

    // Exit time of the generation-2 truncation from an independent solve.
    const CarpetGraph g2 = build_precarpet({3, 2});
    const DirichletForm df2(g2.graph_ptr());
    const VertexSet dom = complement(g2.graph(), g2.far_shell());
    CHECK(cols.exit_times[1] == doctest::Approx(exit_time_solve(df2, dom)[g2.origin()]).epsilon(1e-8));

    const GreenSweep sw = a_infty_sums(cols, {0.0, 1.0, 3.0});
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(sw.sums[0][k] == doctest::Approx(cols.exit_times[k]).epsilon(1e-12));
        // a grows with p, so the sums shrink.
        CHECK(sw.sums[1][k] <= sw.sums[0][k]);
        CHECK(sw.sums[2][k] <= sw.sums[1][k]);
    }
    for (const auto& s : sw.sums) CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(sw.trends[0].label == "divergent");
}

TEST_CASE("monte carlo accumulation") {
    const CarpetGraph& g = carpet4();
    const DirichletForm df(g.graph_ptr());

    SUBCASE("seeded and thread independent") {
        const McReport a = a_infty_mc(df, {1.0, g.origin()}, 200, {3, 9}, 42, 1);
        const McReport b = a_infty_mc(df, {1.0, g.origin()}, 200, {3, 9}, 42, 3);
        const McReport c = a_infty_mc(df, {1.0, g.origin()}, 200, {3, 9}, 43, 1);
        for (std::size_t j = 0; j < a.shells.size(); ++j) CHECK(a.shells[j].accumulated == b.shells[j].accumulated);
        CHECK(a.shells[1].accumulated != c.shells[1].accumulated);
        for (std::size_t j = 0; j < a.shells.size(); ++j) {
            CHECK(a.shells[j].q10 <= a.shells[j].median);
            CHECK(a.shells[j].median <= a.shells[j].q90);
            CHECK(a.shells[j].median == doctest::Approx(median(a.shells[j].accumulated)));
        }
    }

    SUBCASE("p = 0 gives hitting times matching the exit-time solve") {
        const int walkers = 20000;
        const McReport rep = a_infty_mc(df, {0.0, g.origin()}, walkers, {6, 12}, 5, 2);
        for (const McShell& s : rep.shells) {
            const Ball inside = ball(g.graph(), g.origin(), s.radius - 1);
            const double exact = exit_time_solve(df, inside.vertices)[g.origin()];
            const double mean = std::accumulate(s.accumulated.begin(), s.accumulated.end(), 0.0) / walkers;
            double var = 0.0;
            for (double x : s.accumulated) var += (x - mean) * (x - mean);
            const double se = std::sqrt(var / (walkers - 1) / walkers);
            CHECK(std::abs(mean - exact) < 4 * se);
        }
    }

    CHECK_THROWS_AS(a_infty_mc(df, {1.0, g.origin()}, 0, {3}, 1), std::invalid_argument);
    CHECK_THROWS_AS(a_infty_mc(df, {1.0, g.origin()}, 10, {1000}, 1), std::invalid_argument);
}

TEST_CASE("completeness criteria on synthetic sequences") {
    std::vector<double> theta(8, 3.0), mass(8, 50.0);
    CHECK(criterion_a(theta, mass).satisfied);

    std::vector<double> big(8);
    for (int n = 1; n <= 8; ++n) big[n - 1] = std::pow(8.0, n);
    CHECK(!criterion_a(theta, big).satisfied);

    std::vector<double> sq(8), vol(8);
    for (int n = 1; n <= 8; ++n) {
        const double ln = std::log(static_cast<double>(n));
        sq[n - 1] = static_cast<double>(n) * n;
        vol[n - 1] = std::exp(2.0 * ln * ln);
    }
    const CriterionB b = criterion_b(sq, vol);
    CHECK(b.satisfied);
    for (double v : b.b_needed) CHECK(v == doctest::Approx(1.0));

    std::vector<double> cube(8);
    for (int n = 1; n <= 8; ++n) cube[n - 1] = std::pow(n, 3.0);
    CHECK(!criterion_b(cube, vol).satisfied);
    CHECK_THROWS_AS(criterion_a({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("scom check bookkeeping") {
    const CarpetGraph& g = carpet4();
    const DirichletForm df(g.graph_ptr());
    const ScalingFunction sf(2.0, 2.1);
    const TimeChangeSpec spec{1.0, g.origin()};
    FamilySpec fam;
    fam.smooth_fields = 5;
    const ScomReport rep = scom_check(df, sf, spec, 3.0, 2, fam);
    REQUIRE(rep.radii.size() == 2);
    CHECK(rep.radii[0] == doctest::Approx(3.0));
    CHECK(rep.radii[1] == doctest::Approx(9.0));
    CHECK(rep.classification == "inconclusive");

    const auto d = bfs_distances(g.graph(), g.origin());
    const VertexField a = time_change_weights(g.graph(), spec);
    for (std::size_t n = 0; n < rep.radii.size(); ++n) {
        double m = 0.0;
        for (VertexId v = 0; v < g.size(); ++v) {
            if (d[v] > rep.radii[n] && d[v] <= rep.radii[n] * 3.0) m += df.measure()[v] / a[v];
        }
        CHECK(rep.mass[n] == doctest::Approx(m));
        CHECK(rep.theta[n] > 0.0);
    }
    CHECK(rep.a.sequence.size() == 2);

    CHECK_THROWS_AS(scom_check(df, sf, spec, 1.0, 2, fam), std::invalid_argument);
    CHECK_THROWS_AS(scom_check(df, sf, spec, 3.0, 5, fam), std::invalid_argument);
}
