#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "carpetlab/carpet.hpp"
#include "carpetlab/errors.hpp"
#include "carpetlab/inequalities.hpp"
#include "test_util.hpp"

using namespace carpetlab;
using testutil::max_abs_diff;

namespace {

const CarpetGraph& carpet3() {
    static const CarpetGraph g = build_precarpet({2, 3});
    return g;
}

VertexId cell(const CarpetGraph& g, std::int64_t x, std::int64_t y) {
    const std::int64_t c[2] = {x, y};
    const VertexId v = g.find(c);
    REQUIRE(v >= 0);
    return v;
}

// Direct sums over U: (sum f^2 Gamma(phi), sum phi^2 Gamma(f), sum f^2 m), Gamma from edge lists.
struct Sums {
    double a = 0.0, b = 0.0, m = 0.0;
};

Sums direct_sums(const DirichletForm& df, const VertexField& phi, const VertexField& f, const VertexSet& u) {
    const auto& edges = df.graph().edges();
    VertexField gphi(static_cast<std::size_t>(df.size()), 0.0), gf(gphi.size(), 0.0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [x, y] = edges[e];
        const double c = df.conductances()[e];
        const double dp = phi[x] - phi[y], dfv = f[x] - f[y];
        gphi[x] += 0.5 * c * dp * dp;
        gphi[y] += 0.5 * c * dp * dp;
        gf[x] += 0.5 * c * dfv * dfv;
        gf[y] += 0.5 * c * dfv * dfv;
    }
    Sums s;
    for (VertexId x : u) {
        s.a += f[x] * f[x] * gphi[x];
        s.b += phi[x] * phi[x] * gf[x];
        s.m += f[x] * f[x] * df.measure()[x];
    }
    return s;
}

}  // namespace

TEST_CASE("linear cutoff on a path") {
    auto g = testutil::path_graph(20);
    const CutoffFn phi = cutoff_linear(*g, 0, 2.0, 2.0);
    CHECK(phi.values[0] == 1.0);
    CHECK(phi.values[2] == 1.0);
    CHECK(phi.values[3] == doctest::Approx(0.5));
    CHECK(phi.values[4] == 0.0);
    CHECK(phi.values[19] == 0.0);
    CHECK(phi.inner == VertexSet{0, 1, 2});
    CHECK(phi.outer == VertexSet{0, 1, 2, 3});
    CHECK(phi.kind == CutoffKind::linear);
    CHECK_THROWS_AS(cutoff_linear(*g, 0, 2.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(cutoff_linear(*g, 0, -1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(cutoff_linear(*g, 20, 1.0, 2.0), std::out_of_range);
}

TEST_CASE("cutoff annulus is the transition region") {
    auto g = testutil::path_graph(20);
    const CutoffFn phi = cutoff_linear(*g, 0, 2.0, 4.0);
    CHECK(cutoff_annulus(*g, phi) == VertexSet{2, 3, 4, 5, 6});
}

TEST_CASE("csd theta on a path by hand") {
    // phi = 1, 1, 1, 3/4, 1/2, 1/4, 0, ...; with f = 1 the gradient term vanishes and
    // sum_U Gamma(phi) = 2/32 + 3/16 = 1/4 over |U| = 5.
    auto g = testutil::path_graph(20);
    DirichletForm df(g);
    const CutoffFn phi = cutoff_linear(*g, 0, 2.0, 4.0);
    const CsdReport rep = csd_theta(df, phi, {VertexField(20, 1.0)});
    CHECK(rep.theta_star == doctest::Approx(0.05));
    CHECK(rep.argmax == 0);
    CHECK(rep.annulus_size == 5);
}

TEST_CASE("csd theta matches direct sums and is monotone in the family") {
    const auto& cg = carpet3();
    const DirichletForm df = testutil::random_weighted_form(cg, 11);
    const VertexId x0 = cell(cg, 6, 4);
    const CutoffFn phi = cutoff_linear(cg.graph(), x0, 3.0, 5.0);
    const VertexSet u = cutoff_annulus(cg.graph(), phi);
    std::mt19937_64 rng(5);
    std::vector<VertexField> fam;
    double expected = 0.0;
    for (int k = 0; k < 6; ++k) {
        fam.push_back(testutil::uniform_field(rng, static_cast<std::size_t>(df.size()), -1.0, 1.0));
        const Sums s = direct_sums(df, phi.values, fam.back(), u);
        expected = std::max(expected, std::max(0.0, s.a - s.b / 8.0) / s.m);
        const double got = csd_theta(df, phi, fam).theta_star;
        CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    }
    // Scaling a field does not change its ratio.
    std::vector<VertexField> scaled = fam;
    for (auto& f : scaled) {
        for (auto& v : f) v *= 3.5;
    }
    CHECK(csd_theta(df, phi, scaled).theta_star == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(csd_theta(df, phi, {}), std::invalid_argument);
    CutoffFn flat = phi;
    std::fill(flat.values.begin(), flat.values.end(), 1.0);
    CHECK_THROWS_AS(csd_theta(df, flat, fam), std::invalid_argument);
}

TEST_CASE("resolvent cutoff") {
    const auto& cg = carpet3();
    const DirichletForm df(cg.graph_ptr());
    const ScalingFunction sf(2.0, 2.1);
    const VertexId x0 = cell(cg, 6, 4);
    const double R = 2.0, r = 12.0;
    const CutoffFn phi = cutoff_resolvent(df, sf, x0, R, r);
    const auto dist = bfs_distances(cg.graph(), x0);
    CHECK(phi.kind == CutoffKind::resolvent);
    CHECK(phi.calibration > 0.0);
    for (VertexId v = 0; v < cg.size(); ++v) {
        CHECK(phi.values[v] >= 0.0);
        CHECK(phi.values[v] <= 1.0);
        if (dist[v] <= R + r / 2.0) CHECK(phi.values[v] == 1.0);
        if (dist[v] >= R + r * 9.0 / 10.0) CHECK(phi.values[v] == 0.0);
        // Calibration makes phi = 1 on the middle annulus.
        if (dist[v] > R + 2.0 * r / 5.0 && dist[v] < R + 3.0 * r / 5.0) CHECK(phi.values[v] == doctest::Approx(1.0));
    }

    // Maximum principle for the underlying resolvent: h <= 1/lambda = Psi(r).
    const VertexSet d0 = open_annulus(dist, R + r / 10.0, R + 9.0 * r / 10.0);
    VertexField rhs(static_cast<std::size_t>(cg.size()), 0.0);
    for (VertexId v : open_annulus(dist, R + r / 5.0, R + 4.0 * r / 5.0)) rhs[v] = 1.0;
    const VertexField h = resolvent_solve(df, d0, 1.0 / sf(r), rhs);
    CHECK(*std::max_element(h.begin(), h.end()) <= sf(r) * (1.0 + 1e-12));

    // An explicit c1 is used as given.
    const CutoffFn tiny = cutoff_resolvent(df, sf, x0, R, r, 1e-6);
    CHECK(tiny.calibration == 1e-6);
    for (VertexId v = 0; v < cg.size(); ++v) {
        if (dist[v] > R + r / 2.0) CHECK(tiny.values[v] == doctest::Approx(1e-6 * h[v] / sf(r)));
    }

    CHECK_THROWS_AS(cutoff_resolvent(df, sf, x0, R, 9.0), std::invalid_argument);
    CHECK_THROWS_AS(cutoff_resolvent(df, sf, x0, 100.0, 20.0), std::invalid_argument);
}

TEST_CASE("improved cutoff brackets each shell between successive weights") {
    auto g = testutil::path_graph(200);
    const DirichletForm df(g);
    const ScalingFunction sf(2.0, 2.5);
    const CutoffBuilder weak = linear_builder(*g);
    const double R = 5.0, r = 60.0;
    for (double c1 : {0.0, 0.05, 1.0}) {
        const CutoffFn phi = cutoff_improve(df, sf, 0, R, r, weak, c1);
        const double lambda = c1 > 0.0 ? std::log(1.0 + std::sqrt(1.0 / (8.0 * c1))) : 1.0;
        CHECK(phi.lambda == doctest::Approx(lambda));
        REQUIRE_FALSE(phi.fallback);

        // Independent shell radii.
        const double c0 = std::exp(lambda / 2.5) - 1.0;
        std::vector<double> radii{R};
        for (int n = 1;; ++n) {
            const double s = c0 * r * std::exp(-n * lambda / 2.5);
            if (s < 1.0) break;
            radii.push_back(radii.back() + s);
        }
        radii.back() = R + r;
        const int shells = static_cast<int>(radii.size()) - 1;
        CHECK(phi.shells == shells);
        for (VertexId x = 0; x < 200; ++x) {
            const double d = x;
            if (d <= R) CHECK(phi.values[x] == doctest::Approx(1.0));
            if (d >= R + r) CHECK(phi.values[x] == 0.0);
            for (int n = 1; n <= shells; ++n) {
                if (d > radii[n - 1] && d < radii[n]) {
                    const double hi = std::exp(-(n - 1) * lambda);
                    const double lo = n == shells ? 0.0 : std::exp(-n * lambda);
                    CHECK(phi.values[x] <= hi + 1e-12);
                    CHECK(phi.values[x] >= lo - 1e-12);
                }
            }
        }
    }
    // Too narrow for two shells: weak cutoff returned and flagged.
    const CutoffFn narrow = cutoff_improve(df, sf, 0, R, 1.5, weak, 1.0);
    CHECK(narrow.fallback);
    CHECK(max_abs_diff(narrow.values, cutoff_linear(*g, 0, R, 1.5).values) == 0.0);
    CHECK_THROWS_AS(cutoff_improve(df, sf, 0, R, r, weak, -1.0), std::invalid_argument);
}

TEST_CASE("cover-max cutoff") {
    const auto& cg = carpet3();
    const DirichletForm df(cg.graph_ptr());
    const CutoffBuilder lin = linear_builder(cg.graph());
    const VertexId x0 = cell(cg, 6, 4);

    // R = 0: one piece, the cutoff of B(x0, r/3) inside B(x0, 2r/3).
    const CutoffFn single = cutoff_cover_max(df, x0, 0.0, 9.0, lin);
    CHECK(single.pieces == 1);
    CHECK(max_abs_diff(single.values, cutoff_linear(cg.graph(), x0, 3.0, 3.0).values) == 0.0);

    const double R = 6.0, r = 9.0;
    const CutoffFn phi = cutoff_cover_max(df, x0, R, r, lin);
    const auto dist = bfs_distances(cg.graph(), x0);
    CHECK(phi.pieces > 1);
    CHECK(phi.overlap >= 1);
    CHECK(phi.gamma_dominated);
    for (VertexId v = 0; v < cg.size(); ++v) {
        if (dist[v] <= R) CHECK(phi.values[v] == 1.0);
        if (dist[v] >= R + r) CHECK(phi.values[v] == 0.0);
    }
    CHECK_THROWS_AS(cutoff_cover_max(df, x0, R, 2.0, lin), std::invalid_argument);
}

TEST_CASE("default test family") {
    const auto& cg = carpet3();
    const DirichletForm df(cg.graph_ptr());
    const VertexId x0 = cell(cg, 6, 4);
    const CutoffFn phi = cutoff_linear(cg.graph(), x0, 3.0, 4.0);
    const VertexSet u = cutoff_annulus(cg.graph(), phi);
    FamilySpec spec;
    spec.smooth_fields = 10;
    const TestFamily a = default_test_family(df, u, 1.5, spec);
    const TestFamily b = default_test_family(df, u, 1.5, spec);
    CHECK(a.fields.size() == 1 + 2 + 4 + 3 + 10);
    CHECK(a.labels.size() == a.fields.size());
    CHECK(a.labels.front() == "constant");
    for (std::size_t k = 0; k < a.fields.size(); ++k) {
        CHECK(a.fields[k].size() == static_cast<std::size_t>(cg.size()));
        CHECK(max_abs_diff(a.fields[k], b.fields[k]) == 0.0);
        for (double v : a.fields[k]) REQUIRE(std::isfinite(v));
    }
    CHECK_THROWS_AS(default_test_family(df, {}, 1.0), std::invalid_argument);
}

TEST_CASE("csa scan: linear cutoffs on a solid square give theta ~ r^-2") {
    const CarpetGraph box = build_lattice_box(2, 81);
    const DirichletForm df(box.graph_ptr());
    const ScalingFunction sf(2.0, 2.0);
    const std::vector<VertexId> centers{cell(box, 40, 40), cell(box, 30, 50)};
    FamilySpec spec;
    spec.smooth_fields = 10;
    const CsaScan one = csa_scan(df, sf, centers, {4.0}, {3.0, 9.0, 27.0}, linear_builder(box.graph()), spec, 1);
    const CsaScan two = csa_scan(df, sf, centers, {4.0}, {3.0, 9.0, 27.0}, linear_builder(box.graph()), spec, 2);
    CHECK(one.reports.size() == 6);
    CHECK(one.widths == std::vector<double>{3.0, 9.0, 27.0});
    CHECK(one.fit.exponent == doctest::Approx(-2.0).epsilon(0.1));
    CHECK(one.cs_spread < 2.0);
    for (std::size_t i = 0; i < one.reports.size(); ++i) CHECK(one.reports[i].theta_star == two.reports[i].theta_star);
}

TEST_CASE("fk scan") {
    const auto& cg = carpet3();
    const DirichletForm df(cg.graph_ptr());
    const ScalingFunction sf(2.0, 2.1);
    const FkReport a = fk_scan(df, sf, 1.1, 30, 9, {3.0, 5.0}, 1);
    const FkReport b = fk_scan(df, sf, 1.1, 30, 9, {3.0, 5.0}, 3);
    CHECK(a.samples == 30);
    CHECK(a.monotonicity_violations == 0);
    CHECK(a.c_f_estimate > 0.0);
    double mn = 1e300;
    for (std::size_t i = 0; i < a.details.size(); ++i) {
        const auto& s = a.details[i];
        CHECK(s.domain_measure <= s.ball_measure);
        CHECK(s.value == doctest::Approx(s.lambda1 * sf(s.r) * std::pow(s.domain_measure / s.ball_measure, 1.1)));
        CHECK(s.value == b.details[i].value);
        CHECK(s.kind == (i % 3 == 0 ? "ball" : i % 3 == 1 ? "subball" : "growth"));
        mn = std::min(mn, s.value);
    }
    CHECK(a.c_f_estimate == mn);
    CHECK_THROWS_AS(fk_scan(df, sf, 1.1, 5, 1, {100.0}), std::invalid_argument);
    CHECK_THROWS_AS(fk_scan(df, sf, 0.0, 5, 1, {3.0}), std::invalid_argument);
}

TEST_CASE("cacciopoli check") {
    const auto& cg = carpet3();
    const DirichletForm df(cg.graph_ptr());
    const VertexId x0 = cell(cg, 6, 4);
    const double R = 8.0, r = 4.0;
    const CutoffFn phi = cutoff_linear(cg.graph(), x0, R - r, r);
    CacciopoliParams p;
    p.x0 = x0;
    p.R = R;
    p.r = r;
    p.T = 10.0;
    p.trials = 4;
    p.time_intervals = 16;

    const CacciopoliReport rep = cacciopoli_check(df, phi, 0.05, p);
    CHECK(rep.ratios.size() == 4);
    CHECK(rep.K == doctest::Approx(0.2));
    CHECK(rep.max_ratio > 0.0);
    CHECK(rep.max_ratio <= 2.0);

    // Initial data in [0,1] never exceeds level 1, so v vanishes.
    p.level = 1.0;
    const CacciopoliReport zero = cacciopoli_check(df, phi, 0.05, p);
    CHECK(zero.max_ratio == 0.0);
    for (double l : zero.lhs) CHECK(l == 0.0);

    p.level = 0.0;
    p.time_intervals = 10;
    CHECK_THROWS_AS(cacciopoli_check(df, phi, 0.05, p), std::invalid_argument);
    p.time_intervals = 16;
    const CutoffFn wide = cutoff_linear(cg.graph(), x0, R, r);
    CHECK_THROWS_AS(cacciopoli_check(df, wide, 0.05, p), std::invalid_argument);
}

TEST_CASE("weak constants are dual") {
    const auto& cg = carpet3();
    const DirichletForm df = testutil::random_weighted_form(cg, 4);
    const VertexId x0 = cell(cg, 6, 4);
    const CutoffFn phi = cutoff_linear(cg.graph(), x0, 3.0, 6.0);
    const VertexSet u = cutoff_annulus(cg.graph(), phi);
    FamilySpec spec;
    spec.smooth_fields = 8;
    const auto fam = default_test_family(df, u, 2.0, spec).fields;
    const double psi_r = 36.0;
    for (double c1 : {0.001, 0.01, 0.1}) {
        const double c2 = weak_c2(df, phi, fam, u, psi_r, c1);
        CHECK(c2 >= 0.0);
        CHECK(weak_c1(df, phi, fam, u, psi_r, c2) <= c1 * (1.0 + 1e-9));
        CHECK(weak_c2(df, phi, fam, u, psi_r, 2.0 * c1) <= c2);
    }
}

TEST_CASE("stability under conductance perturbation") {
    const auto& cg = carpet3();
    const DirichletForm df(cg.graph_ptr());
    const VertexId x0 = cell(cg, 6, 4);
    const CutoffFn phi = cutoff_linear(cg.graph(), x0, 3.0, 6.0);
    const VertexSet u = cutoff_annulus(cg.graph(), phi);
    FamilySpec spec;
    spec.smooth_fields = 8;
    const auto fam = default_test_family(df, u, 3.6, spec).fields;
    const std::size_t ne = static_cast<std::size_t>(cg.graph().edge_count());

    const std::vector<double> ones(ne, 1.0);
    const StabilityReport same = stability_check(df, ones, 1.0, phi, fam, 36.0);
    CHECK(same.gamma_sandwich);
    CHECK(same.c2_original == same.c2_perturbed);
    CHECK(same.theta_original == same.theta_perturbed);
    CHECK(same.c1_ok);
    CHECK(same.c2_ok);

    // Uniform doubling scales every energy term exactly.
    const std::vector<double> twos(ne, 2.0);
    const DirichletForm doubled = df.with_conductance_factors(twos);
    CHECK(weak_c2(doubled, phi, fam, u, 36.0, 0.01) == doctest::Approx(2.0 * weak_c2(df, phi, fam, u, 36.0, 0.01)));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> e(-std::log(2.0), std::log(2.0));
    std::vector<double> random(ne);
    for (auto& f : random) f = std::exp(e(rng));
    const StabilityReport rep = stability_check(df, random, 2.0, phi, fam, 36.0);
    CHECK(rep.gamma_sandwich);
    CHECK(rep.c1_ok);
    CHECK(rep.c2_ok);
    CHECK(rep.c1_grid.size() == rep.c2_original.size());

    random[0] = 3.0;
    CHECK_THROWS_AS(stability_check(df, random, 2.0, phi, fam, 36.0), std::invalid_argument);
    CHECK_THROWS_AS(stability_check(df, ones, 0.5, phi, fam, 36.0), std::invalid_argument);
}
