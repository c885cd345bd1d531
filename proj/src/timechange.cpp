#include "carpetlab/timechange.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

#include "carpetlab/parallel.hpp"

namespace carpetlab {

namespace {

void check_origin(const Graph& g, const TimeChangeSpec& spec) {
    if (spec.origin < 0 || spec.origin >= g.size()) throw std::out_of_range("time change: origin out of range");
    if (!(spec.p >= 0.0)) throw std::invalid_argument("time change: p must be >= 0");
}

VertexField weights_from_dist(const std::vector<int>& dist, double p) {
    VertexField a(dist.size(), 1.0);
    for (std::size_t v = 0; v < dist.size(); ++v) {
        if (dist[v] > 1) a[v] = std::pow(static_cast<double>(dist[v]), p);
    }
    return a;
}

// Multi-source Dijkstra with edge weight (a(x)^{-1/2} + a(y)^{-1/2}) / 2.
std::vector<double> dijkstra(const Graph& g, const VertexField& a, const std::vector<VertexId>& sources) {
    std::vector<double> inv_sqrt(a.size());
    for (std::size_t v = 0; v < a.size(); ++v) inv_sqrt[v] = 1.0 / std::sqrt(a[v]);
    std::vector<double> dist(static_cast<std::size_t>(g.size()), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (VertexId s : sources) {
        dist[s] = 0.0;
        heap.emplace(0.0, s);
    }
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (VertexId w : g.neighbors(v)) {
            const double nd = d + 0.5 * (inv_sqrt[v] + inv_sqrt[w]);
            if (nd < dist[w]) {
                dist[w] = nd;
                heap.emplace(nd, w);
            }
        }
    }
    return dist;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

VertexField time_change_weights(const Graph& g, const TimeChangeSpec& spec) {
    check_origin(g, spec);
    return weights_from_dist(bfs_distances(g, spec.origin), spec.p);
}

DirichletForm time_changed_form(const DirichletForm& df, const TimeChangeSpec& spec) {
    const VertexField a = time_change_weights(df.graph(), spec);
    std::vector<double> m = df.measure();
    for (std::size_t v = 0; v < m.size(); ++v) m[v] /= a[v];
    return df.with_measure(std::move(m));
}

std::vector<double> rho_a_distances(const Graph& g, const TimeChangeSpec& spec) {
    return dijkstra(g, time_change_weights(g, spec), {spec.origin});
}

std::vector<double> rho_a_metric(const Graph& g, const TimeChangeSpec& spec, const std::vector<VertexId>& targets) {
    const auto all = rho_a_distances(g, spec);
    std::vector<double> out;
    for (VertexId t : targets) {
        if (t < 0 || t >= g.size()) throw std::out_of_range("rho_a: target out of range");
        out.push_back(all[t]);
    }
    return out;
}

SequenceTrend classify_increments(std::vector<double> values, double converge_ratio, double diverge_ratio) {
    SequenceTrend s;
    s.values = std::move(values);
    for (std::size_t i = 1; i < s.values.size(); ++i) s.increments.push_back(s.values[i] - s.values[i - 1]);
    for (std::size_t i = 1; i < s.increments.size(); ++i) {
        const double prev = s.increments[i - 1];
        s.ratios.push_back(prev != 0.0 ? s.increments[i] / prev : std::numeric_limits<double>::infinity());
    }
    s.label = "inconclusive";
    if (!s.ratios.empty()) {
        const bool conv = std::all_of(s.ratios.begin(), s.ratios.end(),
                                      [&](double r) { return r >= 0.0 && r <= converge_ratio; });
        const bool div = std::all_of(s.ratios.begin(), s.ratios.end(), [&](double r) { return r >= diverge_ratio; });
        if (conv) s.label = "convergent";
        if (div) s.label = "divergent";
    }
    return s;
}

RhoShellReport rho_shell_scan(const Graph& g, const TimeChangeSpec& spec, const std::vector<double>& radii) {
    check_origin(g, spec);
    if (radii.size() < 2) throw std::invalid_argument("rho shell scan: need at least 2 radii");
    const auto d = bfs_distances(g, spec.origin);
    const int ecc = *std::max_element(d.begin(), d.end());
    const VertexField a = weights_from_dist(d, spec.p);
    RhoShellReport rep;
    rep.predicted_exponent = 1.0 - spec.p / 2.0;
    for (double R : radii) {
        const int r1 = static_cast<int>(std::lround(R));
        const int r2 = 2 * r1;
        if (r1 < 1 || r2 > ecc) throw std::invalid_argument("rho shell scan: radius outside the graph");
        std::vector<VertexId> src;
        for (VertexId v = 0; v < g.size(); ++v) {
            if (d[v] == r1) src.push_back(v);
        }
        const auto rho = dijkstra(g, a, src);
        double best = std::numeric_limits<double>::infinity();
        for (VertexId v = 0; v < g.size(); ++v) {
            if (d[v] == r2) best = std::min(best, rho[v]);
        }
        rep.radii.push_back(r1);
        rep.shell_distance.push_back(best);
    }
    rep.fit = loglog_fit(rep.radii, rep.shell_distance);
    return rep;
}

SequenceTrend rho_truncation_sweep(int dim, const std::vector<int>& generations, double p, std::int64_t cell_budget) {
    std::vector<double> values;
    for (int n : generations) {
        const CarpetGraph cg = build_precarpet({dim, n}, cell_budget);
        const auto rho = rho_a_distances(cg.graph(), {p, cg.origin()});
        double best = std::numeric_limits<double>::infinity();
        for (VertexId v : cg.far_shell()) best = std::min(best, rho[v]);
        values.push_back(best);
    }
    return classify_increments(std::move(values));
}

MaProfile ma_profile(const DirichletForm& df, const TimeChangeSpec& spec, const std::vector<double>& rho_radii) {
    const Graph& g = df.graph();
    const VertexField a = time_change_weights(g, spec);
    const auto rho = dijkstra(g, a, {spec.origin});
    MaProfile prof;
    prof.rho_radii = rho_radii;
    for (VertexId v = 0; v < g.size(); ++v) prof.total += df.measure()[v] / a[v];
    for (double r : rho_radii) {
        double s = 0.0;
        for (VertexId v = 0; v < g.size(); ++v) {
            if (rho[v] <= r) s += df.measure()[v] / a[v];
        }
        prof.ball_measure.push_back(s);
    }
    return prof;
}

SequenceTrend ma_total_sweep(int dim, const std::vector<int>& generations, double p, std::int64_t cell_budget) {
    std::vector<double> values;
    for (int n : generations) {
        const CarpetGraph cg = build_precarpet({dim, n}, cell_budget);
        const VertexField a = time_change_weights(cg.graph(), {p, cg.origin()});
        double s = 0.0;
        for (VertexId v = 0; v < cg.size(); ++v) s += cg.graph().measure()[v] / a[v];
        values.push_back(s);
    }
    return classify_increments(std::move(values));
}

const char* to_string(VgcVerdict v) {
    switch (v) {
        case VgcVerdict::holds: return "holds";
        case VgcVerdict::fails: return "fails";
        case VgcVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

VgcReport vgc_classify(const CarpetGraph& cg, const TimeChangeSpec& spec, double delta, double mass_band) {
    const Graph& g = cg.graph();
    check_origin(g, spec);
    const auto d = bfs_distances(g, spec.origin);
    const VertexField a = weights_from_dist(d, spec.p);
    const auto rho = dijkstra(g, a, {spec.origin});
    const int complete = static_cast<int>(cg.side()) - 1;  // levels unaffected by the truncation
    VgcReport rep;

    // Per-level increments of min rho over {d = k}.
    std::vector<double> level(static_cast<std::size_t>(complete) + 1, std::numeric_limits<double>::infinity());
    for (VertexId v = 0; v < g.size(); ++v) {
        if (d[v] <= complete) level[d[v]] = std::min(level[d[v]], rho[v]);
    }
    std::vector<double> ks, inc;
    for (int k = 3; k + 1 <= complete; ++k) {
        ks.push_back(k + 0.5);
        inc.push_back(level[k + 1] - level[k]);
    }
    if (ks.size() < 3) {
        rep.reason = "truncation too small to fit the intrinsic radius growth";
        return rep;
    }
    rep.rho_exponent = 1.0 + loglog_fit(ks, inc).exponent;
    rep.rho_bounded = rep.rho_exponent < -delta;

    // m_a over triadic shells [3^j, 3^{j+1}).
    std::vector<double> rs, ms;
    for (std::int64_t lo = 3; 3 * lo <= complete + 1; lo *= 3) {
        double s = 0.0;
        for (VertexId v = 0; v < g.size(); ++v) {
            if (d[v] >= lo && d[v] < 3 * lo) s += g.measure()[v] / a[v];
        }
        rs.push_back(static_cast<double>(lo));
        ms.push_back(s);
    }
    if (rs.size() >= 2) {
        rep.mass_exponent = loglog_fit(rs, ms).exponent;
        rep.mass_regime = rep.mass_exponent > mass_band ? "infinite" : rep.mass_exponent < -mass_band ? "finite" : "undetermined";
    } else {
        rep.mass_regime = "undetermined";
    }

    // Truncated integral of r / log m_a(B_rho(0, r)) where the logarithm is positive.
    std::vector<std::pair<double, double>> pts;
    for (VertexId v = 0; v < g.size(); ++v) pts.emplace_back(rho[v], g.measure()[v] / a[v]);
    std::sort(pts.begin(), pts.end());
    rep.rho_max = pts.back().first;
    const int steps = 2000;
    std::size_t idx = 0;
    double mass = 0.0, prev = 0.0;
    const double h = (rep.rho_max - 1.0) / steps;
    for (int i = 0; i <= steps && h > 0.0; ++i) {
        const double r = 1.0 + i * h;
        while (idx < pts.size() && pts[idx].first <= r) mass += pts[idx++].second;
        const double lg = std::log(mass);
        const double f = lg > 0.0 ? r / lg : 0.0;
        if (i > 0) rep.integral += 0.5 * h * (f + prev);
        prev = f;
    }

    if (!rep.rho_bounded) {
        rep.verdict = VgcVerdict::holds;
        rep.reason = "intrinsic radius unbounded";
    } else if (rep.mass_regime == "infinite") {
        rep.verdict = VgcVerdict::fails;
        rep.reason = "finite intrinsic radius with infinite total m_a";
    } else if (rep.mass_regime == "finite") {
        rep.verdict = VgcVerdict::holds;
        rep.reason = "finite intrinsic radius with finite total m_a";
    } else {
        rep.reason = "finite intrinsic radius but total m_a undetermined";
    }
    return rep;
}

GreenColumns green_columns(int dim, const std::vector<int>& generations, std::int64_t cell_budget,
                           const SolverOptions& opts) {
    if (dim < 3) {
        throw std::invalid_argument(
            "a_infty_green needs dim >= 3: the planar carpet is recurrent and the Green sums diverge for every p");
    }
    if (generations.empty()) throw std::invalid_argument("a_infty_green: empty sweep");
    GreenColumns cols;
    cols.dim = dim;
    cols.generations = generations;
    for (int n : generations) {
        const CarpetGraph cg = build_precarpet({dim, n}, cell_budget);
        const DirichletForm df(cg.graph_ptr());
        const VertexSet dom = complement(cg.graph(), cg.far_shell());
        const VertexField g = green_column(df, dom, cg.origin(), opts);
        VertexField gm(g.size(), 0.0);
        double tau = 0.0;
        for (VertexId v : dom) {
            gm[v] = g[v] * df.measure()[v];
            tau += gm[v];
        }
        cols.green_mass.push_back(std::move(gm));
        cols.distance.push_back(bfs_distances(cg.graph(), cg.origin()));
        cols.exit_times.push_back(tau);
    }
    for (std::size_t k = 1; k < cols.exit_times.size(); ++k) {
        const double steps = generations[k] - generations[k - 1];
        cols.walk_dimension.push_back(std::log(cols.exit_times[k] / cols.exit_times[k - 1]) / (steps * std::log(3.0)));
    }
    return cols;
}

GreenSweep a_infty_sums(const GreenColumns& cols, const std::vector<double>& ps) {
    if (ps.empty()) throw std::invalid_argument("a_infty_green: empty sweep");
    GreenSweep sw;
    sw.dim = cols.dim;
    sw.generations = cols.generations;
    sw.ps = ps;
    sw.exit_times = cols.exit_times;
    sw.walk_dimension = cols.walk_dimension;
    sw.sums.assign(ps.size(), {});
    for (std::size_t k = 0; k < cols.green_mass.size(); ++k) {
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const VertexField a = weights_from_dist(cols.distance[k], ps[i]);
            double s = 0.0;
            for (std::size_t v = 0; v < a.size(); ++v) s += cols.green_mass[k][v] / a[v];
            sw.sums[i].push_back(s);
        }
    }
    for (const auto& s : sw.sums) sw.trends.push_back(classify_increments(s));
    return sw;
}

GreenSweep a_infty_green(int dim, const std::vector<int>& generations, const std::vector<double>& ps,
                         std::int64_t cell_budget, const SolverOptions& opts) {
    if (ps.empty()) throw std::invalid_argument("a_infty_green: empty sweep");
    return a_infty_sums(green_columns(dim, generations, cell_budget, opts), ps);
}

McReport a_infty_mc(const DirichletForm& df, const TimeChangeSpec& spec, int walkers, const std::vector<double>& shells,
                    std::uint64_t seed, int threads) {
    const Graph& g = df.graph();
    check_origin(g, spec);
    if (walkers < 1) throw std::invalid_argument("a_infty_mc: need at least one walker");
    if (shells.empty()) throw std::invalid_argument("a_infty_mc: no shells");
    std::vector<double> radii = shells;
    std::sort(radii.begin(), radii.end());
    const auto d = bfs_distances(g, spec.origin);
    const int ecc = *std::max_element(d.begin(), d.end());
    if (radii.back() > ecc) throw std::invalid_argument("a_infty_mc: shell beyond the graph");
    const VertexField a = weights_from_dist(d, spec.p);
    std::vector<double> rate(static_cast<std::size_t>(g.size()));
    for (VertexId v = 0; v < g.size(); ++v) rate[v] = df.weighted_degree(v) / df.measure()[v];

    McReport rep;
    rep.walkers = walkers;
    rep.seed = seed;
    rep.shells.resize(radii.size());
    for (std::size_t j = 0; j < radii.size(); ++j) {
        rep.shells[j].radius = radii[j];
        rep.shells[j].accumulated.assign(static_cast<std::size_t>(walkers), 0.0);
    }
    parallel_for(walkers, threads, [&](int w) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(w))));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        VertexId x = spec.origin;
        double acc = 0.0;
        std::size_t next = 0;
        while (next < radii.size()) {
            while (next < radii.size() && d[x] >= radii[next]) rep.shells[next++].accumulated[w] = acc;
            if (next == radii.size()) break;
            const double hold = -std::log1p(-unif(rng)) / rate[x];
            acc += hold / a[x];
            const auto nb = g.neighbors(x);
            const auto ids = g.incident_edges(x);
            double target = unif(rng) * df.weighted_degree(x);
            std::size_t k = 0;
            for (; k + 1 < nb.size(); ++k) {
                target -= df.conductances()[ids[k]];
                if (target < 0.0) break;
            }
            x = nb[k];
        }
    });
    std::vector<double> medians;
    for (auto& s : rep.shells) {
        s.median = quantile(s.accumulated, 0.5);
        s.q10 = quantile(s.accumulated, 0.1);
        s.q90 = quantile(s.accumulated, 0.9);
        medians.push_back(s.median);
    }
    rep.median_trend = classify_increments(std::move(medians));
    return rep;
}

CriterionA criterion_a(const std::vector<double>& theta, const std::vector<double>& mass) {
    if (theta.size() != mass.size() || theta.empty()) throw std::invalid_argument("criterion a: length mismatch");
    CriterionA c;
    std::vector<double> n, logs;
    bool zero = false;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double s = theta[i] * mass[i] / std::pow(4.0, static_cast<double>(i + 1));
        c.sequence.push_back(s);
        if (s <= 0.0) {
            zero = true;
        } else {
            n.push_back(static_cast<double>(i + 1));
            logs.push_back(std::log(s));
        }
    }
    if (zero) {
        c.satisfied = true;
        return c;
    }
    if (n.size() >= 2) {
        c.log_slope = linear_fit(n, logs).exponent;
        c.satisfied = c.log_slope < 0.0 && c.sequence.back() < c.sequence.front();
    }
    return c;
}

CriterionB criterion_b(const std::vector<double>& theta, const std::vector<double>& mass) {
    if (theta.size() != mass.size() || theta.empty()) throw std::invalid_argument("criterion b: length mismatch");
    CriterionB c;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        c.theta_over_n2.push_back(theta[i] / (n * n));
        if (i >= 1) {
            const double ln = std::log(n);
            c.b_needed.push_back(std::log(std::max(mass[i], 1.0)) / (2.0 * ln * ln));
        }
    }
    auto not_above_earlier = [](const std::vector<double>& v) {
        if (v.size() < 2) return false;
        const double earlier = *std::max_element(v.begin(), v.end() - 1);
        return v.back() <= earlier * (1.0 + 1e-9);
    };
    c.satisfied = not_above_earlier(c.theta_over_n2) && not_above_earlier(c.b_needed);
    return c;
}

ScomReport scom_check(const DirichletForm& df, const ScalingFunction& sf, const TimeChangeSpec& spec,
                      double ring_ratio, int rings, const FamilySpec& family, double theta_growth_tol) {
    const Graph& g = df.graph();
    check_origin(g, spec);
    if (!(ring_ratio > 1.0)) throw std::invalid_argument("scom: ring ratio must exceed 1");
    if (rings < 1) throw std::invalid_argument("scom: need at least one ring");
    const auto d = bfs_distances(g, spec.origin);
    const int ecc = *std::max_element(d.begin(), d.end());
    if (std::pow(ring_ratio, rings + 1) > ecc) throw std::invalid_argument("scom: rings do not fit in the graph");
    const DirichletForm dfa = time_changed_form(df, spec);

    ScomReport rep;
    rep.ring_ratio = ring_ratio;
    for (int n = 1; n <= rings; ++n) {
        const double inner = std::pow(ring_ratio, n);
        const double outer = std::pow(ring_ratio, n + 1);
        // Linear cutoffs: at these ring widths they give the smaller CSD constant.
        const CutoffFn phi = cutoff_linear(g, spec.origin, inner, outer - inner);
        const VertexSet u = cutoff_annulus(g, phi);
        FamilySpec fs = family;
        fs.seed = family.seed + static_cast<std::uint64_t>(n);
        const auto fam = default_test_family(df, u, sf(outer - inner) / 10.0, fs);
        rep.radii.push_back(inner);
        rep.theta.push_back(csd_theta(dfa, phi, fam.fields, &u).theta_star);
        double m = 0.0;
        for (VertexId v = 0; v < g.size(); ++v) {
            if (d[v] > inner && d[v] <= outer) m += dfa.measure()[v];
        }
        rep.mass.push_back(m);
    }
    rep.a = criterion_a(rep.theta, rep.mass);
    rep.b = criterion_b(rep.theta, rep.mass);
    const bool positive = std::all_of(rep.theta.begin(), rep.theta.end(), [](double t) { return t > 0.0; });
    // The first ring sits at lattice scale; growth is judged from the rest.
    const std::size_t skip = rep.radii.size() >= 3 ? 1 : 0;
    if (rep.radii.size() - skip >= 2 && positive) {
        rep.theta_fit = loglog_fit(std::vector<double>(rep.radii.begin() + skip, rep.radii.end()),
                                   std::vector<double>(rep.theta.begin() + skip, rep.theta.end()));
        rep.theta_bounded = rep.theta_fit.exponent <= theta_growth_tol;
    }
    rep.classification = rings >= 3 && rep.theta_bounded && rep.a.satisfied ? "complete" : "inconclusive";
    return rep;
}

}  // namespace carpetlab
