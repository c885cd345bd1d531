#include "carpetlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "carpetlab/parallel.hpp"

namespace carpetlab {

namespace {

std::vector<double> volumes_by_radius(const Graph& g, VertexId x0, const std::vector<double>& measure) {
    if (x0 < 0 || x0 >= g.size()) throw std::out_of_range("center vertex out of range");
    const auto dist = bfs_distances(g, x0);
    int ecc = 0;
    for (int d : dist) ecc = std::max(ecc, d);
    std::vector<double> vol(static_cast<std::size_t>(ecc) + 1, 0.0);
    for (VertexId v = 0; v < g.size(); ++v) {
        if (dist[v] != kUnreached) vol[dist[v]] += measure[v];
    }
    for (std::size_t k = 1; k < vol.size(); ++k) vol[k] += vol[k - 1];
    return vol;
}

double volume_at(const std::vector<double>& vol, double r) {
    if (r < 1.0) return vol.front();
    const double k = std::floor(r);
    return k >= static_cast<double>(vol.size() - 1) ? vol.back() : vol[static_cast<std::size_t>(k)];
}

double total_measure(const DirichletForm& df) {
    double s = 0.0;
    for (double m : df.measure()) s += m;
    return s;
}

VertexField point_mass(const DirichletForm& df, VertexId x0) {
    VertexField f(static_cast<std::size_t>(df.size()), 0.0);
    f[x0] = 1.0 / df.measure()[x0];
    return f;
}

constexpr double kKernelTol = 1e-13;

}  // namespace

std::vector<double> volume_profile(const Graph& g, VertexId x0) { return volumes_by_radius(g, x0, g.measure()); }

FitReport volume_growth_fit(const Graph& g, VertexId x0, const std::vector<double>& radii) {
    const auto vol = volume_profile(g, x0);
    std::vector<double> v;
    for (double r : radii) {
        if (!(r >= 1.0)) throw std::invalid_argument("volume fit: radii must be >= 1");
        v.push_back(volume_at(vol, r));
    }
    return loglog_fit(radii, v);
}

FitReport fit_walk_dimension(const DirichletForm& df, VertexId x0, const std::vector<double>& radii,
                             const SolverOptions& opts) {
    std::vector<double> distinct = radii;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) throw std::invalid_argument("walk dimension: need at least 3 distinct radii");
    if (!(distinct.front() >= 1.0)) throw std::invalid_argument("walk dimension: radii must be >= 1");
    const Graph& g = df.graph();
    const int diam = diameter_estimate(g);
    if (distinct.back() > diam / 3.0) {
        throw std::invalid_argument("walk dimension: largest radius exceeds a third of the graph diameter (" +
                                    std::to_string(diam) + ")");
    }
    std::vector<double> tau;
    for (double r : distinct) tau.push_back(exit_time_solve(df, ball(g, x0, r).vertices, opts)[x0]);
    return loglog_fit(distinct, tau);
}

OndiagReport ondiag_fit(const DirichletForm& df, VertexId x0, const std::vector<double>& times) {
    if (x0 < 0 || x0 >= df.size()) throw std::out_of_range("ondiag: center out of range");
    if (times.empty()) throw std::invalid_argument("ondiag: no times");
    OndiagReport rep;
    rep.times = times;
    std::sort(rep.times.begin(), rep.times.end());
    if (!(rep.times.front() > 0.0)) throw std::invalid_argument("ondiag: times must be positive");
    rep.saturation = 1.0 / total_measure(df);
    VertexField u = point_mass(df, x0);
    double now = 0.0;
    std::vector<double> tw, pw;
    for (double t : rep.times) {
        if (t > now) u = heat_apply(df, Domain::all(), t - now, u, kKernelTol);
        now = t;
        const double p = u[x0];
        rep.density.push_back(p);
        const bool in = p >= 10.0 * rep.saturation;
        rep.in_window.push_back(in ? 1 : 0);
        if (in) {
            tw.push_back(t);
            pw.push_back(p);
        }
    }
    std::vector<double> distinct = tw;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) {
        throw std::invalid_argument("ondiag: pre-saturation window holds fewer than 2 times (graph too small)");
    }
    rep.fit = loglog_fit(tw, pw);
    return rep;
}

DgReport dg_check(const DirichletForm& df, const ScalingFunction& sf, const std::vector<DgPairSpec>& pairs,
                  int threads) {
    if (pairs.empty()) throw std::invalid_argument("dg: no pairs");
    const Graph& g = df.graph();
    DgReport rep;
    rep.pairs.resize(pairs.size());
    parallel_for(static_cast<int>(pairs.size()), threads, [&](int i) {
        const auto& spec = pairs[i];
        if (spec.x1 < 0 || spec.x1 >= g.size() || spec.x2 < 0 || spec.x2 >= g.size()) {
            throw std::out_of_range("dg: vertex out of range");
        }
        if (!(spec.t > 0.0)) throw std::invalid_argument("dg: t must be positive");
        const VertexId a = std::min(spec.x1, spec.x2), b = std::max(spec.x1, spec.x2);
        const int d = bfs_distances(g, a)[b];
        if (d == kUnreached || d == 0) throw std::invalid_argument("dg: points must be distinct and connected");
        const double R = d;
        const VertexSet ba = ball(g, a, R / 4.0).vertices;
        const VertexSet bb = ball(g, b, R / 4.0).vertices;
        const auto in_a = membership_mask(g.size(), ba);
        for (VertexId v : bb) {
            if (in_a[v]) throw std::invalid_argument("dg: support balls overlap");
        }
        VertexField ind(static_cast<std::size_t>(g.size()), 0.0);
        for (VertexId v : ba) ind[v] = 1.0;
        const VertexField u = heat_apply(df, Domain::all(), spec.t, ind, 1e-15);
        DgPair out;
        out.x1 = spec.x1;
        out.x2 = spec.x2;
        out.R = R;
        out.t = spec.t;
        double ma = 0.0, mb = 0.0;
        for (VertexId v : ba) ma += df.measure()[v];
        for (VertexId v : bb) {
            mb += df.measure()[v];
            out.overlap += std::max(0.0, u[v]) * df.measure()[v];
        }
        out.norm_bound = std::sqrt(ma * mb);
        out.phi_value = phi(sf, R, spec.t);
        rep.pairs[i] = out;
    });
    std::vector<double> x, y;
    for (const auto& p : rep.pairs) {
        if (p.overlap > 0.0) {
            x.push_back(p.phi_value);
            y.push_back(-std::log(p.overlap / p.norm_bound));
        } else {
            ++rep.excluded;
        }
    }
    if (x.size() >= 2) {
        rep.fit = linear_fit(x, y);
        rep.slope = rep.fit.exponent;
        rep.r_squared = rep.fit.r_squared;
    }
    return rep;
}

std::vector<UhkSample> heat_kernel_samples(const DirichletForm& df, VertexId x0,
                                           const std::vector<std::pair<VertexId, double>>& sample) {
    if (sample.empty()) throw std::invalid_argument("uhk: empty sample");
    if (x0 < 0 || x0 >= df.size()) throw std::out_of_range("uhk: center out of range");
    std::map<double, std::vector<std::size_t>> by_time;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (!(sample[i].second > 0.0)) throw std::invalid_argument("uhk: times must be positive");
        if (sample[i].first < 0 || sample[i].first >= df.size()) throw std::out_of_range("uhk: vertex out of range");
        by_time[sample[i].second].push_back(i);
    }
    const auto dist = bfs_distances(df.graph(), x0);
    const double window = 10.0 / total_measure(df);
    std::vector<UhkSample> out(sample.size());
    VertexField u = point_mass(df, x0);
    double now = 0.0;
    for (const auto& [t, idx] : by_time) {
        u = heat_apply(df, Domain::all(), t - now, u, kKernelTol);
        now = t;
        if (u[x0] < window) throw std::invalid_argument("uhk: time beyond the pre-saturation window");
        for (std::size_t i : idx) {
            const VertexId y = sample[i].first;
            out[i] = UhkSample{y, t, static_cast<double>(dist[y]), u[y]};
        }
    }
    return out;
}

double uhk_envelope(const std::vector<double>& volumes, const ScalingFunction& sf, double c1, double c2, double d,
                    double t) {
    return std::exp(-phi(sf, c2 * d, t)) / volume_at(volumes, sf.inverse(c1 * t));
}

UhkReport uhk_check(const DirichletForm& df, const ScalingFunction& sf, VertexId x0,
                    const std::vector<std::pair<VertexId, double>>& sample, int grid_points) {
    if (grid_points < 2) throw std::invalid_argument("uhk: grid needs at least 2 points");
    UhkReport rep;
    rep.samples = heat_kernel_samples(df, x0, sample);
    const auto vol = volumes_by_radius(df.graph(), x0, df.measure());
    std::vector<double> grid;
    for (int i = 0; i < grid_points; ++i) grid.push_back(std::pow(10.0, -2.0 + 4.0 * i / (grid_points - 1)));

    struct Score {
        double worst = -std::numeric_limits<double>::infinity();
        double gap = 0.0;
    };
    auto score = [&](double c1, double c2) {
        Score s;
        for (const auto& x : rep.samples) {
            const double env = uhk_envelope(vol, sf, c1, c2, x.distance, x.t);
            const double lr = x.density > 0.0 ? std::log(x.density / env) : -std::numeric_limits<double>::infinity();
            s.worst = std::max(s.worst, lr);
            s.gap += x.density > 0.0 ? -lr : 0.0;
        }
        s.gap /= static_cast<double>(rep.samples.size());
        return s;
    };

    bool found = false;
    double best_gap = std::numeric_limits<double>::infinity();
    double least_violation = std::numeric_limits<double>::infinity();
    double fallback_c1 = grid.front(), fallback_c2 = grid.front();
    for (double c2 : grid) {
        double c1_best = -1.0;
        Score at_best;
        for (double c1 : grid) {
            const Score s = score(c1, c2);
            if (s.worst <= 0.0) {
                c1_best = c1;
                at_best = s;
            }
            if (s.worst < least_violation) {
                least_violation = s.worst;
                fallback_c1 = c1;
                fallback_c2 = c2;
            }
        }
        if (c1_best > 0.0 && at_best.gap < best_gap) {
            best_gap = at_best.gap;
            rep.c1 = c1_best;
            rep.c2 = c2;
            found = true;
        }
    }
    if (!found) {
        rep.c1 = fallback_c1;
        rep.c2 = fallback_c2;
    }
    const Score s = score(rep.c1, rep.c2);
    rep.dominated = found;
    rep.max_violation = s.worst;
    rep.mean_log_gap = s.gap;
    return rep;
}

double uhk_violation_fraction(const DirichletForm& df, const ScalingFunction& sf, VertexId x0,
                              const std::vector<UhkSample>& samples, double c1, double c2) {
    if (samples.empty()) throw std::invalid_argument("uhk: empty sample");
    const auto vol = volumes_by_radius(df.graph(), x0, df.measure());
    int above = 0;
    for (const auto& s : samples) {
        if (s.density > uhk_envelope(vol, sf, c1, c2, s.distance, s.t)) ++above;
    }
    return static_cast<double>(above) / static_cast<double>(samples.size());
}

EscapeReport escape_prob_check(const DirichletForm& df, const ScalingFunction& sf, VertexId x0, double r,
                               const std::vector<double>& eps_grid) {
    if (eps_grid.empty()) throw std::invalid_argument("escape: empty eps grid");
    const Graph& g = df.graph();
    if (x0 < 0 || x0 >= g.size()) throw std::out_of_range("escape: center out of range");
    const VertexSet b = ball(g, x0, r).vertices;
    if (b.size() >= static_cast<std::size_t>(g.size())) throw std::invalid_argument("escape: ball covers the graph");
    EscapeReport rep;
    rep.r = r;
    rep.psi_r = sf(r);
    rep.eps = eps_grid;
    std::sort(rep.eps.begin(), rep.eps.end());
    if (rep.eps.front() < 0.0) throw std::invalid_argument("escape: eps must be >= 0");
    const Domain dom = Domain::of(b);
    VertexField u(static_cast<std::size_t>(g.size()), 0.0);
    for (VertexId v : b) u[v] = 1.0;
    double now = 0.0;
    bool ok = true;
    for (double e : rep.eps) {
        const double s = e * rep.psi_r;
        if (s > now) u = heat_apply(df, dom, s - now, u, 1e-12);
        now = s;
        const double p = std::clamp(1.0 - u[x0], 0.0, 1.0);
        rep.probability.push_back(p);
        ok = ok && p <= e;
        if (ok) rep.admissible_eps = e;
    }
    return rep;
}

}  // namespace carpetlab
