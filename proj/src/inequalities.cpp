#include "carpetlab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "carpetlab/errors.hpp"
#include "carpetlab/parallel.hpp"

namespace carpetlab {

namespace {

constexpr double kGammaTol = 1e-12;

std::vector<int> distances_within(const Graph& g, VertexId x0, double reach) {
    if (x0 < 0 || x0 >= g.size()) throw std::out_of_range("cutoff: center out of range");
    const int limit = reach >= g.size() ? -1 : static_cast<int>(std::ceil(reach)) + 1;
    return bfs_distances(g, x0, limit);
}

void fill_balls(CutoffFn& phi, const std::vector<int>& dist) {
    for (std::size_t v = 0; v < dist.size(); ++v) {
        if (dist[v] == kUnreached) continue;
        if (dist[v] <= phi.R) phi.inner.push_back(static_cast<VertexId>(v));
        if (dist[v] < phi.R + phi.r) phi.outer.push_back(static_cast<VertexId>(v));
    }
}

// Gamma(f,f) at vertex x.
double gamma_at(const DirichletForm& df, std::span<const double> f, VertexId x) {
    const Graph& g = df.graph();
    const auto nb = g.neighbors(x);
    const auto ids = g.incident_edges(x);
    double s = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) {
        const double d = f[x] - f[nb[k]];
        s += df.conductances()[ids[k]] * d * d;
    }
    return 0.5 * s;
}

// Per-field integrals over the annulus used by the cutoff-Sobolev checks.
struct AnnulusIntegrals {
    double f2_gamma_phi = 0.0;    // sum_U f^2 Gamma(phi)
    double phi2_gamma_f = 0.0;    // sum_U phi^2 Gamma(f)
    double gamma_f = 0.0;         // sum_U Gamma(f)
    double f2_m = 0.0;            // sum_U f^2 m
};

std::vector<AnnulusIntegrals> annulus_integrals(const DirichletForm& df, const CutoffFn& phi,
                                                const std::vector<VertexField>& family, const VertexSet& annulus) {
    std::vector<double> gphi(annulus.size());
    for (std::size_t i = 0; i < annulus.size(); ++i) gphi[i] = gamma_at(df, phi.values, annulus[i]);
    std::vector<AnnulusIntegrals> out(family.size());
    for (std::size_t j = 0; j < family.size(); ++j) {
        const auto& f = family[j];
        if (f.size() != static_cast<std::size_t>(df.size())) {
            throw std::invalid_argument("test field length does not match vertex count");
        }
        auto& a = out[j];
        for (std::size_t i = 0; i < annulus.size(); ++i) {
            const VertexId x = annulus[i];
            const double gf = gamma_at(df, f, x);
            a.f2_gamma_phi += f[x] * f[x] * gphi[i];
            a.phi2_gamma_f += phi.values[x] * phi.values[x] * gf;
            a.gamma_f += gf;
            a.f2_m += f[x] * f[x] * df.measure()[x];
        }
    }
    return out;
}

VertexSet hop_neighbourhood(const Graph& g, const VertexSet& set, int hops) {
    const auto dist = bfs_distances(g, std::span<const VertexId>(set), hops);
    VertexSet out;
    for (VertexId v = 0; v < g.size(); ++v) {
        if (dist[v] != kUnreached) out.push_back(v);
    }
    return out;
}

double form_measure(const DirichletForm& df, const VertexSet& set) {
    double s = 0.0;
    for (VertexId v : set) s += df.measure()[v];
    return s;
}

// Composite Simpson on an even number of equal steps.
double simpson(const std::vector<double>& y, std::size_t lo, std::size_t hi, double h) {
    double s = y[lo] + y[hi];
    for (std::size_t i = lo + 1; i < hi; ++i) s += ((i - lo) % 2 == 1 ? 4.0 : 2.0) * y[i];
    return s * h / 3.0;
}

}  // namespace

const char* to_string(CutoffKind kind) {
    switch (kind) {
        case CutoffKind::linear: return "linear";
        case CutoffKind::resolvent: return "resolvent";
        case CutoffKind::improved: return "improved";
        case CutoffKind::covermax: return "covermax";
    }
    return "unknown";
}

CutoffFn cutoff_linear(const Graph& g, VertexId x0, double R, double r) {
    if (!(R >= 0.0) || !(r >= 1.0)) throw std::invalid_argument("linear cutoff needs R >= 0 and r >= 1");
    const auto dist = distances_within(g, x0, R + r);
    CutoffFn phi;
    phi.kind = CutoffKind::linear;
    phi.center = x0;
    phi.R = R;
    phi.r = r;
    phi.values.assign(static_cast<std::size_t>(g.size()), 0.0);
    for (VertexId v = 0; v < g.size(); ++v) {
        if (dist[v] == kUnreached) continue;
        phi.values[v] = std::clamp((R + r - dist[v]) / r, 0.0, 1.0);
    }
    fill_balls(phi, dist);
    return phi;
}

CutoffFn cutoff_resolvent(const DirichletForm& df, const ScalingFunction& sf, VertexId x0, double R, double r,
                          double c1) {
    if (!(R >= 0.0)) throw std::invalid_argument("resolvent cutoff needs R >= 0");
    if (!(r >= 10.0)) {
        throw std::invalid_argument("resolvent cutoff needs annulus width r >= 10; use the linear cutoff for narrower annuli");
    }
    const Graph& g = df.graph();
    const auto dist = distances_within(g, x0, R + r);
    const VertexSet d0 = open_annulus(dist, R + r / 10.0, R + 9.0 * r / 10.0);
    const VertexSet d1 = open_annulus(dist, R + r / 5.0, R + 4.0 * r / 5.0);
    const VertexSet d2 = open_annulus(dist, R + 2.0 * r / 5.0, R + 3.0 * r / 5.0);
    if (d0.empty() || d1.empty() || d2.empty()) {
        throw std::invalid_argument("resolvent cutoff: annulus is empty in this graph (R + r exceeds the graph radius?)");
    }
    const double psi_r = sf(r);
    VertexField rhs(static_cast<std::size_t>(g.size()), 0.0);
    for (VertexId v : d1) rhs[v] = 1.0;
    const VertexField h = resolvent_solve(df, d0, 1.0 / psi_r, rhs);

    if (!(c1 > 0.0)) {
        double hmin = std::numeric_limits<double>::infinity();
        for (VertexId v : d2) hmin = std::min(hmin, h[v]);
        if (!(hmin > 0.0)) throw std::logic_error("resolvent cutoff: h vanishes on the middle annulus");
        c1 = psi_r / hmin;
    }
    CutoffFn phi;
    phi.kind = CutoffKind::resolvent;
    phi.center = x0;
    phi.R = R;
    phi.r = r;
    phi.calibration = c1;
    phi.values.assign(static_cast<std::size_t>(g.size()), 0.0);
    for (VertexId v = 0; v < g.size(); ++v) {
        if (dist[v] == kUnreached) continue;
        phi.values[v] = dist[v] <= R + r / 2.0 ? 1.0 : std::min(1.0, c1 * h[v] / psi_r);
    }
    fill_balls(phi, dist);
    return phi;
}

CutoffFn cutoff_improve(const DirichletForm& df, const ScalingFunction& sf, VertexId x0, double R, double r,
                        const CutoffBuilder& weak, double c1) {
    if (!(c1 >= 0.0)) throw std::invalid_argument("improved cutoff: c1 must be >= 0");
    const double lambda = c1 > 0.0 ? std::log(1.0 + std::sqrt(1.0 / (8.0 * c1))) : 1.0;
    const double beta2 = sf.beta2();
    const double c0 = std::exp(lambda / beta2) - 1.0;  // makes sum_{n>=1} s_n = r

    // Shell outer radii R + r_n; the last accepted shell absorbs the rest.
    std::vector<double> radii{R};
    double acc = 0.0;
    for (int n = 1; n < 10000; ++n) {
        const double s = c0 * r * std::exp(-n * lambda / beta2);
        if (s < weak.min_width || s < 1.0) break;
        acc += s;
        radii.push_back(R + acc);
    }
    const int shells = static_cast<int>(radii.size()) - 1;
    if (shells < 2) {
        CutoffFn phi = weak.build(x0, R, r);
        phi.kind = CutoffKind::improved;
        phi.lambda = lambda;
        phi.shells = 1;
        phi.fallback = true;
        return phi;
    }
    radii.back() = R + r;

    CutoffFn phi;
    phi.kind = CutoffKind::improved;
    phi.center = x0;
    phi.R = R;
    phi.r = r;
    phi.lambda = lambda;
    phi.shells = shells;
    phi.values.assign(static_cast<std::size_t>(df.size()), 0.0);
    for (int n = 1; n <= shells; ++n) {
        const double b_prev = std::exp(-(n - 1) * lambda);
        const double b_n = n == shells ? 0.0 : std::exp(-n * lambda);
        const CutoffFn piece = weak.build(x0, radii[n - 1], radii[n] - radii[n - 1]);
        for (VertexId v = 0; v < df.size(); ++v) phi.values[v] += (b_prev - b_n) * piece.values[v];
    }
    for (auto& v : phi.values) v = std::clamp(v, 0.0, 1.0);
    fill_balls(phi, distances_within(df.graph(), x0, R + r));
    return phi;
}

CutoffFn cutoff_cover_max(const DirichletForm& df, VertexId x0, double R, double r, const CutoffBuilder& ball_builder) {
    if (!(R >= 0.0) || !(r > 0.0)) throw std::invalid_argument("cover-max cutoff needs R >= 0 and r > 0");
    const double r0 = r / 3.0;
    if (r0 < ball_builder.min_width) {
        throw std::invalid_argument("cover-max cutoff: r/3 is below the ball builder's minimum width");
    }
    const Graph& g = df.graph();
    const auto dist = distances_within(g, x0, R + r);

    // Greedy maximal packing of B(x0, R): centres at mutual distance >= r0,
    // visited in order of distance from x0.
    std::vector<VertexId> order;
    for (VertexId v = 0; v < g.size(); ++v) {
        if (dist[v] != kUnreached && dist[v] <= R) order.push_back(v);
    }
    std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return dist[a] < dist[b]; });
    const int block_radius = static_cast<int>(std::ceil(r0)) - 1;
    std::vector<char> blocked(static_cast<std::size_t>(g.size()), 0);
    std::vector<VertexId> centers;
    for (VertexId v : order) {
        if (blocked[v]) continue;
        centers.push_back(v);
        const auto d = bfs_distances(g, v, block_radius);
        for (VertexId w = 0; w < g.size(); ++w) {
            if (d[w] != kUnreached) blocked[w] = 1;
        }
    }

    CutoffFn phi;
    phi.kind = CutoffKind::covermax;
    phi.center = x0;
    phi.R = R;
    phi.r = r;
    phi.pieces = static_cast<int>(centers.size());
    phi.values.assign(static_cast<std::size_t>(g.size()), 0.0);
    std::vector<double> gamma_sum(static_cast<std::size_t>(g.size()), 0.0);
    std::vector<int> cover_count(static_cast<std::size_t>(g.size()), 0);
    for (VertexId z : centers) {
        const CutoffFn piece = ball_builder.build(z, r0, r0);
        const auto gp = gamma_bilinear(df, piece.values, piece.values);
        for (VertexId v = 0; v < g.size(); ++v) {
            phi.values[v] = std::max(phi.values[v], piece.values[v]);
            gamma_sum[v] += gp[v];
            if (piece.values[v] > 0.0) ++cover_count[v];
        }
    }
    const auto gphi = gamma_bilinear(df, phi.values, phi.values);
    for (VertexId v = 0; v < g.size(); ++v) {
        if (gphi[v] > gamma_sum[v] * (1.0 + kGammaTol) + kGammaTol) phi.gamma_dominated = false;
        phi.overlap = std::max(phi.overlap, cover_count[v]);
    }
    fill_balls(phi, dist);
    return phi;
}

CutoffBuilder linear_builder(const Graph& g) {
    return CutoffBuilder{[&g](VertexId x, double R, double r) { return cutoff_linear(g, x, R, r); }, 1.0, "linear"};
}

CutoffBuilder resolvent_builder(const DirichletForm& df, const ScalingFunction& sf) {
    return CutoffBuilder{
        [&df, sf](VertexId x, double R, double r) { return cutoff_resolvent(df, sf, x, R, r); }, 10.0, "resolvent"};
}

CutoffBuilder auto_builder(const DirichletForm& df, const ScalingFunction& sf) {
    return CutoffBuilder{[&df, sf](VertexId x, double R, double r) {
                             return r >= 10.0 ? cutoff_resolvent(df, sf, x, R, r) : cutoff_linear(df.graph(), x, R, r);
                         },
                         1.0, "auto"};
}

VertexSet cutoff_annulus(const Graph& g, const CutoffFn& phi) {
    if (phi.values.size() != static_cast<std::size_t>(g.size())) {
        throw std::invalid_argument("cutoff length does not match vertex count");
    }
    VertexSet out;
    for (VertexId v = 0; v < g.size(); ++v) {
        const double p = phi.values[v];
        bool transition = p > 0.0 && p < 1.0;
        for (VertexId w : g.neighbors(v)) {
            if (transition) break;
            transition = phi.values[w] != p;
        }
        if (transition) out.push_back(v);
    }
    return out;
}

TestFamily default_test_family(const DirichletForm& df, const VertexSet& annulus, double smoothing_time,
                               const FamilySpec& spec) {
    if (annulus.empty()) throw std::invalid_argument("test family: empty annulus");
    const Graph& g = df.graph();
    const std::size_t n = static_cast<std::size_t>(g.size());
    std::mt19937_64 rng(spec.seed);
    TestFamily fam;
    auto add = [&](VertexField f, std::string label) {
        fam.fields.push_back(std::move(f));
        fam.labels.push_back(std::move(label));
    };

    add(VertexField(n, 1.0), "constant");
    if (g.has_coords()) {
        for (int i = 0; i < g.coord_dim(); ++i) {
            double mean = 0.0;
            for (VertexId v : annulus) mean += g.coords(v)[i];
            mean /= static_cast<double>(annulus.size());
            VertexField f(n);
            for (VertexId v = 0; v < g.size(); ++v) f[v] = g.coords(v)[i] - mean;
            add(std::move(f), "coordinate_" + std::to_string(i));
        }
    }

    const VertexSet near = hop_neighbourhood(g, annulus, 2);
    if (spec.eigenvectors > 0 && near.size() < n) {
        try {
            const auto modes = lowest_dirichlet_modes(df, near, spec.eigenvectors);
            for (std::size_t k = 0; k < modes.eigenvectors.size(); ++k) {
                add(modes.eigenvectors[k], "dirichlet_mode_" + std::to_string(k));
            }
        } catch (const SingularSystem&) {
        }
    }

    if (spec.harmonic > 0 && annulus.size() < n) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int k = 0; k < spec.harmonic; ++k) {
            VertexField noise(n);
            for (auto& v : noise) v = u(rng);
            try {
                add(harmonic_extension(df, annulus, noise), "harmonic_" + std::to_string(k));
            } catch (const SingularSystem&) {
                break;
            }
        }
    }

    if (spec.smooth_fields > 0) {
        const int pad = static_cast<int>(std::ceil(2.0 * std::sqrt(std::max(smoothing_time, 0.0)))) + 1;
        const VertexSet region = hop_neighbourhood(g, annulus, pad);
        const Domain dom = region.size() == n ? Domain::all() : Domain::of(region);
        std::normal_distribution<double> gauss;
        std::vector<VertexField> noise(static_cast<std::size_t>(spec.smooth_fields), VertexField(n, 0.0));
        for (auto& f : noise) {
            for (VertexId v : region) f[v] = gauss(rng);
        }
        auto smooth = smoothing_time > 0.0 ? heat_apply_many(df, dom, smoothing_time, noise, 1e-8) : noise;
        for (std::size_t k = 0; k < smooth.size(); ++k) add(std::move(smooth[k]), "smoothed_noise_" + std::to_string(k));
    }
    return fam;
}

CsdReport csd_theta(const DirichletForm& df, const CutoffFn& phi, const std::vector<VertexField>& family,
                    const VertexSet* annulus) {
    if (family.empty()) throw std::invalid_argument("csd: empty test family");
    const VertexSet u = annulus ? *annulus : cutoff_annulus(df.graph(), phi);
    if (u.empty()) throw std::invalid_argument("csd: empty annulus");
    CsdReport rep;
    rep.R = phi.R;
    rep.r = phi.r;
    rep.center = phi.center;
    rep.family_size = static_cast<int>(family.size());
    rep.annulus_size = static_cast<int>(u.size());
    const auto ints = annulus_integrals(df, phi, family, u);
    for (std::size_t j = 0; j < ints.size(); ++j) {
        const auto& a = ints[j];
        if (!(a.f2_m > 0.0)) continue;
        const double theta = std::max(0.0, a.f2_gamma_phi - a.phi2_gamma_f / 8.0) / a.f2_m;
        if (theta > rep.theta_star) {
            rep.theta_star = theta;
            rep.argmax = static_cast<int>(j);
        }
    }
    return rep;
}

CsaScan csa_scan(const DirichletForm& df, const ScalingFunction& sf, const std::vector<VertexId>& centers,
                 const std::vector<double>& inner_radii, const std::vector<double>& widths, const CutoffBuilder& builder,
                 const FamilySpec& family, int threads) {
    if (centers.empty() || inner_radii.empty() || widths.empty()) throw std::invalid_argument("csa scan: empty grid");
    struct Cell {
        VertexId c;
        double R, r;
    };
    std::vector<Cell> cells;
    for (VertexId c : centers) {
        for (double R : inner_radii) {
            for (double r : widths) cells.push_back({c, R, r});
        }
    }
    CsaScan scan;
    scan.reports.resize(cells.size());
    parallel_for(static_cast<int>(cells.size()), threads, [&](int i) {
        const Cell& cell = cells[i];
        const CutoffFn phi = builder.build(cell.c, cell.R, cell.r);
        const VertexSet u = cutoff_annulus(df.graph(), phi);
        FamilySpec fs = family;
        fs.seed = family.seed + 7919ULL * static_cast<std::uint64_t>(i);
        const auto fam = default_test_family(df, u, sf(cell.r) / 10.0, fs);
        scan.reports[i] = csd_theta(df, phi, fam.fields, &u);
    });

    scan.widths = widths;
    std::sort(scan.widths.begin(), scan.widths.end());
    scan.widths.erase(std::unique(scan.widths.begin(), scan.widths.end()), scan.widths.end());
    for (double r : scan.widths) {
        double tmax = 0.0;
        for (const auto& rep : scan.reports) {
            if (rep.r == r) tmax = std::max(tmax, rep.theta_star);
        }
        scan.theta_max.push_back(tmax);
        scan.cs_per_width.push_back(tmax * sf(r));
    }
    scan.cs_estimate = *std::max_element(scan.cs_per_width.begin(), scan.cs_per_width.end());
    const double cs_min = *std::min_element(scan.cs_per_width.begin(), scan.cs_per_width.end());
    scan.cs_spread = cs_min > 0.0 ? scan.cs_estimate / cs_min : std::numeric_limits<double>::infinity();
    const bool fittable = scan.widths.size() >= 2 &&
                          std::all_of(scan.theta_max.begin(), scan.theta_max.end(), [](double t) { return t > 0.0; });
    if (fittable) scan.fit = loglog_fit(scan.widths, scan.theta_max);
    return scan;
}

FkReport fk_scan(const DirichletForm& df, const ScalingFunction& sf, double nu, int samples, std::uint64_t seed,
                 const std::vector<double>& radii, int threads) {
    if (!(nu > 0.0)) throw std::invalid_argument("fk scan: nu must be positive");
    if (samples <= 0 || radii.empty()) throw std::invalid_argument("fk scan: empty sample");
    const Graph& g = df.graph();

    // Draw every random choice up front so results do not depend on threads.
    struct Plan {
        VertexId center;
        double r;
        int kind;
        std::uint64_t seed;
    };
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<VertexId> pick(0, g.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_r(0, radii.size() - 1);
    std::vector<Plan> plans;
    for (int i = 0; i < samples; ++i) plans.push_back({pick(rng), radii[pick_r(rng)], i % 3, rng()});

    FkReport rep;
    rep.nu = nu;
    rep.details.resize(static_cast<std::size_t>(samples));
    std::vector<int> violation(static_cast<std::size_t>(samples), 0);
    parallel_for(samples, threads, [&](int i) {
        const Plan& p = plans[i];
        std::mt19937_64 local(p.seed);
        const Ball b = ball(g, p.center, p.r);
        if (b.vertices.size() >= static_cast<std::size_t>(g.size())) {
            throw std::invalid_argument("fk scan: sampled ball covers the whole graph; use smaller radii");
        }
        const auto in_b = membership_mask(g.size(), b.vertices);
        VertexSet d;
        std::string kind;
        if (p.kind == 0) {
            d = b.vertices;
            kind = "ball";
        } else if (p.kind == 1) {
            std::uniform_int_distribution<std::size_t> pv(0, b.vertices.size() - 1);
            std::uniform_real_distribution<double> pr(p.r / 4.0, p.r);
            const VertexId y = b.vertices[pv(local)];
            const double r2 = pr(local);
            for (VertexId v : ball(g, y, r2).vertices) {
                if (in_b[v]) d.push_back(v);
            }
            kind = "subball";
        } else {
            std::uniform_int_distribution<std::size_t> pv(0, b.vertices.size() - 1);
            std::uniform_real_distribution<double> frac(0.1, 0.9);
            const auto target = std::max<std::size_t>(1, static_cast<std::size_t>(frac(local) * b.vertices.size()));
            std::vector<char> in_d(static_cast<std::size_t>(g.size()), 0), queued(static_cast<std::size_t>(g.size()), 0);
            std::vector<VertexId> frontier{b.vertices[pv(local)]};
            queued[frontier[0]] = 1;
            while (d.size() < target && !frontier.empty()) {
                std::uniform_int_distribution<std::size_t> pf(0, frontier.size() - 1);
                const std::size_t k = pf(local);
                const VertexId v = frontier[k];
                frontier[k] = frontier.back();
                frontier.pop_back();
                in_d[v] = 1;
                d.push_back(v);
                for (VertexId w : g.neighbors(v)) {
                    if (in_b[w] && !queued[w]) {
                        queued[w] = 1;
                        frontier.push_back(w);
                    }
                }
            }
            std::sort(d.begin(), d.end());
            kind = "growth";
        }
        FkSample s;
        s.center = p.center;
        s.r = p.r;
        s.kind = kind;
        s.ball_measure = form_measure(df, b.vertices);
        s.domain_measure = form_measure(df, d);
        s.lambda1 = lambda1_dirichlet(df, d);
        s.value = s.lambda1 * sf(p.r) * std::pow(s.domain_measure / s.ball_measure, nu);
        if (p.kind != 0) {
            const double lb = lambda1_dirichlet(df, b.vertices);
            if (s.lambda1 < lb * (1.0 - 1e-8)) violation[i] = 1;
        }
        rep.details[i] = std::move(s);
    });
    rep.samples = samples;
    rep.c_f_estimate = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        rep.c_f_estimate = std::min(rep.c_f_estimate, rep.details[i].value);
        rep.monotonicity_violations += violation[i];
    }
    return rep;
}

CacciopoliReport cacciopoli_check(const DirichletForm& df, const CutoffFn& phi, double theta,
                                  const CacciopoliParams& p) {
    if (!(p.T > 0.0)) throw std::invalid_argument("cacciopoli: T must be positive");
    if (p.trials <= 0) throw std::invalid_argument("cacciopoli: need at least one trial");
    if (p.time_intervals < 4 || p.time_intervals % 4 != 0) {
        throw std::invalid_argument("cacciopoli: time_intervals must be a positive multiple of 4");
    }
    if (!(theta >= 0.0)) throw std::invalid_argument("cacciopoli: theta must be >= 0");
    const Graph& g = df.graph();
    const VertexSet b = ball(g, p.x0, p.R).vertices;
    if (b.size() >= static_cast<std::size_t>(g.size())) throw std::invalid_argument("cacciopoli: ball has no boundary");
    const auto in_b = membership_mask(g.size(), b);
    for (VertexId v = 0; v < g.size(); ++v) {
        if (!in_b[v] && phi.values[v] != 0.0) throw std::invalid_argument("cacciopoli: cutoff not supported in the ball");
    }

    const int N = p.time_intervals;
    const double T1 = p.T / 2.0;
    const double h = p.T / N;
    CacciopoliReport rep;
    rep.theta = theta;
    rep.K = 1.0 / T1;
    const double coef = 2.0 * (20.0 / 9.0 * theta + rep.K);
    const Domain dom = Domain::of(b);
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < p.trials; ++trial) {
        VertexField u(static_cast<std::size_t>(g.size()), 0.0);
        for (VertexId v : b) u[v] = unif(rng);
        std::vector<double> energy_t(static_cast<std::size_t>(N) + 1), mass_t(static_cast<std::size_t>(N) + 1);
        double terminal = 0.0;
        for (int j = 0; j <= N; ++j) {
            if (j > 0) u = heat_apply(df, dom, h, u, 1e-12);
            const double t = j * h;
            const double k = std::min(1.0, t / T1);
            VertexField ev(static_cast<std::size_t>(g.size()), 0.0);
            double m2 = 0.0;
            for (VertexId v : b) {
                const double vv = std::max(0.0, u[v] - p.level);
                ev[v] = phi.values[v] * k * vv;
                m2 += vv * vv * df.measure()[v];
            }
            energy_t[j] = energy(df, ev);
            mass_t[j] = m2;
            if (j == N) {
                for (VertexId v : b) terminal += ev[v] * ev[v] * df.measure()[v];
            }
        }
        const std::size_t mid = static_cast<std::size_t>(N / 2);
        const double int_energy = simpson(energy_t, 0, mid, h) + simpson(energy_t, mid, static_cast<std::size_t>(N), h);
        const double int_mass = simpson(mass_t, 0, mid, h) + simpson(mass_t, mid, static_cast<std::size_t>(N), h);
        const double lhs = terminal + 2.0 / 9.0 * int_energy;
        const double rhs = coef * int_mass;
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rep.ratios.push_back(ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    return rep;
}

double weak_c2(const DirichletForm& df, const CutoffFn& phi, const std::vector<VertexField>& family,
               const VertexSet& annulus, double psi_r, double c1) {
    double c2 = 0.0;
    for (const auto& a : annulus_integrals(df, phi, family, annulus)) {
        if (!(a.f2_m > 0.0)) continue;
        c2 = std::max(c2, psi_r * std::max(0.0, a.f2_gamma_phi - c1 * a.gamma_f) / a.f2_m);
    }
    return c2;
}

double weak_c1(const DirichletForm& df, const CutoffFn& phi, const std::vector<VertexField>& family,
               const VertexSet& annulus, double psi_r, double c2) {
    double c1 = 0.0;
    for (const auto& a : annulus_integrals(df, phi, family, annulus)) {
        const double excess = a.f2_gamma_phi - c2 * a.f2_m / psi_r;
        if (excess <= 0.0) continue;
        if (a.gamma_f > 0.0) {
            c1 = std::max(c1, excess / a.gamma_f);
        } else {
            return std::numeric_limits<double>::infinity();
        }
    }
    return c1;
}

StabilityReport stability_check(const DirichletForm& df, std::span<const double> factors, double C,
                                const CutoffFn& phi, const std::vector<VertexField>& family, double psi_r,
                                double tolerance) {
    if (!(C >= 1.0)) throw std::invalid_argument("stability: C must be >= 1");
    for (double f : factors) {
        if (!(f >= (1.0 / C) * (1.0 - 1e-12)) || !(f <= C * (1.0 + 1e-12))) {
            throw std::invalid_argument("stability: conductance factor outside [1/C, C]");
        }
    }
    const DirichletForm perturbed = df.with_conductance_factors(factors);
    StabilityReport rep;
    rep.factor_bound = C;

    std::vector<VertexField> probes = family;
    probes.push_back(phi.values);
    for (const auto& f : probes) {
        const auto g1 = gamma_bilinear(df, f, f);
        const auto g2 = gamma_bilinear(perturbed, f, f);
        for (std::size_t v = 0; v < g1.size(); ++v) {
            const double slack = kGammaTol * (1.0 + g1[v]);
            if (g2[v] > C * g1[v] + slack || g2[v] < g1[v] / C - slack) rep.gamma_sandwich = false;
        }
    }

    const VertexSet u = cutoff_annulus(df.graph(), phi);
    for (int i = -12; i <= 4; ++i) rep.c1_grid.push_back(std::pow(10.0, i / 4.0));
    for (double c1 : rep.c1_grid) {
        const double c2 = weak_c2(df, phi, family, u, psi_r, c1);
        const double c2p = weak_c2(perturbed, phi, family, u, psi_r, C * C * c1);
        rep.c2_original.push_back(c2);
        rep.c2_perturbed.push_back(c2p);
        const double bound = C * c2;
        const double ratio = bound > 0.0 ? c2p / bound : (c2p > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rep.worst_c2_ratio = std::max(rep.worst_c2_ratio, ratio);

        const double c1_min = weak_c1(df, phi, family, u, psi_r, c2);
        const double c1p_min = weak_c1(perturbed, phi, family, u, psi_r, C * c2);
        rep.c1_min_original.push_back(c1_min);
        rep.c1_min_perturbed.push_back(c1p_min);
        const double c1_bound = C * C * c1_min;
        const double c1_ratio =
            c1_bound > 0.0 ? c1p_min / c1_bound : (c1p_min > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rep.worst_c1_ratio = std::max(rep.worst_c1_ratio, c1_ratio);
    }
    rep.c2_ok = rep.worst_c2_ratio <= 1.0 + tolerance;
    rep.c1_ok = rep.worst_c1_ratio <= 1.0 + tolerance;
    rep.theta_original = csd_theta(df, phi, family, &u).theta_star;
    rep.theta_perturbed = csd_theta(perturbed, phi, family, &u).theta_star;
    return rep;
}

}  // namespace carpetlab
