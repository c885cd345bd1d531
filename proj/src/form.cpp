#include "carpetlab/form.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "carpetlab/errors.hpp"
#include "linalg.hpp"

namespace carpetlab {

namespace {

void check_field(const DirichletForm& df, std::span<const double> f, const char* what) {
    if (f.size() != static_cast<std::size_t>(df.size())) {
        throw std::invalid_argument(std::string(what) + ": field length does not match vertex count");
    }
    for (double v : f) {
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": field has non-finite values");
    }
}

void check_proper(const DirichletForm& df, const VertexSet& domain, const char* what) {
    if (domain.empty()) throw std::invalid_argument(std::string(what) + ": empty domain");
    if (static_cast<VertexId>(domain.size()) >= df.size()) {
        throw SingularSystem(std::string(what) + ": domain has no boundary");
    }
    if (!std::is_sorted(domain.begin(), domain.end()) ||
        std::adjacent_find(domain.begin(), domain.end()) != domain.end()) {
        throw std::invalid_argument(std::string(what) + ": domain must be sorted and duplicate-free");
    }
    if (domain.front() < 0 || domain.back() >= df.size()) {
        throw std::out_of_range(std::string(what) + ": domain vertex out of range");
    }
}

Eigen::VectorXd solve_on_domain(const detail::RestrictedGenerator& gen, double lambda, const Eigen::VectorXd& b,
                                const SolverOptions& opts) {
    auto K = gen.stiffness();
    if (lambda > 0.0) {
        for (int i = 0; i < gen.size(); ++i) K.coeffRef(i, i) += lambda * gen.measure()[i];
    } else if (!gen.every_component_absorbed()) {
        throw SingularSystem("domain component without absorbing boundary");
    }
    return detail::spd_solve(K, b, opts);
}

}  // namespace

DirichletForm::DirichletForm(std::shared_ptr<const Graph> graph)
    : DirichletForm(graph, std::vector<double>(static_cast<std::size_t>(graph ? graph->edge_count() : 0), 1.0)) {}

DirichletForm::DirichletForm(std::shared_ptr<const Graph> graph, std::vector<double> conductances,
                             std::vector<double> measure)
    : graph_(std::move(graph)), conductances_(std::move(conductances)), measure_(std::move(measure)) {
    if (!graph_) throw std::invalid_argument("dirichlet form: null graph");
    if (conductances_.size() != static_cast<std::size_t>(graph_->edge_count())) {
        throw std::invalid_argument("dirichlet form: conductance count does not match edge count");
    }
    for (double c : conductances_) {
        if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("dirichlet form: conductances must be positive");
    }
    if (measure_.empty()) measure_ = graph_->measure();
    if (measure_.size() != static_cast<std::size_t>(graph_->size())) {
        throw std::invalid_argument("dirichlet form: measure length mismatch");
    }
    for (double m : measure_) {
        if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("dirichlet form: measure must be positive");
    }
}

double DirichletForm::weighted_degree(VertexId v) const {
    double s = 0.0;
    for (EdgeId e : graph_->incident_edges(v)) s += conductances_[e];
    return s;
}

DirichletForm DirichletForm::with_measure(std::vector<double> measure) const {
    return DirichletForm(graph_, conductances_, std::move(measure));
}

DirichletForm DirichletForm::with_conductance_factors(std::span<const double> factors) const {
    if (factors.size() != conductances_.size()) throw std::invalid_argument("conductance factor count mismatch");
    std::vector<double> c(conductances_);
    for (std::size_t e = 0; e < c.size(); ++e) c[e] *= factors[e];
    return DirichletForm(graph_, std::move(c), measure_);
}

VertexField gamma_bilinear(const DirichletForm& df, std::span<const double> f, std::span<const double> g) {
    check_field(df, f, "gamma");
    check_field(df, g, "gamma");
    VertexField out(static_cast<std::size_t>(df.size()), 0.0);
    const auto& edges = df.graph().edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [x, y] = edges[e];
        const double half = 0.5 * df.conductances()[e] * (f[x] - f[y]) * (g[x] - g[y]);
        out[x] += half;
        out[y] += half;
    }
    return out;
}

EnergyResult energy_and_measure(const DirichletForm& df, std::span<const double> f) {
    EnergyResult r;
    r.gamma = gamma_bilinear(df, f, f);
    for (double v : r.gamma) r.energy += v;
    return r;
}

double energy(const DirichletForm& df, std::span<const double> f) {
    check_field(df, f, "energy");
    double s = 0.0;
    const auto& edges = df.graph().edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const double d = f[edges[e].first] - f[edges[e].second];
        s += df.conductances()[e] * d * d;
    }
    return s;
}

double inner_m(const DirichletForm& df, std::span<const double> f, std::span<const double> g) {
    check_field(df, f, "inner product");
    check_field(df, g, "inner product");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i] * df.measure()[i];
    return s;
}

double lambda1_dirichlet(const DirichletForm& df, const VertexSet& domain, double rel_tol) {
    check_proper(df, domain, "lambda1");
    detail::RestrictedGenerator gen(df, Domain::of(domain));
    if (!gen.every_component_absorbed()) return 0.0;
    const auto res = detail::shift_invert_lanczos(gen.stiffness(), gen.measure(), 1, rel_tol, SolverOptions{});
    return res.eigenvalues.front();
}

double lambda1_dirichlet_dense(const DirichletForm& df, const VertexSet& domain) {
    check_proper(df, domain, "lambda1");
    detail::RestrictedGenerator gen(df, Domain::of(domain));
    if (gen.size() > 6000) throw std::invalid_argument("dense eigensolve limited to 6000 vertices");
    const Eigen::MatrixXd K(gen.stiffness());
    const Eigen::VectorXd s = gen.measure().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd S = s.asDiagonal() * K * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues()[0]);
}

DirichletModes lowest_dirichlet_modes(const DirichletForm& df, const VertexSet& domain, int count, double rel_tol) {
    check_proper(df, domain, "dirichlet modes");
    detail::RestrictedGenerator gen(df, Domain::of(domain));
    if (!gen.every_component_absorbed()) throw SingularSystem("domain component without absorbing boundary");
    const auto res = detail::shift_invert_lanczos(gen.stiffness(), gen.measure(), count, rel_tol, SolverOptions{});
    DirichletModes out;
    out.eigenvalues = res.eigenvalues;
    for (const auto& v : res.vectors) out.eigenvectors.push_back(gen.scatter(v, df.size()));
    return out;
}

VertexField resolvent_solve(const DirichletForm& df, const VertexSet& domain, double lambda,
                            std::span<const double> rhs, const SolverOptions& opts) {
    check_field(df, rhs, "resolvent");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("resolvent: lambda must be >= 0");
    if (domain.empty()) throw std::invalid_argument("resolvent: empty domain");
    if (lambda == 0.0) check_proper(df, domain, "resolvent");
    const Domain dom = static_cast<VertexId>(domain.size()) == df.size() ? Domain::all() : Domain::of(domain);
    detail::RestrictedGenerator gen(df, dom);
    const Eigen::VectorXd b = gen.gather(rhs).cwiseProduct(gen.measure());
    return gen.scatter(solve_on_domain(gen, lambda, b, opts), df.size());
}

std::vector<VertexField> heat_apply_many(const DirichletForm& df, const Domain& domain, double t,
                                         const std::vector<VertexField>& fs, double tol, const HeatOptions& opts) {
    for (const auto& f : fs) check_field(df, f, "heat");
    if (!(tol > 0.0)) throw std::invalid_argument("heat: tolerance must be positive");
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("heat: time must be finite and >= 0");
    detail::RestrictedGenerator gen(df, domain);
    Eigen::MatrixXd local(gen.size(), static_cast<Eigen::Index>(fs.size()));
    for (std::size_t c = 0; c < fs.size(); ++c) local.col(static_cast<Eigen::Index>(c)) = gen.gather(fs[c]);
    HeatMethod method = opts.method;
    if (method == HeatMethod::automatic) {
        method = gen.rate() * t <= opts.uniformization_limit ? HeatMethod::uniformization : HeatMethod::chebyshev;
    }
    Eigen::MatrixXd u;
    if (method == HeatMethod::uniformization) {
        if (gen.rate() * t > 700.0) throw std::invalid_argument("heat: uniformization limited to rate * t <= 700");
        u = detail::heat_uniformization(gen, t, local, tol);
    } else {
        u = detail::heat_chebyshev(gen, t, local, tol);
    }
    std::vector<VertexField> out;
    out.reserve(fs.size());
    for (std::size_t c = 0; c < fs.size(); ++c) out.push_back(gen.scatter(u.col(static_cast<Eigen::Index>(c)), df.size()));
    return out;
}

VertexField heat_apply(const DirichletForm& df, const Domain& domain, double t, std::span<const double> f, double tol,
                       const HeatOptions& opts) {
    std::vector<VertexField> one{VertexField(f.begin(), f.end())};
    return std::move(heat_apply_many(df, domain, t, one, tol, opts).front());
}

VertexField heat_kernel_column(const DirichletForm& df, VertexId x0, double t, double tol, const Domain& domain) {
    if (x0 < 0 || x0 >= df.size()) throw std::out_of_range("heat kernel: vertex out of range");
    if (!(t > 0.0)) throw std::invalid_argument("heat kernel: time must be positive");
    VertexField delta(static_cast<std::size_t>(df.size()), 0.0);
    delta[x0] = 1.0 / df.measure()[x0];
    return heat_apply(df, domain, t, delta, tol);
}

VertexField green_column(const DirichletForm& df, const VertexSet& domain, VertexId x0, const SolverOptions& opts) {
    check_proper(df, domain, "green function");
    if (!std::binary_search(domain.begin(), domain.end(), x0)) {
        throw std::invalid_argument("green function: source outside domain");
    }
    VertexField rhs(static_cast<std::size_t>(df.size()), 0.0);
    rhs[x0] = 1.0 / df.measure()[x0];
    return resolvent_solve(df, domain, 0.0, rhs, opts);
}

VertexField exit_time_solve(const DirichletForm& df, const VertexSet& domain, const SolverOptions& opts) {
    check_proper(df, domain, "exit time");
    VertexField rhs(static_cast<std::size_t>(df.size()), 0.0);
    for (VertexId v : domain) rhs[v] = 1.0;
    return resolvent_solve(df, domain, 0.0, rhs, opts);
}

VertexField harmonic_extension(const DirichletForm& df, const VertexSet& domain, std::span<const double> outside_values,
                               const SolverOptions& opts) {
    check_field(df, outside_values, "harmonic extension");
    check_proper(df, domain, "harmonic extension");
    detail::RestrictedGenerator gen(df, Domain::of(domain));
    // K_D u = sum over boundary edges c_xy g(y).
    Eigen::VectorXd b = Eigen::VectorXd::Zero(gen.size());
    const Graph& g = df.graph();
    for (int i = 0; i < gen.size(); ++i) {
        const VertexId v = gen.globals()[i];
        const auto nb = g.neighbors(v);
        const auto ids = g.incident_edges(v);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (gen.local(nb[k]) < 0) b[i] += df.conductances()[ids[k]] * outside_values[nb[k]];
        }
    }
    const Eigen::VectorXd u = solve_on_domain(gen, 0.0, b, opts);
    VertexField out(outside_values.begin(), outside_values.end());
    for (int i = 0; i < gen.size(); ++i) out[gen.globals()[i]] = u[i];
    return out;
}

}  // namespace carpetlab
