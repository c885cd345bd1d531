#include "linalg.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "carpetlab/errors.hpp"

namespace carpetlab::detail {

RestrictedGenerator::RestrictedGenerator(const DirichletForm& df, const Domain& domain) {
    const Graph& g = df.graph();
    const VertexId n = g.size();
    local_.assign(static_cast<std::size_t>(n), -1);
    if (domain.is_all()) {
        globals_.resize(static_cast<std::size_t>(n));
        for (VertexId v = 0; v < n; ++v) globals_[v] = v;
    } else {
        globals_ = domain.vertices();
        for (VertexId v : globals_) {
            if (v < 0 || v >= n) throw std::out_of_range("domain vertex out of range");
        }
    }
    for (int i = 0; i < size(); ++i) local_[globals_[i]] = i;

    const auto& cond = df.conductances();
    measure_.resize(size());
    diag_.resize(size());
    touches_boundary_.assign(static_cast<std::size_t>(size()), 0);
    offsets_.assign(static_cast<std::size_t>(size()) + 1, 0);
    for (int i = 0; i < size(); ++i) {
        const VertexId v = globals_[i];
        measure_[i] = df.measure()[v];
        double deg = 0.0;
        const auto nb = g.neighbors(v);
        const auto ids = g.incident_edges(v);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const double c = cond[ids[k]];
            deg += c;
            const int j = local_[nb[k]];
            if (j >= 0) {
                cols_.push_back(j);
                weights_.push_back(c);
            } else {
                touches_boundary_[i] = 1;
            }
        }
        diag_[i] = deg;
        offsets_[i + 1] = static_cast<int>(cols_.size());
        rate_ = std::max(rate_, deg / measure_[i]);
    }
}

void RestrictedGenerator::apply(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const {
    out.resize(size(), in.cols());
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
        const double* x = in.col(c).data();
        double* y = out.col(c).data();
        for (int i = 0; i < size(); ++i) {
            double s = -diag_[i] * x[i];
            for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) s += weights_[k] * x[cols_[k]];
            y[i] = s / measure_[i];
        }
    }
}

SparseMatrix RestrictedGenerator::stiffness() const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(cols_.size() + static_cast<std::size_t>(size()));
    for (int i = 0; i < size(); ++i) {
        trip.emplace_back(i, i, diag_[i]);
        for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) trip.emplace_back(i, cols_[k], -weights_[k]);
    }
    SparseMatrix K(size(), size());
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

bool RestrictedGenerator::every_component_absorbed() const {
    std::vector<char> seen(static_cast<std::size_t>(size()), 0);
    std::vector<int> stack;
    for (int s = 0; s < size(); ++s) {
        if (seen[s]) continue;
        bool absorbed = false;
        seen[s] = 1;
        stack.push_back(s);
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            if (touches_boundary_[i]) absorbed = true;
            for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
                if (!seen[cols_[k]]) {
                    seen[cols_[k]] = 1;
                    stack.push_back(cols_[k]);
                }
            }
        }
        if (!absorbed) return false;
    }
    return true;
}

Eigen::VectorXd RestrictedGenerator::gather(std::span<const double> global) const {
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i) out[i] = global[globals_[i]];
    return out;
}

VertexField RestrictedGenerator::scatter(const Eigen::VectorXd& local_values, VertexId n) const {
    VertexField out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < size(); ++i) out[globals_[i]] = local_values[i];
    return out;
}

struct SpdSolver::Impl {
    bool direct = true;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
};

SpdSolver::SpdSolver(const SparseMatrix& K, const SolverOptions& opts) : impl_(new Impl) {
    try {
        impl_->direct = K.rows() <= opts.direct_limit;
        if (impl_->direct) {
            impl_->ldlt.compute(K);
            if (impl_->ldlt.info() != Eigen::Success) throw SingularSystem("sparse factorisation failed");
            const auto d = impl_->ldlt.vectorD();
            const double scale = d.cwiseAbs().maxCoeff();
            if (d.size() > 0 && !(d.minCoeff() > 1e-13 * scale)) {
                throw SingularSystem("system matrix is singular or indefinite");
            }
        } else {
            impl_->cg.setTolerance(opts.cg_tolerance);
            impl_->cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * K.rows()));
            impl_->cg.compute(K);
            if (impl_->cg.info() != Eigen::Success) throw SingularSystem("preconditioner setup failed");
        }
    } catch (...) {
        delete impl_;
        throw;
    }
}

SpdSolver::~SpdSolver() { delete impl_; }

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
    if (impl_->direct) return impl_->ldlt.solve(b);
    Eigen::VectorXd x = impl_->cg.solve(b);
    if (impl_->cg.info() != Eigen::Success) throw SingularSystem("conjugate gradient did not converge");
    return x;
}

Eigen::VectorXd spd_solve(const SparseMatrix& K, const Eigen::VectorXd& b, const SolverOptions& opts) {
    SpdSolver s(K, opts);
    return s.solve(b);
}

Eigen::MatrixXd heat_uniformization(const RestrictedGenerator& gen, double t, const Eigen::MatrixXd& f, double tol) {
    const double lam = gen.rate();
    const double q = lam * t;
    if (q == 0.0 || f.size() == 0) return f;
    const double fmax = f.cwiseAbs().maxCoeff();
    if (fmax == 0.0) return f;

    // P = I + L/lam is substochastic, so ||P^k f||_inf <= ||f||_inf and the
    // truncation error is at most (1 - sum of kept weights) * ||f||_inf.
    Eigen::MatrixXd pk = f;
    Eigen::MatrixXd lf;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(f.rows(), f.cols());
    double kept = 0.0;
    const double log_q = std::log(q);
    for (long k = 0;; ++k) {
        const double w = std::exp(-q + static_cast<double>(k) * log_q - std::lgamma(static_cast<double>(k) + 1.0));
        acc += w * pk;
        kept += w;
        if (static_cast<double>(k) >= q && (1.0 - kept) * fmax <= 0.5 * tol) break;
        if (k > 10 + static_cast<long>(q + 50.0 * std::sqrt(q + 1.0))) break;
        gen.apply(pk, lf);
        pk += lf / lam;
    }
    return acc;
}

std::vector<double> scaled_bessel_i(double z, double tail_tol) {
    if (!(z >= 0.0) || !std::isfinite(z)) throw std::invalid_argument("bessel argument must be finite and >= 0");
    if (z < 1e-12) return {std::exp(-z), std::exp(-z) * 0.5 * z};
    const int top = static_cast<int>(std::ceil(50.0 + 16.0 * std::sqrt(z)));
    std::vector<double> b(static_cast<std::size_t>(top) + 2, 0.0);
    b[top] = 1.0;
    for (int k = top; k >= 1; --k) {
        b[k - 1] = b[k + 1] + (2.0 * k / z) * b[k];
        if (b[k - 1] > 1e200) {
            for (int j = k - 1; j <= top; ++j) b[j] *= 1e-200;
        }
    }
    double norm = b[0];
    for (int k = 1; k <= top; ++k) norm += 2.0 * b[k];
    for (auto& v : b) v /= norm;
    // Truncate where twice the remaining tail drops below tail_tol.
    double tail = 0.0;
    int last = top;
    while (last > 0 && tail + 2.0 * b[last] <= tail_tol) {
        tail += 2.0 * b[last];
        --last;
    }
    b.resize(static_cast<std::size_t>(last) + 1);
    return b;
}

Eigen::MatrixXd heat_chebyshev(const RestrictedGenerator& gen, double t, const Eigen::MatrixXd& f, double tol) {
    const double rate = gen.rate();
    if (rate == 0.0 || t == 0.0 || f.size() == 0) return f;
    const Eigen::VectorXd& m = gen.measure();
    double norm2 = 0.0;
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
        norm2 = std::max(norm2, std::sqrt((f.col(c).array().square() * m.array()).sum()));
    }
    if (norm2 == 0.0) return f;
    // ||g||_inf <= ||g||_{2,m} / sqrt(min m) and T_k(A) is an L^2(m) contraction.
    const double amplification = norm2 / std::sqrt(m.minCoeff());
    const double z = t * rate;  // t * (spectral bound 2*rate) / 2
    const auto c = scaled_bessel_i(z, 0.5 * tol / amplification);

    // exp(tL) = e^{-z} exp(-z A) with A = -L/rate - I, spectrum in [-1, 1].
    auto apply_a = [&](const Eigen::MatrixXd& x, Eigen::MatrixXd& out) {
        gen.apply(x, out);
        out = -out / rate - x;
    };
    Eigen::MatrixXd t_prev = f;
    Eigen::MatrixXd acc = c[0] * f;
    if (c.size() == 1) return acc;
    Eigen::MatrixXd t_cur;
    apply_a(f, t_cur);
    acc -= 2.0 * c[1] * t_cur;
    Eigen::MatrixXd tmp;
    for (std::size_t k = 2; k < c.size(); ++k) {
        apply_a(t_cur, tmp);
        tmp = 2.0 * tmp - t_prev;
        t_prev.swap(t_cur);
        t_cur.swap(tmp);
        acc += ((k % 2 == 0) ? 2.0 : -2.0) * c[k] * t_cur;
    }
    return acc;
}

namespace {

// Eigenpairs of the tridiagonal Lanczos matrix, largest first.
void tridiagonal_eigen(const std::vector<double>& alpha, const std::vector<double>& beta, Eigen::VectorXd& values,
                       Eigen::MatrixXd& vectors) {
    const int j = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(j, j);
    for (int i = 0; i < j; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < j) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    values = es.eigenvalues().reverse();
    vectors = es.eigenvectors().rowwise().reverse();
}

}  // namespace

LanczosResult shift_invert_lanczos(const SparseMatrix& K, const Eigen::VectorXd& mass, int count, double rel_tol,
                                   const SolverOptions& opts) {
    const int n = static_cast<int>(K.rows());
    if (count < 1) throw std::invalid_argument("lanczos: count must be positive");
    if (n == 0) throw std::invalid_argument("lanczos: empty system");
    count = std::min(count, n);
    SpdSolver solver(K, opts);
    const Eigen::VectorXd msqrt = mass.cwiseSqrt();
    auto op = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
        Eigen::VectorXd x = solver.solve(msqrt.cwiseProduct(w));
        return msqrt.cwiseProduct(x);
    };

    std::mt19937_64 rng(0x5eed1234abcdULL);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd start(n);
    for (int i = 0; i < n; ++i) start[i] = 1.0 + 0.1 * gauss(rng);

    const int max_dim = std::min(n, std::max(80, 30 * count));
    LanczosResult best;
    for (int restart = 0; restart < 6; ++restart) {
        std::vector<Eigen::VectorXd> Q;
        std::vector<double> alpha, beta;
        Eigen::VectorXd q = start.normalized();
        Eigen::VectorXd values;
        Eigen::MatrixXd S;
        bool converged = false;
        for (int j = 0; j < max_dim; ++j) {
            Q.push_back(q);
            Eigen::VectorXd w = op(q);
            alpha.push_back(q.dot(w));
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& v : Q) w -= v.dot(w) * v;
            }
            const double b = w.norm();
            const bool breakdown = b <= 1e-14 * std::abs(alpha.front());
            const bool check = breakdown || j + 1 == max_dim || (j + 1 >= count && (j % 5 == 4));
            if (check) {
                tridiagonal_eigen(alpha, beta, values, S);
                const int k = std::min<int>(count, static_cast<int>(values.size()));
                converged = k == count;
                for (int i = 0; i < k && converged; ++i) {
                    const double resid = b * std::abs(S(static_cast<int>(alpha.size()) - 1, i));
                    if (resid > rel_tol * std::abs(values[i])) converged = false;
                }
                if (breakdown) converged = true;
            }
            if (converged || breakdown) break;
            beta.push_back(b);
            q = w / b;
        }
        if (values.size() == 0) tridiagonal_eigen(alpha, beta, values, S);
        const int k = std::min<int>(count, static_cast<int>(values.size()));
        best = LanczosResult{};
        for (int i = 0; i < k; ++i) {
            Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
            for (std::size_t r = 0; r < Q.size(); ++r) y += S(static_cast<int>(r), i) * Q[r];
            // Back to K v = lambda M v: v = M^{-1/2} y, M-normalised since |y| = 1.
            best.eigenvalues.push_back(1.0 / values[i]);
            best.vectors.push_back(y.cwiseQuotient(msqrt));
        }
        if (converged) break;
        start = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < k; ++i) start += best.vectors[i].cwiseProduct(msqrt);
    }
    return best;
}

}  // namespace carpetlab::detail
