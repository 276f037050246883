#include "qerest/spectral_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>

#include "qerest/errors.hpp"
#include "qerest/parallel.hpp"
#include "qerest/seeds.hpp"

namespace qerest {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDipRatio = 0.1;      // degenerate direction: tension at k below this fraction of k +/- step
constexpr double kBarrierRatio = 2.0;  // distinct minima need a tension barrier this much above them

double tan_of(double s) {
    s = std::clamp(s, 0.0, 1.0);
    if (s >= 1.0) return std::numeric_limits<double>::infinity();
    return s / std::sqrt(1.0 - s * s);
}

double weyl_spacing(const BilliardDomain& domain, double k) { return 2.0 * kPi / (domain.area() * k); }

// Minimise the tension on [lo, hi] starting from mid with f(mid) below both ends: Brent on
// tension^2 (smooth near the minimum) down to its sqrt(eps) floor, then golden section on the
// tension itself, whose kink at an eigenvalue pins k to the requested tolerance.
double refine_minimum(const TensionProblem& problem, double lo, double mid, double hi, double tol,
                      std::int64_t& evals) {
    static std::once_flag quiet;
    std::call_once(quiet, [] { gsl_set_error_handler_off(); });
    struct Ctx {
        const TensionProblem* p;
        std::int64_t* evals;
    } ctx{&problem, &evals};
    gsl_function squared, plain;
    squared.function = [](double k, void* data) {
        auto* c = static_cast<Ctx*>(data);
        ++*c->evals;
        const auto t = c->p->evaluate(k).tension;
        return t * t;
    };
    plain.function = [](double k, void* data) {
        auto* c = static_cast<Ctx*>(data);
        ++*c->evals;
        return c->p->evaluate(k).tension;
    };
    squared.params = plain.params = &ctx;

    auto run = [&](const gsl_min_fminimizer_type* type, gsl_function* f, double eps) {
        gsl_min_fminimizer* s = gsl_min_fminimizer_alloc(type);
        if (gsl_min_fminimizer_set(s, f, mid, lo, hi) != GSL_SUCCESS) {
            gsl_min_fminimizer_free(s);
            return false;
        }
        for (int iter = 0; iter < 200; ++iter) {
            if (gsl_min_fminimizer_iterate(s) != GSL_SUCCESS) break;
            mid = gsl_min_fminimizer_x_minimum(s);
            lo = gsl_min_fminimizer_x_lower(s);
            hi = gsl_min_fminimizer_x_upper(s);
            if (gsl_min_test_interval(lo, hi, eps, 0.0) == GSL_SUCCESS) break;
        }
        gsl_min_fminimizer_free(s);
        return true;
    };
    if (!run(gsl_min_fminimizer_brent, &squared, std::max(tol, 1e-6 * std::abs(mid)))) return mid;
    run(gsl_min_fminimizer_goldensection, &plain, tol);
    return mid;
}

struct Bracket {
    std::size_t problem;
    double lo, mid, hi;
    double edge;   // larger tension at the bracket ends
};

std::vector<Bracket> local_minima(std::size_t problem, const std::vector<double>& ks, const std::vector<double>& ts,
                                  double keep_lo, double keep_hi) {
    std::vector<Bracket> out;
    for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
        if (ks[i] < keep_lo || ks[i] > keep_hi) continue;
        if (ts[i] <= ts[i - 1] && ts[i] < ts[i + 1]) out.push_back({problem, ks[i - 1], ks[i], ks[i + 1], std::max(ts[i - 1], ts[i + 1])});
    }
    return out;
}

struct Found {
    double k;
    std::size_t problem;
    double tension;
    int multiplicity;
    Eigen::MatrixXd coeffs;
};

int count_small(const TensionResult& r, double threshold) {
    return static_cast<int>((r.all.array() <= threshold).count());
}

double sign_of_peak(const Eigen::VectorXd& u) {
    Eigen::Index idx = 0;
    u.cwiseAbs().maxCoeff(&idx);
    return u(idx) < 0.0 ? -1.0 : 1.0;
}

} // namespace

TensionProblem::TensionProblem(const BilliardDomain& domain, SymmetryClass cls, double k_ref,
                               const SolverParams& params)
    : domain_(&domain), params_(params), cls_(cls) {
    type_ = params.basis.value_or(default_basis_type(domain.kind()));
    size_ = default_basis_size(domain, type_, k_ref, params.basis_factor);
    prepare(k_ref);
}

TensionProblem::TensionProblem(const BilliardDomain& domain, const BasisDescriptor& desc, const SolverParams& params)
    : domain_(&domain), params_(params), cls_(desc.cls), type_(desc.type), size_(desc.size) {
    params_.seed = desc.seed;
    prepare(desc.k);
}

void TensionProblem::prepare(double k_ref) {
    if (!(k_ref > 0.0)) throw std::invalid_argument("tension: k must be positive");
    region_ = fundamental_region(*domain_);
    const double wavelengths = region_.boundary_length() * k_ref / (2.0 * kPi);
    const int mb = std::max(static_cast<int>(std::ceil(params_.points_per_wavelength * wavelengths)), 2 * size_);
    const auto nodes = collocation_nodes(region_.boundary, mb);
    double mean_w = 0.0;
    for (const auto& n : nodes) mean_w += n.w;
    mean_w /= static_cast<double>(nodes.size());
    for (const auto& n : nodes) {
        boundary_.push_back(n.x);
        boundary_weight_.push_back(std::sqrt(n.w / mean_w));
    }
    cloud_ = interior_cloud(*domain_, region_, size_ + params_.interior_extra,
                            derive_seed(params_.seed, SeedStream::interior_cloud, 0));
}

BasisDescriptor TensionProblem::descriptor(double k) const { return {type_, cls_, size_, k, params_.seed}; }

TensionResult TensionProblem::evaluate(double k, int vectors) const {
    return evaluate(BasisSet(*domain_, descriptor(k)), vectors);
}

TensionResult TensionProblem::evaluate(const BasisSet& basis, int vectors) const {
    const auto mb = static_cast<Eigen::Index>(boundary_.size());
    const auto mi = static_cast<Eigen::Index>(cloud_.size());
    const int n = basis.size();
    Eigen::MatrixXd A(mb + mi, n);
    A.topRows(mb) = basis.values(boundary_);
    for (Eigen::Index i = 0; i < mb; ++i) A.row(i) *= boundary_weight_[i];
    A.bottomRows(mi) = basis.values(cloud_);
    Eigen::VectorXd colnorm = A.colwise().norm().transpose();
    for (int j = 0; j < n; ++j) {
        if (colnorm(j) > 0.0) A.col(j) /= colnorm(j);
        else colnorm(j) = 1.0;
    }
    const unsigned opts = vectors > 0 ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : Eigen::ComputeThinU;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, opts);
    const auto& sv = svd.singularValues();
    int r = 0;
    while (r < sv.size() && sv(r) > params_.rank_tol * sv(0)) ++r;
    if (r < 2) {
        throw NumericalError("tension: interior mass matrix is rank-deficient (rank " + std::to_string(r) +
                             " at regularisation threshold " + std::to_string(params_.rank_tol) + ")");
    }
    const Eigen::MatrixXd QB = svd.matrixU().topLeftCorner(mb, r);
    Eigen::BDCSVD<Eigen::MatrixXd> inner(QB, vectors > 0 ? Eigen::ComputeThinV : 0);
    const auto& s = inner.singularValues();
    TensionResult out;
    out.rank = r;
    out.tension = tan_of(s(r - 1));
    out.second = tan_of(s(r - 2));
    out.all.resize(r);
    for (int i = 0; i < r; ++i) out.all(i) = tan_of(s(r - 1 - i));
    if (vectors > 0) {
        const int m = std::min(vectors, r);
        out.coefficients.resize(n, m);
        const Eigen::MatrixXd Vr = svd.matrixV().leftCols(r);
        const Eigen::VectorXd inv = sv.head(r).cwiseInverse();
        for (int q = 0; q < m; ++q) {
            const Eigen::VectorXd y = inner.matrixV().col(r - 1 - q);
            out.coefficients.col(q) = (Vr * inv.cwiseProduct(y)).cwiseQuotient(colnorm);
        }
    }
    return out;
}

double tension(const BilliardDomain& domain, const BasisSet& basis, const SolverParams& params) {
    auto desc = basis.descriptor();
    SolverParams p = params;
    p.seed = desc.seed;
    p.basis = desc.type;
    TensionProblem problem(domain, desc, p);
    return problem.evaluate(basis).tension;
}

namespace {

// Normalise a degenerate group (columns of `coeffs`) and compute diagnostics.
std::vector<EigenPair> finish_group(const BilliardDomain& domain, const TensionProblem& problem, const Found& f,
                                    const SolverParams& params) {
    const BasisDescriptor desc = problem.descriptor(f.k);
    const BasisSet basis(domain, desc);
    const auto& region = problem.region();
    const auto rule = interior_rule(region.cells, f.k, params.quadrature_scale);
    std::vector<Vec2> qx;
    Eigen::VectorXd qw(static_cast<Eigen::Index>(rule.size()));
    for (std::size_t i = 0; i < rule.size(); ++i) {
        qx.push_back(rule[i].x);
        qw(static_cast<Eigen::Index>(i)) = rule[i].w * region.copies;
    }
    Eigen::MatrixXd C = f.coeffs;
    Eigen::MatrixXd U(static_cast<Eigen::Index>(qx.size()), C.cols());
    for (Eigen::Index q = 0; q < C.cols(); ++q) U.col(q) = basis.combine(qx, C.col(q));
    const Eigen::MatrixXd G = U.transpose() * qw.asDiagonal() * U;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd lam = es.eigenvalues();
    if (lam.minCoeff() <= 0.0) throw NumericalError("eigenfunction has vanishing interior norm");
    C = C * es.eigenvectors() * lam.cwiseInverse().cwiseSqrt().asDiagonal();

    const auto bnodes = boundary_rule(region.boundary, f.k, params.quadrature_scale);
    std::vector<Vec2> bx;
    for (const auto& b : bnodes) bx.push_back(b.x);
    const Eigen::MatrixXd Bv = basis.values(bx);
    Eigen::MatrixXd Gx, Gy;
    basis.gradients(bx, Gx, Gy);
    const Eigen::MatrixXd cloud_values = basis.values(interior_cloud(
        domain, region, problem.basis_size() + params.interior_extra, derive_seed(params.seed, SeedStream::interior_cloud, 0)));

    std::vector<EigenPair> out;
    for (Eigen::Index q = 0; q < C.cols(); ++q) {
        Eigen::VectorXd c = C.col(q);
        c *= sign_of_peak(cloud_values * c);
        const Eigen::VectorXd ub = Bv * c;
        const Eigen::VectorXd gx = Gx * c, gy = Gy * c;
        double trace2 = 0.0, flux2 = 0.0, rellich = 0.0;
        for (std::size_t i = 0; i < bnodes.size(); ++i) {
            const auto& b = bnodes[i];
            const double un = gx(i) * b.normal.x + gy(i) * b.normal.y;
            trace2 += b.w * ub(i) * ub(i);
            flux2 += b.w * un * un;
            rellich += b.w * dot(b.x - region.rellich_origin, b.normal) * un * un;
        }
        rellich *= region.copies / (2.0 * f.k * f.k);
        EigenPair p;
        p.k = f.k;
        p.basis = desc;
        const double scale = c.cwiseAbs().maxCoeff();
        Eigen::VectorXd stored = c / scale;
        p.coefficients.assign(stored.data(), stored.data() + stored.size());
        // normalise the stored (rounded) coefficients: rounding them shifts the norm by far more
        // than the quadrature error once the expansion cancels heavily
        const Eigen::VectorXd us = basis.combine(qx, stored);
        p.norm_constant = 1.0 / std::sqrt(us.dot(qw.asDiagonal() * us));
        p.tension = f.tension;
        p.boundary_residual = flux2 > 0.0 ? std::sqrt(trace2) / (std::sqrt(flux2) / f.k) : 1.0;
        p.rellich_deviation = std::abs(rellich - 1.0);
        p.multiplicity = f.multiplicity;
        out.push_back(std::move(p));
    }
    return out;
}

void fill_weyl(const BilliardDomain& domain, SpectrumWindow& w, const SolverParams& params) {
    const auto check = weyl_check(domain, w);
    w.weyl_leading = check.leading;
    w.weyl_two_term = check.two_term;
    w.weyl_deviation = check.rel_leading;
    w.weyl_deviation_two_term = check.rel_two_term;
    // The count in a window fluctuates around the smooth law; for chaotic spectra its variance
    // is the GOE number variance (2/pi^2)(ln(2 pi N) + gamma + 1 - pi^2/8).
    const double n = std::max(check.two_term, 1.0);
    const double var = 2.0 / (kPi * kPi) * (std::log(2.0 * kPi * n) + 0.5772156649015329 + 1.0 - kPi * kPi / 8.0);
    w.missing_levels = check.two_term - check.count > params.weyl_slack * std::sqrt(std::max(var, 1.0 / 9.0));
}

bool pair_order(const EigenPair& a, const EigenPair& b) {
    if (a.k != b.k) return a.k < b.k;
    return to_string(a.basis.cls) < to_string(b.basis.cls);
}

} // namespace

SpectrumWindow find_spectrum(const BilliardDomain& domain, double k_min, double k_max, const SolverParams& params,
                             unsigned threads) {
    if (!(k_min >= 0.0) || !(k_max >= k_min) || !std::isfinite(k_max)) {
        throw std::invalid_argument("find_spectrum: need 0 <= k_min <= k_max");
    }
    SpectrumWindow window;
    window.k_min = k_min;
    window.k_max = k_max;
    window.h = k_max > 0.0 ? 2.0 / (k_min + k_max) : 0.0;
    // Faber-Krahn: no Dirichlet eigenvalue below j_{0,1} sqrt(pi / area).
    const double scan_lo = std::max(k_min, 0.99 * 2.404825557695773 * std::sqrt(kPi / domain.area()));
    if (scan_lo >= k_max) {
        fill_weyl(domain, window, params);
        return window;
    }

    // Chunks over which the basis size is frozen.
    struct Chunk {
        double a, b, step;
    };
    std::vector<Chunk> chunks;
    for (double a = scan_lo; a < k_max;) {
        double b = std::min(k_max, a + std::max(1.0, params.chunk_fraction * a));
        if (k_max - b < 0.25 * (b - a)) b = k_max;
        chunks.push_back({a, b, params.scan_fraction * weyl_spacing(domain, b)});
        a = b;
    }
    std::vector<TensionProblem> problems;
    std::vector<std::size_t> chunk_of;
    for (const auto cls : symmetry_classes(domain)) {
        for (std::size_t c = 0; c < chunks.size(); ++c) {
            problems.emplace_back(domain, cls, chunks[c].b + 3.0 * chunks[c].step, params);
            chunk_of.push_back(c);
        }
    }

    // Scan.
    struct Task {
        std::size_t problem;
        std::size_t index;
    };
    std::vector<std::vector<double>> grid(problems.size()), values(problems.size());
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < problems.size(); ++p) {
        const auto& ch = chunks[chunk_of[p]];
        const auto n = static_cast<std::size_t>(std::ceil((ch.b - ch.a) / ch.step)) + 5;
        for (std::size_t i = 0; i < n; ++i) {
            grid[p].push_back(ch.a - 2.0 * ch.step + static_cast<double>(i) * ch.step);
            tasks.push_back({p, i});
        }
        values[p].resize(n);
    }
    parallel_for(tasks.size(), threads, [&](std::size_t t) {
        const auto& task = tasks[t];
        const double k = grid[task.problem][task.index];
        values[task.problem][task.index] = k > 0.0 ? problems[task.problem].evaluate(k).tension
                                                   : std::numeric_limits<double>::infinity();
    });
    window.tension_evaluations += static_cast<std::int64_t>(tasks.size());

    std::vector<Bracket> brackets;
    for (std::size_t p = 0; p < problems.size(); ++p) {
        const auto& ch = chunks[chunk_of[p]];
        auto found = local_minima(p, grid[p], values[p], ch.a - ch.step, ch.b + ch.step);
        brackets.insert(brackets.end(), found.begin(), found.end());
    }

    // Refine; probe for near-degenerate partners.
    std::vector<std::vector<Found>> refined(brackets.size());
    std::vector<int> rejected(brackets.size(), 0);
    std::vector<std::int64_t> evals(brackets.size(), 0);
    parallel_for(brackets.size(), threads, [&](std::size_t i) {
        const auto& br = brackets[i];
        const auto& problem = problems[br.problem];
        const double step = chunks[chunk_of[br.problem]].step;
        auto accept = [&](double k) {
            auto r = problem.evaluate(k, 2);
            int m = count_small(r, params.tension_threshold);
            if (m == 0) {
                ++rejected[i];
                return r;
            }
            if (m > 1) {
                // A degenerate direction must itself dip at k; under a loose threshold the
                // next singular value can sit below it without belonging to an eigenvalue.
                const auto left = problem.evaluate(k - step), right = problem.evaluate(k + step);
                evals[i] += 2;
                int dips = 1;
                while (dips < m && dips < left.all.size() && dips < right.all.size() &&
                       r.all(dips) <= kDipRatio * std::min(left.all(dips), right.all(dips))) {
                    ++dips;
                }
                m = dips;
            }
            if (m > 2) r = problem.evaluate(k, m);
            refined[i].push_back({k, br.problem, r.tension, m, r.coefficients.leftCols(m)});
            return r;
        };
        const double k = refine_minimum(problem, br.lo, br.mid, br.hi, params.refine_tol, evals[i]);
        const auto r = accept(k);
        ++evals[i];
        if (refined[i].size() == 1 && refined[i][0].multiplicity == 1 && r.second < params.degeneracy_probe * br.edge) {
            constexpr int kProbe = 65;
            std::vector<double> ks(kProbe), ts(kProbe);
            for (int j = 0; j < kProbe; ++j) {
                ks[j] = k - 2.0 * step + 4.0 * step * j / (kProbe - 1);
                ts[j] = problem.evaluate(ks[j]).tension;
            }
            evals[i] += kProbe;
            for (const auto& b : local_minima(br.problem, ks, ts, ks.front(), ks.back())) {
                const double k2 = refine_minimum(problem, b.lo, b.mid, b.hi, params.refine_tol, evals[i]);
                if (std::abs(k2 - k) > params.dedup_tol) {
                    accept(k2);
                    ++evals[i];
                }
            }
        }
    });
    for (std::size_t i = 0; i < brackets.size(); ++i) {
        window.rejected_minima += rejected[i];
        window.tension_evaluations += evals[i];
    }

    // Deduplicate per class, keep the largest multiplicity (then the smallest tension).
    std::vector<Found> groups;
    for (const auto cls : symmetry_classes(domain)) {
        std::vector<Found> mine;
        for (auto& list : refined) {
            for (auto& f : list) {
                if (problems[f.problem].symmetry_class() == cls && f.k >= k_min && f.k <= k_max) mine.push_back(f);
            }
        }
        std::sort(mine.begin(), mine.end(), [](const Found& a, const Found& b) { return a.k < b.k; });
        for (auto& f : mine) {
            bool same = false;
            if (!groups.empty() && problems[groups.back().problem].symmetry_class() == cls) {
                const auto& g = groups.back();
                const double gap = std::abs(g.k - f.k);
                same = gap <= params.dedup_tol;
                if (!same && gap < chunks[chunk_of[f.problem]].step) {
                    // Two refinements of one shallow minimum: no barrier between them.
                    const double mid = problems[f.problem].evaluate(0.5 * (g.k + f.k)).tension;
                    ++window.tension_evaluations;
                    same = mid < kBarrierRatio * std::max(g.tension, f.tension);
                }
            }
            if (same) {
                auto& g = groups.back();
                if (f.multiplicity > g.multiplicity || (f.multiplicity == g.multiplicity && f.tension < g.tension)) {
                    g = f;
                }
                continue;
            }
            groups.push_back(f);
        }
    }

    std::vector<std::vector<EigenPair>> finished(groups.size());
    parallel_for(groups.size(), threads, [&](std::size_t i) {
        finished[i] = finish_group(domain, problems[groups[i].problem], groups[i], params);
    });
    for (auto& list : finished) {
        for (auto& p : list) {
            if (p.boundary_residual <= params.residual_cap) window.pairs.push_back(std::move(p));
            else ++window.rejected_minima;
        }
    }
    std::sort(window.pairs.begin(), window.pairs.end(), pair_order);
    fill_weyl(domain, window, params);
    return window;
}

SpectrumWindow slice_window(const BilliardDomain& domain, const SpectrumWindow& window, double k_min, double k_max,
                            const SolverParams& params) {
    if (k_min < window.k_min || k_max > window.k_max || k_max < k_min) {
        throw std::invalid_argument("slice_window: range not covered by the window");
    }
    SpectrumWindow out;
    out.k_min = k_min;
    out.k_max = k_max;
    out.h = 2.0 / (k_min + k_max);
    for (const auto& p : window.pairs) {
        if (p.k >= k_min && p.k <= k_max) out.pairs.push_back(p);
    }
    fill_weyl(domain, out, params);
    return out;
}

std::vector<double> evaluate_eigenfunction(const BilliardDomain& domain, const EigenPair& pair,
                                           std::span<const Vec2> points) {
    const BasisSet basis(domain, pair.basis);
    const Eigen::Map<const Eigen::VectorXd> c(pair.coefficients.data(), static_cast<Eigen::Index>(pair.coefficients.size()));
    const Eigen::VectorXd u = basis.combine(points, c) * pair.norm_constant;
    return {u.data(), u.data() + u.size()};
}

std::vector<Vec2> evaluate_gradient(const BilliardDomain& domain, const EigenPair& pair, std::span<const Vec2> points) {
    const BasisSet basis(domain, pair.basis);
    const Eigen::Map<const Eigen::VectorXd> c(pair.coefficients.data(), static_cast<Eigen::Index>(pair.coefficients.size()));
    Eigen::MatrixXd gx, gy;
    basis.gradients(points, gx, gy);
    const Eigen::VectorXd ux = gx * c * pair.norm_constant, uy = gy * c * pair.norm_constant;
    std::vector<Vec2> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = {ux(i), uy(i)};
    return out;
}

WeylCheck weyl_check(const BilliardDomain& domain, const SpectrumWindow& window) {
    WeylCheck w;
    w.count = static_cast<int>(window.pairs.size());
    const double k0 = window.k_min, k1 = window.k_max;
    w.leading = domain.area() * (k1 * k1 - k0 * k0) / (4.0 * kPi);
    w.two_term = w.leading - domain.perimeter() * (k1 - k0) / (4.0 * kPi);
    auto rel = [&](double pred) { return pred > 0.0 ? (w.count - pred) / pred : 0.0; };
    w.rel_leading = rel(w.leading);
    w.rel_two_term = rel(w.two_term);
    return w;
}

Eigen::MatrixXd gram_matrix(const BilliardDomain& domain, std::span<const EigenPair> pairs, double quadrature_scale) {
    double kmax = 0.0;
    for (const auto& p : pairs) kmax = std::max(kmax, p.k);
    const auto cells = full_cells(domain);
    const auto rule = interior_rule(cells, kmax, quadrature_scale);
    std::vector<Vec2> x;
    Eigen::VectorXd w(static_cast<Eigen::Index>(rule.size()));
    for (std::size_t i = 0; i < rule.size(); ++i) {
        x.push_back(rule[i].x);
        w(static_cast<Eigen::Index>(i)) = rule[i].w;
    }
    Eigen::MatrixXd U(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const auto u = evaluate_eigenfunction(domain, pairs[j], x);
        U.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
    }
    return U.transpose() * w.asDiagonal() * U;
}

NormDiagnostics norm_diagnostics(const BilliardDomain& domain, const EigenPair& pair, double quadrature_scale) {
    const auto region = fundamental_region(domain);
    NormDiagnostics d;
    const auto rule = interior_rule(region.cells, pair.k, quadrature_scale);
    std::vector<Vec2> x;
    for (const auto& q : rule) x.push_back(q.x);
    const auto u = evaluate_eigenfunction(domain, pair, x);
    for (std::size_t i = 0; i < rule.size(); ++i) d.quadrature_norm2 += rule[i].w * u[i] * u[i];
    d.quadrature_norm2 *= region.copies;
    const auto nodes = boundary_rule(region.boundary, pair.k, quadrature_scale);
    std::vector<Vec2> bx;
    for (const auto& b : nodes) bx.push_back(b.x);
    const auto ub = evaluate_eigenfunction(domain, pair, bx);
    const auto g = evaluate_gradient(domain, pair, bx);
    double trace2 = 0.0, flux2 = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double un = dot(g[i], nodes[i].normal);
        trace2 += nodes[i].w * ub[i] * ub[i];
        flux2 += nodes[i].w * un * un;
        d.rellich_norm2 += nodes[i].w * dot(nodes[i].x - region.rellich_origin, nodes[i].normal) * un * un;
    }
    d.rellich_norm2 *= region.copies / (2.0 * pair.k * pair.k);
    d.boundary_residual = flux2 > 0.0 ? std::sqrt(trace2) / (std::sqrt(flux2) / pair.k) : 1.0;
    return d;
}

} // namespace qerest
