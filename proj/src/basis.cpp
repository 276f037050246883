#include "qerest/basis.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include "qerest/errors.hpp"
#include "qerest/seeds.hpp"

namespace qerest {

namespace {

constexpr double kPi = std::numbers::pi;

void quiet_gsl() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

// J_n(x) (and Y_n(x) when wanted) for n = 0..nmax.
void bessel_table(int nmax, double x, std::vector<double>& j, std::vector<double>* y) {
    j.assign(nmax + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
    } else {
        gsl_sf_bessel_Jn_array(0, nmax, x, j.data());
    }
    if (y) {
        y->assign(nmax + 1, 0.0);
        gsl_sf_bessel_Yn_array(0, nmax, x, y->data());
        for (double v : *y) {
            if (!std::isfinite(v)) throw NumericalError("Bessel Y overflow: basis order too high for k*r");
        }
    }
}

inline double f(int parity, double t) { return parity == 0 ? std::cos(t) : std::sin(t); }
inline double fprime(int parity, double t) { return parity == 0 ? -std::sin(t) : std::cos(t); }

} // namespace

std::string to_string(SymmetryClass cls) {
    std::string s;
    s += cls.px ? 'o' : 'e';
    s += cls.py ? 'o' : 'e';
    return s;
}

SymmetryClass symmetry_class_from_string(const std::string& label) {
    if (label.size() != 2) throw std::invalid_argument("bad symmetry class '" + label + "'");
    auto parity = [&](char c) {
        if (c == 'e') return 0;
        if (c == 'o') return 1;
        throw std::invalid_argument("bad symmetry class '" + label + "'");
    };
    return {parity(label[0]), parity(label[1])};
}

std::vector<SymmetryClass> symmetry_classes(const BilliardDomain& domain) {
    if (domain.kind() == DomainKind::sinai_cell) return {{0, 0}, {1, 0}};
    return {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
}

std::string to_string(BasisType type) {
    switch (type) {
    case BasisType::real_plane_waves: return "real_plane_waves";
    case BasisType::fourier_bessel: return "fourier_bessel";
    case BasisType::corner_bessel: return "corner_bessel";
    }
    return "?";
}

BasisType basis_type_from_string(const std::string& name) {
    if (name == "real_plane_waves") return BasisType::real_plane_waves;
    if (name == "fourier_bessel") return BasisType::fourier_bessel;
    if (name == "corner_bessel") return BasisType::corner_bessel;
    throw std::invalid_argument("unknown basis type '" + name + "'");
}

BasisType default_basis_type(DomainKind kind) {
    if (kind == DomainKind::disk) return BasisType::fourier_bessel;
    if (kind == DomainKind::sinai_cell) return BasisType::corner_bessel;
    return BasisType::real_plane_waves;
}

int default_basis_size(const BilliardDomain& domain, BasisType type, double k, double size_factor) {
    const auto& spec = domain.spec();
    switch (type) {
    case BasisType::real_plane_waves:
        return static_cast<int>(std::ceil(size_factor * k * domain.perimeter() / (2.0 * kPi))) / 4 + 4;
    case BasisType::fourier_bessel:
        // orders up to k R + 16, half of them per class
        return static_cast<int>(std::ceil(k * spec.a)) / 2 + 9;
    case BasisType::corner_bessel: {
        // orders 2m up to about k times the far-corner distance, J and Y each
        const double reach = k * spec.a * std::numbers::sqrt2;
        return 2 * (static_cast<int>(std::ceil(size_factor * reach / 16.0)) + 6);
    }
    }
    return 0;
}

BasisSet::BasisSet(const BilliardDomain& domain, const BasisDescriptor& desc) : desc_(desc) {
    quiet_gsl();
    if (!(desc.k > 0.0)) throw std::invalid_argument("BasisSet: k must be positive");
    if (desc.size < 1) throw std::invalid_argument("BasisSet: size must be >= 1");
    center_ = domain.symmetry_center();
    const int n = desc.size;
    switch (desc.type) {
    case BasisType::real_plane_waves: {
        if (domain.kind() == DomainKind::sinai_cell) throw ConfigError("plane-wave basis does not support the Sinai cell");
        std::mt19937_64 rng(derive_seed(desc.seed, SeedStream::basis_jitter, static_cast<std::uint64_t>(n)));
        std::uniform_real_distribution<double> jitter(-0.25, 0.25);
        angles_.resize(n);
        for (int j = 0; j < n; ++j) angles_[j] = (j + 0.5 + jitter(rng)) * 0.5 * kPi / n;
        break;
    }
    case BasisType::fourier_bessel: {
        if (domain.kind() != DomainKind::disk) throw ConfigError("Fourier-Bessel basis requires the disk");
        sine_ = desc.cls.py == 1;
        int m = sine_ ? (desc.cls.px == 0 ? 1 : 2) : desc.cls.px;
        for (int j = 0; j < n; ++j, m += 2) orders_.push_back(m);
        break;
    }
    case BasisType::corner_bessel: {
        if (domain.kind() != DomainKind::sinai_cell) throw ConfigError("corner Bessel basis requires the Sinai cell");
        if (n % 2 != 0) throw std::invalid_argument("corner Bessel basis size must be even");
        center_ = {0, 0};
        int m = desc.cls.px == 0 ? 1 : 2;
        for (int j = 0; j < n / 2; ++j, m += 2) orders_.push_back(2 * m);
        break;
    }
    }
}

BasisSet BasisSet::plane_waves(const BilliardDomain& domain, double k, SymmetryClass cls, std::vector<double> angles) {
    BasisSet b;
    b.desc_ = {BasisType::real_plane_waves, cls, static_cast<int>(angles.size()), k, 0};
    b.center_ = domain.symmetry_center();
    b.angles_ = std::move(angles);
    return b;
}

namespace {

// sin and cos of an extended-precision argument. The x87 instruction is an order of magnitude
// faster than sinl/cosl and accurate to ~2e-19 absolute for the arguments used here (|x| < 1e3).
inline void sincos_ext(long double x, long double& s, long double& c) {
#if defined(__x86_64__) && defined(__GNUC__)
    __asm__("fsincos" : "=t"(c), "=u"(s) : "0"(x));
#else
    s = std::sin(x);
    c = std::cos(x);
#endif
}

} // namespace

Eigen::VectorXd BasisSet::combine(std::span<const Vec2> points, const Eigen::VectorXd& c) const {
    if (c.size() != desc_.size) throw std::invalid_argument("BasisSet::combine: coefficient count mismatch");
    if (desc_.type != BasisType::real_plane_waves) return values(points) * c;
    const int n = desc_.size;
    std::vector<long double> ax(n), ay(n);
    for (int j = 0; j < n; ++j) {
        ax[j] = desc_.k * std::cos(angles_[j]);
        ay[j] = desc_.k * std::sin(angles_[j]);
    }
    const int px = desc_.cls.px, py = desc_.cls.py;
    Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec2 d = points[i] - center_;
        long double acc = 0.0L;
        for (int j = 0; j < n; ++j) {
            long double sx, cx, sy, cy;
            sincos_ext(ax[j] * d.x, sx, cx);
            sincos_ext(ay[j] * d.y, sy, cy);
            acc += static_cast<long double>(c(j)) * (px == 0 ? cx : sx) * (py == 0 ? cy : sy);
        }
        out(static_cast<Eigen::Index>(i)) = static_cast<double>(acc);
    }
    return out;
}

Eigen::MatrixXd BasisSet::values(std::span<const Vec2> points) const {
    const int n = desc_.size;
    const double k = desc_.k;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), n);
    if (desc_.type == BasisType::real_plane_waves) {
        std::vector<double> ax(n), ay(n);
        for (int j = 0; j < n; ++j) {
            ax[j] = k * std::cos(angles_[j]);
            ay[j] = k * std::sin(angles_[j]);
        }
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Vec2 d = points[i] - center_;
            for (int j = 0; j < n; ++j) out(i, j) = f(desc_.cls.px, ax[j] * d.x) * f(desc_.cls.py, ay[j] * d.y);
        }
        return out;
    }
    const int top = orders_.back();
    const bool corner = desc_.type == BasisType::corner_bessel;
    std::vector<double> jt, yt;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec2 d = points[i] - center_;
        const double r = d.norm();
        const double th = std::atan2(d.y, d.x);
        bessel_table(top, k * r, jt, corner ? &yt : nullptr);
        if (corner) {
            for (std::size_t j = 0; j < orders_.size(); ++j) {
                const int nu = orders_[j];
                const double ang = std::sin(nu * th);
                out(i, 2 * j) = jt[nu] * ang;
                out(i, 2 * j + 1) = yt[nu] * ang;
            }
        } else {
            for (int j = 0; j < n; ++j) {
                const int m = orders_[j];
                out(i, j) = jt[m] * (sine_ ? std::sin(m * th) : std::cos(m * th));
            }
        }
    }
    return out;
}

void BasisSet::gradients(std::span<const Vec2> points, Eigen::MatrixXd& dx, Eigen::MatrixXd& dy) const {
    const int n = desc_.size;
    const double k = desc_.k;
    const auto rows = static_cast<Eigen::Index>(points.size());
    dx.resize(rows, n);
    dy.resize(rows, n);
    if (desc_.type == BasisType::real_plane_waves) {
        const int px = desc_.cls.px, py = desc_.cls.py;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Vec2 d = points[i] - center_;
            for (int j = 0; j < n; ++j) {
                const double a = k * std::cos(angles_[j]), b = k * std::sin(angles_[j]);
                const double fx = f(px, a * d.x), fy = f(py, b * d.y);
                dx(i, j) = a * fprime(px, a * d.x) * fy;
                dy(i, j) = b * fx * fprime(py, b * d.y);
            }
        }
        return;
    }
    const int top = orders_.back() + 1;
    const bool corner = desc_.type == BasisType::corner_bessel;
    std::vector<double> jt, yt;
    // R(r) Theta(th): grad = R' Theta e_r + (R / r) Theta' e_th
    auto polar = [](double c, double s, double dr, double dth_over_r, double& gx, double& gy) {
        gx = c * dr - s * dth_over_r;
        gy = s * dr + c * dth_over_r;
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec2 d = points[i] - center_;
        const double r = d.norm();
        if (r < 1e-14) {
            if (corner) throw NumericalError("corner Bessel basis evaluated at its singular point");
            for (int j = 0; j < n; ++j) {
                const bool first = orders_[j] == 1;
                dx(i, j) = first && !sine_ ? 0.5 * k : 0.0;
                dy(i, j) = first && sine_ ? 0.5 * k : 0.0;
            }
            continue;
        }
        const double th = std::atan2(d.y, d.x);
        const double c = d.x / r, s = d.y / r;
        bessel_table(top, k * r, jt, corner ? &yt : nullptr);
        auto deriv = [&](const std::vector<double>& t, int m) {
            return m == 0 ? -k * t[1] : 0.5 * k * (t[m - 1] - t[m + 1]);
        };
        if (corner) {
            for (std::size_t j = 0; j < orders_.size(); ++j) {
                const int nu = orders_[j];
                const double ang = std::sin(nu * th), dang = nu * std::cos(nu * th);
                polar(c, s, deriv(jt, nu) * ang, jt[nu] * dang / r, dx(i, 2 * j), dy(i, 2 * j));
                polar(c, s, deriv(yt, nu) * ang, yt[nu] * dang / r, dx(i, 2 * j + 1), dy(i, 2 * j + 1));
            }
        } else {
            for (int j = 0; j < n; ++j) {
                const int m = orders_[j];
                const double ang = sine_ ? std::sin(m * th) : std::cos(m * th);
                const double dang = sine_ ? m * std::cos(m * th) : -m * std::sin(m * th);
                polar(c, s, deriv(jt, m) * ang, jt[m] * dang / r, dx(i, j), dy(i, j));
            }
        }
    }
}

} // namespace qerest
