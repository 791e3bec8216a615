#ifndef MSMAG_KERNELS_HPP
#define MSMAG_KERNELS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "msmag/common.hpp"
#include "msmag/quadrature.hpp"
#include "msmag/vec.hpp"

namespace msmag {

// Compactly supported averaging kernel with p vanishing moments and q
// continuous derivatives:
//   two-sided  k(x) = P(x) (1-x^2)^{q+1}        on [-1, 1], P even
//   one-sided  k(x) = P(x) x^{q+1} (1-x)^{q+1}  on [0, 1]
// The bump factor puts k in C^q with compact support; the polynomial
// correction P of minimal degree <= p fixes unit mass and kills moments
// 1..p. For the two-sided form odd moments vanish by symmetry, so P needs
// only even powers.
struct Kernel {
    int p = 0;
    int q = 0;
    bool one_sided = false;
    std::vector<double> poly; // coefficients of P, ascending in x (two-sided: in x^2)

    double support_lo() const { return one_sided ? 0.0 : -1.0; }

    double operator()(double x) const {
        if (x <= support_lo() || x >= 1.0) return 0.0;
        double px = 0.0;
        if (one_sided) {
            for (std::size_t j = poly.size(); j-- > 0;) px = px * x + poly[j];
            return px * std::pow(x * (1.0 - x), q + 1);
        }
        double x2 = x * x;
        for (std::size_t j = poly.size(); j-- > 0;) px = px * x2 + poly[j];
        return px * std::pow(1.0 - x2, q + 1);
    }

    // Scaled kernel k_mu(x) = (1/mu) k(x/mu).
    double scaled(double mu, double x) const { return (*this)(x / mu) / mu; }

    // Tensorized scaled kernel k_mu(x1) k_mu(x2).
    double tensor(double mu, Vec2 xi) const {
        return scaled(mu, xi.x) * scaled(mu, xi.y);
    }
};

inline Kernel build_kernel(int p, int q, bool one_sided) {
    if (p < 0 || q < 0) throw ConfigError("kernel orders must be non-negative");

    // Moment conditions reduce to a small linear system in the coefficients
    // of P. Gauss-Legendre of this size integrates every entry exactly.
    Quad1D gl = gauss_legendre(p + q + 6);
    Kernel k{p, q, one_sided, {}};

    if (one_sided) {
        int m = p + 1;
        Eigen::MatrixXd A(m, m);
        for (int r = 0; r < m; ++r)
            for (int j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
                    double x = 0.5 + 0.5 * gl.nodes[g]; // map to [0, 1]
                    s += 0.5 * gl.weights[g] * std::pow(x, r + j) *
                         std::pow(x * (1.0 - x), q + 1);
                }
                A(r, j) = s;
            }
        Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
        b(0) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) throw NumericalError("singular kernel moment system");
        Eigen::VectorXd c = lu.solve(b);
        k.poly.assign(c.data(), c.data() + m);
    } else {
        int m = p / 2 + 1; // even powers 0..2(m-1) cover moments 0..p
        Eigen::MatrixXd A(m, m);
        for (int r = 0; r < m; ++r)
            for (int j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
                    double x = gl.nodes[g];
                    s += gl.weights[g] * std::pow(x, 2 * (r + j)) *
                         std::pow(1.0 - x * x, q + 1);
                }
                A(r, j) = s;
            }
        Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
        b(0) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) throw NumericalError("singular kernel moment system");
        Eigen::VectorXd c = lu.solve(b);
        k.poly.assign(c.data(), c.data() + m);
    }
    return k;
}

inline double eval_scaled(const Kernel& k, double mu, double x) {
    if (!(mu > 0.0)) throw ConfigError("kernel scale mu must be positive");
    return k.scaled(mu, x);
}

inline double tensor_eval(const Kernel& k, double mu, Vec2 xi) {
    if (!(mu > 0.0)) throw ConfigError("kernel scale mu must be positive");
    return k.tensor(mu, xi);
}

} // namespace msmag

#endif
