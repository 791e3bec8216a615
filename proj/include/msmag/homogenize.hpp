#ifndef MSMAG_HOMOGENIZE_HPP
#define MSMAG_HOMOGENIZE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "msmag/common.hpp"
#include "msmag/fft_util.hpp"
#include "msmag/material.hpp"
#include "msmag/vec.hpp"

namespace msmag {

// Effective exchange tensor. Symmetric positive definite; eigenvalues lie
// between the harmonic and arithmetic mean of the cell coefficient.
struct HomTensor {
    Mat22 a;

    std::array<double, 2> eigenvalues() const {
        double tr = a.a00 + a.a11;
        double det = a.a00 * a.a11 - a.a01 * a.a10;
        double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
        return {0.5 * tr - disc, 0.5 * tr + disc};
    }
};

using CellFn = std::function<double(Vec2)>;

// Corrector fields on an n x n periodic grid over the unit cell.
struct CellSolution {
    int n = 0;
    std::array<std::vector<double>, 2> chi; // chi[d][j*n + i]
};

namespace detail_hom {

// Zero-mean projection.
inline void project(std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    for (double& x : v) x -= mean;
}

// y := (-L) x for the conservative 5-point operator with face coefficients.
inline void apply_neg_div_a_grad(int n, const std::vector<double>& ax,
                                 const std::vector<double>& ay,
                                 const std::vector<double>& x, std::vector<double>& y) {
    double inv_h2 = static_cast<double>(n) * n;
    for (int j = 0; j < n; ++j) {
        int jm = (j + n - 1) % n, jp = (j + 1) % n;
        for (int i = 0; i < n; ++i) {
            int im = (i + n - 1) % n, ip = (i + 1) % n;
            std::size_t c = static_cast<std::size_t>(j) * n + i;
            double ae = ax[c], aw = ax[static_cast<std::size_t>(j) * n + im];
            double an = ay[c], as = ay[static_cast<std::size_t>(jm) * n + i];
            y[c] = -inv_h2 * (ae * (x[static_cast<std::size_t>(j) * n + ip] - x[c]) -
                              aw * (x[c] - x[static_cast<std::size_t>(j) * n + im]) +
                              an * (x[static_cast<std::size_t>(jp) * n + i] - x[c]) -
                              as * (x[c] - x[static_cast<std::size_t>(jm) * n + i]));
        }
    }
}

// Spectral inverse of a_bar * (-Laplacian) on the periodic grid; the zero mode
// is annihilated, which doubles as the zero-mean constraint.
class SpectralPrecond {
public:
    SpectralPrecond(int n, double a_bar) : n_(n), fft_(n, n), symbol_(n * (n / 2 + 1)) {
        double inv_h2 = static_cast<double>(n) * n;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= n / 2; ++i) {
                double s = a_bar * inv_h2 *
                           (4.0 - 2.0 * std::cos(2.0 * pi * i / n) -
                            2.0 * std::cos(2.0 * pi * j / n));
                symbol_[static_cast<std::size_t>(j) * (n / 2 + 1) + i] =
                    (i == 0 && j == 0) ? 0.0 : 1.0 / s;
            }
    }

    void apply(const std::vector<double>& r, std::vector<double>& z) {
        std::copy(r.begin(), r.end(), fft_.real.begin());
        fft_.forward();
        double scale = 1.0 / (static_cast<double>(n_) * n_);
        for (std::size_t k = 0; k < fft_.spec.size(); ++k) fft_.spec[k] *= symbol_[k] * scale;
        fft_.inverse();
        std::copy(fft_.real.begin(), fft_.real.end(), z.begin());
    }

private:
    int n_;
    FftR2C2D fft_;
    std::vector<double> symbol_;
};

} // namespace detail_hom

// Solves the periodic cell problem div(a grad chi_d) = -d_yd a for d = 1, 2
// with zero mean, by preconditioned CG on the conservative 5-point stencil.
// Converges the residual below 1e-10 in the grid L2 norm.
inline CellSolution solve_cell_problem(const CellFn& a, int n) {
    if (n < 8) throw ConfigError("cell grid resolution must be at least 8");
    std::size_t nn = static_cast<std::size_t>(n) * n;
    double h = 1.0 / n;

    // Face-centered coefficients: ax at ((i+1/2)h, jh), ay at (ih, (j+1/2)h).
    std::vector<double> ax(nn), ay(nn);
    double a_sum = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            ax[j * static_cast<std::size_t>(n) + i] = a({(i + 0.5) * h, j * h});
            ay[j * static_cast<std::size_t>(n) + i] = a({i * h, (j + 0.5) * h});
            a_sum += ax[j * static_cast<std::size_t>(n) + i];
        }

    detail_hom::SpectralPrecond precond(n, a_sum / static_cast<double>(nn));

    CellSolution sol;
    sol.n = n;
    const double tol_grid = 5e-11; // margin under the 1e-10 contract
    const long max_iter = 10L * n * n;

    for (int d = 0; d < 2; ++d) {
        // b = -f = +d_yd a in conservative (face-difference) form.
        std::vector<double> b(nn);
        for (int j = 0; j < n; ++j) {
            int jm = (j + n - 1) % n;
            for (int i = 0; i < n; ++i) {
                int im = (i + n - 1) % n;
                std::size_t c = static_cast<std::size_t>(j) * n + i;
                b[c] = (d == 0)
                           ? (ax[c] - ax[static_cast<std::size_t>(j) * n + im]) / h
                           : (ay[c] - ay[static_cast<std::size_t>(jm) * n + i]) / h;
            }
        }
        detail_hom::project(b);

        std::vector<double> x(nn, 0.0), r = b, z(nn), p(nn), q(nn);
        precond.apply(r, z);
        detail_hom::project(z);
        p = z;
        double rz = 0.0;
        for (std::size_t k = 0; k < nn; ++k) rz += r[k] * z[k];

        auto grid_norm = [&](const std::vector<double>& v) {
            double s = 0.0;
            for (double t : v) s += t * t;
            return std::sqrt(s) * h;
        };

        long it = 0;
        while (grid_norm(r) > tol_grid) {
            if (++it > max_iter)
                throw NumericalError("cell problem CG exceeded iteration cap");
            detail_hom::apply_neg_div_a_grad(n, ax, ay, p, q);
            double pq = 0.0;
            for (std::size_t k = 0; k < nn; ++k) pq += p[k] * q[k];
            double alpha = rz / pq;
            for (std::size_t k = 0; k < nn; ++k) {
                x[k] += alpha * p[k];
                r[k] -= alpha * q[k];
            }
            if (it % 50 == 0) {
                // Re-evaluate the true residual to stop rounding drift.
                detail_hom::apply_neg_div_a_grad(n, ax, ay, x, q);
                for (std::size_t k = 0; k < nn; ++k) r[k] = b[k] - q[k];
            }
            precond.apply(r, z);
            detail_hom::project(z);
            double rz_new = 0.0;
            for (std::size_t k = 0; k < nn; ++k) rz_new += r[k] * z[k];
            double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t k = 0; k < nn; ++k) p[k] = z[k] + beta * p[k];
        }
        detail_hom::project(x);
        sol.chi[d] = std::move(x);
    }
    return sol;
}

// Effective tensor from the cell problem: face-flux quadrature of
// a (I + grad chi), symmetrized.
inline HomTensor homogenized_tensor(const CellFn& a, int n = 256) {
    CellSolution sol = solve_cell_problem(a, n);
    double h = 1.0 / n;
    std::size_t nn = static_cast<std::size_t>(n) * n;

    std::vector<double> ax(nn), ay(nn);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            ax[j * static_cast<std::size_t>(n) + i] = a({(i + 0.5) * h, j * h});
            ay[j * static_cast<std::size_t>(n) + i] = a({i * h, (j + 0.5) * h});
        }

    Mat22 m{};
    for (int d = 0; d < 2; ++d) {
        const auto& chi = sol.chi[d];
        double f1 = 0.0, f2 = 0.0;
        for (int j = 0; j < n; ++j) {
            int jp = (j + 1) % n;
            for (int i = 0; i < n; ++i) {
                int ip = (i + 1) % n;
                std::size_t c = static_cast<std::size_t>(j) * n + i;
                double gx = (chi[static_cast<std::size_t>(j) * n + ip] - chi[c]) / h;
                double gy = (chi[static_cast<std::size_t>(jp) * n + i] - chi[c]) / h;
                f1 += ax[c] * ((d == 0 ? 1.0 : 0.0) + gx);
                f2 += ay[c] * ((d == 1 ? 1.0 : 0.0) + gy);
            }
        }
        double w = h * h;
        if (d == 0) { m.a00 = f1 * w; m.a10 = f2 * w; }
        else        { m.a01 = f1 * w; m.a11 = f2 * w; }
    }
    double off = 0.5 * (m.a01 + m.a10);
    m.a01 = m.a10 = off;

    HomTensor t{m};
    auto ev = t.eigenvalues();
    if (!(ev[0] > 0.0))
        throw NumericalError("homogenized tensor lost positive definiteness");
    return t;
}

inline HomTensor homogenized_tensor(const MaterialCoefficient& coeff, int n = 256) {
    return homogenized_tensor([&coeff](Vec2 y) { return coeff.cell(y); }, n);
}

// Effective tensor of a locally periodic coefficient with the slow variable
// frozen at x.
inline HomTensor frozen_tensor(const MaterialCoefficient& coeff, Vec2 x, int n = 256) {
    return homogenized_tensor([&coeff, x](Vec2 y) { return coeff.cell(y, x); }, n);
}

} // namespace msmag

#endif
