#ifndef MSMAG_MICRO_HPP
#define MSMAG_MICRO_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "msmag/common.hpp"
#include "msmag/material.hpp"
#include "msmag/mesh.hpp"
#include "msmag/vec.hpp"

namespace msmag {

// Local problem geometry and integrator parameters. Lengths are physical:
// the patch is [-mu', mu']^2 around a macro point, resolved with P grid
// points per eps and stepped to time eta under dtau = dt_safety * dxi^2.
struct MicroConfig {
    double mu = 0.0;        // averaging half-width
    double mu_prime = 0.0;  // patch half-width, >= mu
    double eta = 0.0;       // final micro time
    double epsilon = 0.0;
    int P = 10;              // grid points per eps
    double dt_safety = 0.04; // C in dtau <= C dxi^2; the registry coefficients
                             // with alpha ~ 1.2-1.5 destabilize near C ~ 0.05
    double alpha_micro = 1.2;

    double dxi() const { return epsilon / P; }
    int cell_count() const { // N_mic
        return static_cast<int>(std::ceil(2.0 * mu_prime / dxi() - 1e-9));
    }
    int step_count() const { // M_mic
        return static_cast<int>(std::ceil(eta / (dt_safety * dxi() * dxi()) - 1e-9));
    }
    double dtau() const { return eta / step_count(); }
    double half_width() const { return 0.5 * cell_count() * dxi(); }

    void validate() const {
        if (!(mu > 0.0) || !(mu_prime >= mu))
            throw ConfigError("micro patch needs mu_prime >= mu > 0");
        if (!(eta > 0.0)) throw ConfigError("micro final time eta must be positive");
        if (P < 2) throw ConfigError("micro resolution P must be at least 2");
        if (!(dt_safety > 0.0)) throw ConfigError("micro dt_safety must be positive");
        if (!(alpha_micro > 0.0 && alpha_micro <= 2.0))
            throw ConfigError("micro damping alpha must lie in (0, 2]");
        if (!(epsilon > 0.0)) throw ConfigError("micro epsilon must be positive");
    }
};

// Magnetization on the (n+1)^2 micro grid, stored by component for the
// stencil sweeps. Boundary nodes hold the initial data at all times.
struct MicroState {
    int n = 0; // cells per side
    double dxi = 0.0;
    Vec2 center{}; // physical patch center (macro coordinates)
    std::vector<double> mx, my, mz;
    std::vector<double> init_norm;
    bool patch_fits = true;

    int stride() const { return n + 1; }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * (n + 1) + i;
    }
    bool on_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == n || j == n;
    }
    Vec2 coord(int i, int j) const {
        double half = 0.5 * n * dxi;
        return {center.x - half + i * dxi, center.y - half + j * dxi};
    }
    Vec3 node(int i, int j) const {
        std::size_t k = index(i, j);
        return {mx[k], my[k], mz[k]};
    }
    void set_node(int i, int j, Vec3 v) {
        std::size_t k = index(i, j);
        mx[k] = v.x; my[k] = v.y; mz[k] = v.z;
    }
    // Centered-difference Jacobian at an interior node.
    Mat32 gradient(int i, int j) const {
        double s = 0.5 / dxi;
        Vec3 gx = (node(i + 1, j) - node(i - 1, j)) * s;
        Vec3 gy = (node(i, j + 1) - node(i, j - 1)) * s;
        return {gx, gy};
    }
};

// Initial data: affine extension of the macro P1 field on the given
// triangle, sampled at the patch nodes. Not unit-norm in general.
inline MicroState init_micro(const TriMesh& mesh, const NodalField& macro_field,
                             int tri, const MicroConfig& cfg) {
    cfg.validate();
    MicroState s;
    s.n = cfg.cell_count();
    s.dxi = cfg.dxi();
    s.center = mesh.element(tri).barycenter;
    std::size_t nn = static_cast<std::size_t>(s.n + 1) * (s.n + 1);
    s.mx.resize(nn); s.my.resize(nn); s.mz.resize(nn);
    s.init_norm.resize(nn);

    double half = cfg.half_width();
    s.patch_fits = true;
    for (Vec2 corner : {Vec2{-half, -half}, Vec2{half, -half}, Vec2{-half, half},
                        Vec2{half, half}}) {
        auto lam = mesh.barycentric(tri, s.center + corner);
        if (lam[0] < -1e-12 || lam[1] < -1e-12 || lam[2] < -1e-12) s.patch_fits = false;
    }
    for (int j = 0; j <= s.n; ++j)
        for (int i = 0; i <= s.n; ++i) {
            Vec3 v = eval_p1_affine(mesh, macro_field, tri, s.coord(i, j));
            std::size_t k = s.index(i, j);
            s.mx[k] = v.x; s.my[k] = v.y; s.mz[k] = v.z;
            s.init_norm[k] = v.norm();
        }
    return s;
}

// Second-order exchange stencil with half-grid coefficients at physical
// coordinates; reference (per-node) evaluation path.
inline Vec3 exchange_field(const MicroState& s, const MaterialCoefficient& coeff,
                           int i, int j) {
    if (s.on_boundary(i, j))
        throw ConfigError("exchange field is defined at interior nodes only");
    Vec2 p = s.coord(i, j);
    double hd = 0.5 * s.dxi;
    double ae = coeff.eval({p.x + hd, p.y});
    double aw = coeff.eval({p.x - hd, p.y});
    double an = coeff.eval({p.x, p.y + hd});
    double as = coeff.eval({p.x, p.y - hd});
    Vec3 c = s.node(i, j);
    Vec3 sum = s.node(i + 1, j) * ae + s.node(i - 1, j) * aw + s.node(i, j + 1) * an +
               s.node(i, j - 1) * as - c * (ae + aw + an + as);
    return sum * (1.0 / (s.dxi * s.dxi));
}

// One implicit-midpoint node update: solves
//   m+ = m - dtau * (m+ + m)/2 x w
// in closed form (Cayley rotation), preserving |m| exactly.
inline Vec3 mpe_node_update(Vec3 m, Vec3 w, double dtau) {
    double c = 0.5 * dtau;
    Vec3 r = m + c * w.cross(m);
    double denom = 1.0 + c * c * w.norm2();
    return (r + c * w.cross(r) + (c * c * w.dot(r)) * w) * (1.0 / denom);
}

// Time integrator for one micro patch: midpoint rule with second-order
// extrapolation of the damped field h(m) = H(m) + alpha m x H(m).
// The first step bootstraps the extrapolation with h^{-1} := h(m^0).
class MicroStepper {
public:
    MicroStepper(const TriMesh& mesh, const NodalField& macro_field, int tri,
                 const MaterialCoefficient& coeff, const MicroConfig& cfg)
        : s_(init_micro(mesh, macro_field, tri, cfg)) {
        dtau_ = cfg.dtau();
        alpha_ = cfg.alpha_micro;
        steps_ = cfg.step_count();
        tabulate(coeff);
        std::size_t nn = s_.mx.size();
        mx2_ = s_.mx; my2_ = s_.my; mz2_ = s_.mz; // boundary values persist in both buffers
        hx_.assign(nn, 0.0); hy_.assign(nn, 0.0); hz_.assign(nn, 0.0);
        hx2_.assign(nn, 0.0); hy2_.assign(nn, 0.0); hz2_.assign(nn, 0.0);
        double e0 = bootstrap_h();

        // Stability monitor. The midpoint update preserves nodal norms, so a
        // violated step bound never overflows; it shreds the state into
        // grid-scale oscillations instead. Those carry exchange energy far
        // above both the initial energy and the scale any eps-oscillatory
        // solution can reach, which is what we test for.
        double max_m0 = 0.0;
        for (double v : s_.init_norm) max_m0 = std::max(max_m0, v);
        double vol = (s_.n * s_.dxi) * (s_.n * s_.dxi);
        double osc = 2.0 * pi * max_m0 / cfg.epsilon;
        energy_cap_ = 50.0 * std::max(e0, 0.0) + coeff.a_max * vol * osc * osc;
    }

    const MicroState& state() const { return s_; }
    int step_index() const { return k_; }
    int total_steps() const { return steps_; }
    double dtau() const { return dtau_; }

    // Advances one MPE step; throws NumericalError when the state leaves the
    // finite range (violated stability bound).
    void step() {
        const int n = s_.n, np = n + 1;
        const double inv2 = 1.0 / (s_.dxi * s_.dxi);
        const double alpha = alpha_, c = 0.5 * dtau_, c2 = c * c;
        double acc = 0.0, mdoth = 0.0;

        const double* __restrict mx = s_.mx.data();
        const double* __restrict my = s_.my.data();
        const double* __restrict mz = s_.mz.data();
        double* __restrict ox = mx2_.data();
        double* __restrict oy = my2_.data();
        double* __restrict oz = mz2_.data();
        const double* __restrict px = hx_.data();
        const double* __restrict py = hy_.data();
        const double* __restrict pz = hz_.data();
        double* __restrict cx = hx2_.data();
        double* __restrict cy = hy2_.data();
        double* __restrict cz = hz2_.data();

        for (int j = 1; j < n; ++j) {
            const double* __restrict axr = ax_.data() + static_cast<std::size_t>(j) * n;
            const double* __restrict ayn = ay_.data() + static_cast<std::size_t>(j) * np;
            const double* __restrict ays = ay_.data() + static_cast<std::size_t>(j - 1) * np;
            const std::size_t row = static_cast<std::size_t>(j) * np;
#pragma omp simd reduction(+ : acc, mdoth)
            for (int i = 1; i < n; ++i) {
                std::size_t k = row + i;
                double ae = axr[i], aw = axr[i - 1], an = ayn[i], as = ays[i];
                double mcx = mx[k], mcy = my[k], mcz = mz[k];
                double Hx = inv2 * (ae * (mx[k + 1] - mcx) + aw * (mx[k - 1] - mcx) +
                                    an * (mx[k + np] - mcx) + as * (mx[k - np] - mcx));
                double Hy = inv2 * (ae * (my[k + 1] - mcy) + aw * (my[k - 1] - mcy) +
                                    an * (my[k + np] - mcy) + as * (my[k - np] - mcy));
                double Hz = inv2 * (ae * (mz[k + 1] - mcz) + aw * (mz[k - 1] - mcz) +
                                    an * (mz[k + np] - mcz) + as * (mz[k - np] - mcz));
                mdoth += mcx * Hx + mcy * Hy + mcz * Hz;
                // h = H + alpha m x H
                double hx = Hx + alpha * (mcy * Hz - mcz * Hy);
                double hy = Hy + alpha * (mcz * Hx - mcx * Hz);
                double hz = Hz + alpha * (mcx * Hy - mcy * Hx);
                cx[k] = hx; cy[k] = hy; cz[k] = hz;
                // w = (3/2) h(m^k) - (1/2) h(m^{k-1})
                double wx = 1.5 * hx - 0.5 * px[k];
                double wy = 1.5 * hy - 0.5 * py[k];
                double wz = 1.5 * hz - 0.5 * pz[k];
                acc += wx + wy + wz;
                // Cayley update.
                double rx = mcx + c * (wy * mcz - wz * mcy);
                double ry = mcy + c * (wz * mcx - wx * mcz);
                double rz = mcz + c * (wx * mcy - wy * mcx);
                double wr = wx * rx + wy * ry + wz * rz;
                double inv = 1.0 / (1.0 + c2 * (wx * wx + wy * wy + wz * wz));
                ox[k] = (rx + c * (wy * rz - wz * ry) + c2 * wr * wx) * inv;
                oy[k] = (ry + c * (wz * rx - wx * rz) + c2 * wr * wy) * inv;
                oz[k] = (rz + c * (wx * ry - wy * rx) + c2 * wr * wz) * inv;
            }
        }
        double energy = -mdoth * s_.dxi * s_.dxi;
        if (!std::isfinite(acc) || energy > energy_cap_)
            throw NumericalError("micro solve unstable at step " + std::to_string(k_ + 1) +
                                 " (time step violates the stability bound dtau <= C dxi^2)");
        s_.mx.swap(mx2_); s_.my.swap(my2_); s_.mz.swap(mz2_);
        hx_.swap(hx2_); hy_.swap(hy2_); hz_.swap(hz2_);
        ++k_;
    }

private:
    MicroState s_;
    std::vector<double> mx2_, my2_, mz2_;
    std::vector<double> hx_, hy_, hz_;    // h(m^{k-1})
    std::vector<double> hx2_, hy2_, hz2_; // scratch for h(m^k)
    std::vector<double> ax_, ay_;         // half-grid coefficient tables
    double dtau_ = 0.0, alpha_ = 1.0, energy_cap_ = 0.0;
    int steps_ = 0, k_ = 0;

    void tabulate(const MaterialCoefficient& coeff) {
        const int n = s_.n, np = n + 1;
        double half = 0.5 * n * s_.dxi;
        double x0 = s_.center.x - half, y0 = s_.center.y - half, d = s_.dxi;
        ax_.resize(static_cast<std::size_t>(np) * n);
        ay_.resize(static_cast<std::size_t>(n) * np);
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i < n; ++i)
                ax_[static_cast<std::size_t>(j) * n + i] =
                    coeff.eval({x0 + (i + 0.5) * d, y0 + j * d});
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= n; ++i)
                ay_[static_cast<std::size_t>(j) * np + i] =
                    coeff.eval({x0 + i * d, y0 + (j + 0.5) * d});
    }

    // Fills h(m^0); returns the initial exchange-energy monitor value.
    double bootstrap_h() {
        const int n = s_.n, np = n + 1;
        const double inv2 = 1.0 / (s_.dxi * s_.dxi);
        double mdoth = 0.0;
        for (int j = 1; j < n; ++j) {
            const double* axr = ax_.data() + static_cast<std::size_t>(j) * n;
            const double* ayn = ay_.data() + static_cast<std::size_t>(j) * np;
            const double* ays = ay_.data() + static_cast<std::size_t>(j - 1) * np;
            for (int i = 1; i < n; ++i) {
                std::size_t k = static_cast<std::size_t>(j) * np + i;
                double ae = axr[i], aw = axr[i - 1], an = ayn[i], as = ays[i];
                double mcx = s_.mx[k], mcy = s_.my[k], mcz = s_.mz[k];
                double Hx = inv2 * (ae * (s_.mx[k + 1] - mcx) + aw * (s_.mx[k - 1] - mcx) +
                                    an * (s_.mx[k + np] - mcx) + as * (s_.mx[k - np] - mcx));
                double Hy = inv2 * (ae * (s_.my[k + 1] - mcy) + aw * (s_.my[k - 1] - mcy) +
                                    an * (s_.my[k + np] - mcy) + as * (s_.my[k - np] - mcy));
                double Hz = inv2 * (ae * (s_.mz[k + 1] - mcz) + aw * (s_.mz[k - 1] - mcz) +
                                    an * (s_.mz[k + np] - mcz) + as * (s_.mz[k - np] - mcz));
                hx_[k] = Hx + alpha_ * (mcy * Hz - mcz * Hy);
                hy_[k] = Hy + alpha_ * (mcz * Hx - mcx * Hz);
                hz_[k] = Hz + alpha_ * (mcx * Hy - mcy * Hx);
                mdoth += mcx * Hx + mcy * Hy + mcz * Hz;
            }
        }
        return -mdoth * s_.dxi * s_.dxi;
    }
};

using MicroObserver = std::function<void(int step, double tau, const MicroState&)>;

// Full micro evolution; the observer sees every time level including tau = 0,
// so quadrature in time can stream without storing the trajectory.
inline MicroState solve_micro(const TriMesh& mesh, const NodalField& macro_field,
                              int tri, const MaterialCoefficient& coeff,
                              const MicroConfig& cfg,
                              const MicroObserver& observer = nullptr) {
    MicroStepper stepper(mesh, macro_field, tri, coeff, cfg);
    if (observer) observer(0, 0.0, stepper.state());
    for (int k = 1; k <= stepper.total_steps(); ++k) {
        stepper.step();
        if (observer) observer(k, k * stepper.dtau(), stepper.state());
    }
    return stepper.state();
}

} // namespace msmag

#endif
