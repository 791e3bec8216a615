#ifndef MSMAG_UPSCALE_HPP
#define MSMAG_UPSCALE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "msmag/common.hpp"
#include "msmag/homogenize.hpp"
#include "msmag/kernels.hpp"
#include "msmag/micro.hpp"
#include "msmag/parallel.hpp"
#include "msmag/vec.hpp"

namespace msmag {

// Piecewise-constant per-triangle flux (3 x d matrices).
struct FluxField {
    std::vector<Mat32> F;
};

// Kernel-weighted space-time average of a grad(m) over the micro evolution:
// the local flux value replacing grad(M) A^H in the macro scheme.
inline Mat32 compute_flux(const TriMesh& mesh, const NodalField& macro_field, int tri,
                          const MaterialCoefficient& coeff, const MicroConfig& cfg,
                          const Kernel& kx, const Kernel& kt) {
    if (kx.one_sided) throw ConfigError("space averaging kernel must be two-sided");
    if (!kt.one_sided) throw ConfigError("time averaging kernel must be one-sided");
    cfg.validate();

    MicroStepper stepper(mesh, macro_field, tri, coeff, cfg);
    const MicroState& s = stepper.state();
    const int n = s.n, np = n + 1;
    const double d = s.dxi, half = 0.5 * n * d, mu = cfg.mu;

    // Node window |xi| <= mu; centered differences need one interior ring.
    int lo = 0;
    while (lo <= n && -half + lo * d < -mu - 1e-15) ++lo;
    int hi = n - lo;
    if (lo < 1 || hi > n - 1 || lo > hi)
        throw ConfigError("averaging window must stay interior to the micro patch");

    // Trapezoid weights times the scaled kernel, tensorized below.
    std::vector<double> wx(hi - lo + 1);
    for (int i = lo; i <= hi; ++i) {
        double xi = -half + i * d;
        double w = (i == lo || i == hi) ? 0.5 * d : d;
        wx[i - lo] = w * kx.scaled(mu, xi);
    }
    // Combined weight * coefficient at the window nodes (flux integrand uses
    // the node-centered coefficient).
    const int wn = hi - lo + 1;
    std::vector<double> wa(static_cast<std::size_t>(wn) * wn);
    for (int j = lo; j <= hi; ++j)
        for (int i = lo; i <= hi; ++i)
            wa[static_cast<std::size_t>(j - lo) * wn + (i - lo)] =
                wx[i - lo] * wx[j - lo] * coeff.eval(s.coord(i, j));

    const double inv2d = 0.5 / d;
    auto window_sum = [&](const MicroState& st) {
        const double* __restrict mx = st.mx.data();
        const double* __restrict my = st.my.data();
        const double* __restrict mz = st.mz.data();
        double gx0 = 0, gy0 = 0, gz0 = 0, gx1 = 0, gy1 = 0, gz1 = 0;
        for (int j = lo; j <= hi; ++j) {
            const double* __restrict w = wa.data() + static_cast<std::size_t>(j - lo) * wn;
            const std::size_t row = static_cast<std::size_t>(j) * np;
#pragma omp simd reduction(+ : gx0, gy0, gz0, gx1, gy1, gz1)
            for (int i = lo; i <= hi; ++i) {
                std::size_t k = row + i;
                double wk = w[i - lo];
                gx0 += wk * (mx[k + 1] - mx[k - 1]);
                gy0 += wk * (my[k + 1] - my[k - 1]);
                gz0 += wk * (mz[k + 1] - mz[k - 1]);
                gx1 += wk * (mx[k + np] - mx[k - np]);
                gy1 += wk * (my[k + np] - my[k - np]);
                gz1 += wk * (mz[k + np] - mz[k - np]);
            }
        }
        return Mat32{{gx0 * inv2d, gy0 * inv2d, gz0 * inv2d},
                     {gx1 * inv2d, gy1 * inv2d, gz1 * inv2d}};
    };

    const int M = stepper.total_steps();
    const double dtau = stepper.dtau(), eta = cfg.eta;
    Mat32 flux{};
    auto time_weight = [&](int k) {
        double w = (k == 0 || k == M) ? 0.5 * dtau : dtau;
        return w * kt.scaled(eta, k * dtau);
    };
    double w0 = time_weight(0);
    if (w0 != 0.0) flux += window_sum(s) * w0;
    for (int k = 1; k <= M; ++k) {
        stepper.step();
        double w = time_weight(k);
        if (w != 0.0) flux += window_sum(stepper.state()) * w;
    }
    return flux;
}

// Flux on every triangle; micro problems are independent and run on the
// worker pool. Any failure aborts with the triangle index attached.
inline FluxField flux_field(const TriMesh& mesh, const NodalField& macro_field,
                            const MaterialCoefficient& coeff, const MicroConfig& cfg,
                            const Kernel& kx, const Kernel& kt, unsigned workers = 0) {
    FluxField out;
    out.F.assign(mesh.num_triangles(), Mat32{});
    parallel_for(
        mesh.num_triangles(),
        [&](std::size_t t) {
            try {
                out.F[t] = compute_flux(mesh, macro_field, static_cast<int>(t), coeff,
                                        cfg, kx, kt);
            } catch (const std::exception& e) {
                throw NumericalError("flux on triangle " + std::to_string(t) + ": " +
                                     e.what());
            }
        },
        workers);
    return out;
}

struct UpscaleReport {
    double value = 0.0; // swept parameter value
    double error = 0.0; // |F - grad(m_init) A^H|_F
    double residual = 0.0; // error minus the sweep's terminal (saturated) error
    double mu = 0.0, mu_prime = 0.0, eta = 0.0, epsilon = 0.0;
    double h_edge = 0.0;    // shortest edge of the macro triangle (E_norm scale)
    double mu_term = 0.0;   // (eps/mu)^(qx+2), spatial kernel error shape
    double eta_term = 0.0;  // (eps^2/eta)^(qt+1), temporal kernel error shape
};

enum class SweepAxis { eta, mu, mu_prime };

inline SweepAxis sweep_axis_from_name(const std::string& s) {
    if (s == "eta") return SweepAxis::eta;
    if (s == "mu") return SweepAxis::mu;
    if (s == "mu_prime") return SweepAxis::mu_prime;
    throw ConfigError("unknown sweep axis: " + s + " (need eta | mu | mu_prime)");
}

// Upscaling-error study on one macro triangle: vary one micro parameter,
// compare the flux against the frozen-tensor reference at the patch center.
inline std::vector<UpscaleReport> parameter_sweep(SweepAxis axis,
                                                  const std::vector<double>& values,
                                                  const MicroConfig& base,
                                                  const MaterialCoefficient& coeff,
                                                  const TriMesh& mesh,
                                                  const NodalField& macro_field, int tri,
                                                  const Kernel& kx, const Kernel& kt,
                                                  int tensor_resolution = 256,
                                                  unsigned workers = 0) {
    Vec2 center = mesh.element(tri).barycenter;
    HomTensor ref = frozen_tensor(coeff, center, tensor_resolution);
    Mat32 target = p1_gradient(mesh, macro_field, tri) * ref.a;

    double h_edge = std::numeric_limits<double>::max();
    const auto& v = mesh.triangles[tri];
    for (int a = 0; a < 3; ++a)
        h_edge = std::min(h_edge,
                          (mesh.nodes[v[a]] - mesh.nodes[v[(a + 1) % 3]]).norm());

    std::vector<UpscaleReport> reports(values.size());
    parallel_for(
        values.size(),
        [&](std::size_t i) {
            MicroConfig cfg = base;
            switch (axis) {
            case SweepAxis::eta: cfg.eta = values[i]; break;
            case SweepAxis::mu: cfg.mu = values[i]; break;
            case SweepAxis::mu_prime: cfg.mu_prime = values[i]; break;
            }
            Mat32 F = compute_flux(mesh, macro_field, tri, coeff, cfg, kx, kt);
            UpscaleReport r;
            r.value = values[i];
            r.error = (F - target).frobenius();
            r.mu = cfg.mu;
            r.mu_prime = cfg.mu_prime;
            r.eta = cfg.eta;
            r.epsilon = cfg.epsilon;
            r.h_edge = h_edge;
            r.mu_term = std::pow(cfg.epsilon / cfg.mu, kx.q + 2);
            r.eta_term = std::pow(cfg.epsilon * cfg.epsilon / cfg.eta, kt.q + 1);
            reports[i] = r;
        },
        workers);
    for (auto& r : reports) r.residual = r.error - reports.back().error;
    return reports;
}

} // namespace msmag

#endif
