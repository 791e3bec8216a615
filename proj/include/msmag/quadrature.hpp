#ifndef MSMAG_QUADRATURE_HPP
#define MSMAG_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace msmag {

struct Quad1D {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre rule with n nodes, exact for polynomials of degree 2n-1.
// Nodes by Newton iteration on P_n with the Chebyshev-based initial guess.
inline Quad1D gauss_legendre(int n) {
    Quad1D q;
    q.nodes.resize(n);
    q.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.nodes[i] = x;
        q.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return q;
}

// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
template <class F>
double gl_integrate(F&& f, double a, double b, int n) {
    Quad1D q = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += q.weights[i] * f(mid + half * q.nodes[i]);
    return s * half;
}

struct TriQuadPoint {
    double l0, l1, l2; // barycentric coordinates
    double w;          // weight, sums to 1 over the rule
};

// Degree-3 rule (4 points, one negative weight).
inline const std::array<TriQuadPoint, 4>& tri_quad_deg3() {
    static const std::array<TriQuadPoint, 4> rule = {{
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, -27.0 / 48.0},
        {0.6, 0.2, 0.2, 25.0 / 48.0},
        {0.2, 0.6, 0.2, 25.0 / 48.0},
        {0.2, 0.2, 0.6, 25.0 / 48.0},
    }};
    return rule;
}

// Degree-4 rule (6 points, all positive).
inline const std::array<TriQuadPoint, 6>& tri_quad_deg4() {
    constexpr double w1 = 0.223381589678011, a1 = 0.445948490915965;
    constexpr double w2 = 0.109951743655322, a2 = 0.091576213509771;
    static const std::array<TriQuadPoint, 6> rule = {{
        {1.0 - 2 * a1, a1, a1, w1},
        {a1, 1.0 - 2 * a1, a1, w1},
        {a1, a1, 1.0 - 2 * a1, w1},
        {1.0 - 2 * a2, a2, a2, w2},
        {a2, 1.0 - 2 * a2, a2, w2},
        {a2, a2, 1.0 - 2 * a2, w2},
    }};
    return rule;
}

} // namespace msmag

#endif
