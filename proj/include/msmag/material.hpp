#ifndef MSMAG_MATERIAL_HPP
#define MSMAG_MATERIAL_HPP

#include <cmath>
#include <map>
#include <string>

#include "msmag/common.hpp"
#include "msmag/vec.hpp"

namespace msmag {

// Oscillatory exchange coefficient a^eps(x) = a(x, x/eps). The closed registry
// covers every coefficient the experiments use:
//   constant        a = c
//   laminate        a = base + amp * sin(2 pi y1)
//   sine-product    a = (1.1 + .25 sin(2 pi y1))(1.1 + .25 sin(2 pi y2))
//                       + .7 cos(2 pi (y1 - y2))
//   exp-cosine      a = exp[cos(2 pi (y1 + y2)) - .25 sin(2 pi y1)]
//   modulated-sine  a = 1.1 + .5 [sin(2 pi y1) + sin(2 pi y2)] cos(2 pi (x1 + x2))
// where y = x/eps is the fast variable; modulated-sine is locally periodic in
// the slow variable x. New coefficients plug in through the same closed-form
// cell(y, x) evaluator.
class MaterialCoefficient {
public:
    enum class Kind { constant, laminate, sine_product, exp_cosine, modulated_sine };

    Kind kind = Kind::constant;
    double epsilon = 1.0;
    double c0 = 1.0, c1 = 0.0; // closed-form parameters (constant value; laminate base/amp)
    double a_min = 0.0, a_max = 0.0;

    MaterialCoefficient() { estimate_bounds(); }

    MaterialCoefficient(Kind k, double eps, double p0 = 1.0, double p1 = 0.0)
        : kind(k), epsilon(eps), c0(p0), c1(p1) {
        if (kind != Kind::constant && !(epsilon > 0.0 && epsilon < 1.0))
            throw ConfigError("coefficient scale eps must lie in (0,1)");
        estimate_bounds();
    }

    bool locally_periodic() const { return kind == Kind::modulated_sine; }

    // Unit-cell function a(y) at fast variable y, slow variable frozen at x.
    double cell(Vec2 y, Vec2 slow = {0.0, 0.0}) const {
        switch (kind) {
        case Kind::constant:
            return c0;
        case Kind::laminate:
            return c0 + c1 * std::sin(2.0 * pi * y.x);
        case Kind::sine_product:
            return (1.1 + 0.25 * std::sin(2.0 * pi * y.x)) *
                       (1.1 + 0.25 * std::sin(2.0 * pi * y.y)) +
                   0.7 * std::cos(2.0 * pi * (y.x - y.y));
        case Kind::exp_cosine:
            return std::exp(std::cos(2.0 * pi * (y.x + y.y)) -
                            0.25 * std::sin(2.0 * pi * y.x));
        case Kind::modulated_sine:
            return 1.1 + 0.5 * (std::sin(2.0 * pi * y.x) + std::sin(2.0 * pi * y.y)) *
                             std::cos(2.0 * pi * (slow.x + slow.y));
        }
        return c0;
    }

    // a^eps(x) = a(x, x/eps).
    double eval(Vec2 x) const {
        if (kind == Kind::constant) return c0;
        return cell({x.x / epsilon, x.y / epsilon}, x);
    }

    // Mean of a(y) over one period cell; defined for coefficients with a
    // single cell function only. Periodic trapezoid sums converge spectrally;
    // refine until successive doublings agree to 1e-9.
    double average() const {
        if (locally_periodic())
            throw ConfigError("average() undefined for a locally periodic coefficient");
        if (kind == Kind::constant) return c0;
        double prev = cell_mean(16);
        for (int n = 32; n <= 4096; n *= 2) {
            double cur = cell_mean(n);
            if (std::abs(cur - prev) <= 1e-9) return cur;
            prev = cur;
        }
        return prev;
    }

private:
    double cell_mean(int n) const {
        double s = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                s += cell({(i + 0.5) / n, (j + 0.5) / n});
        return s / (static_cast<double>(n) * n);
    }

    // Dense sampling of one period cell (and of the slow variable for locally
    // periodic coefficients); construction fails if ellipticity is lost.
    void estimate_bounds() {
        if (kind == Kind::constant) {
            a_min = a_max = c0;
        } else if (locally_periodic()) {
            a_min = 1e300;
            a_max = -1e300;
            const int ns = 32, nf = 32;
            for (int sj = 0; sj < ns; ++sj)
                for (int si = 0; si < ns; ++si) {
                    Vec2 slow{(si + 0.5) / ns, (sj + 0.5) / ns};
                    for (int j = 0; j < nf; ++j)
                        for (int i = 0; i < nf; ++i) {
                            double v = cell({(i + 0.5) / nf, (j + 0.5) / nf}, slow);
                            a_min = std::min(a_min, v);
                            a_max = std::max(a_max, v);
                        }
                }
        } else {
            a_min = 1e300;
            a_max = -1e300;
            const int n = 1000; // 1e6 samples per cell
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    double v = cell({(i + 0.5) / n, (j + 0.5) / n});
                    a_min = std::min(a_min, v);
                    a_max = std::max(a_max, v);
                }
        }
        if (!(a_min > 0.0))
            throw ConfigError("coefficient is not uniformly positive (sampled min " +
                              std::to_string(a_min) + ")");
    }
};

// Registry lookup by config name. Parameters c0/c1 apply to the constant and
// laminate kinds.
inline MaterialCoefficient make_coefficient(const std::string& name, double epsilon,
                                            const std::map<std::string, double>& params = {}) {
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    using K = MaterialCoefficient::Kind;
    if (name == "constant")
        return MaterialCoefficient(K::constant, epsilon > 0 ? epsilon : 0.5, get("value", 1.0));
    if (name == "laminate")
        return MaterialCoefficient(K::laminate, epsilon, get("base", 2.0), get("amp", 1.0));
    if (name == "sine-product") return MaterialCoefficient(K::sine_product, epsilon);
    if (name == "exp-cosine") return MaterialCoefficient(K::exp_cosine, epsilon);
    if (name == "modulated-sine") return MaterialCoefficient(K::modulated_sine, epsilon);
    throw ConfigError("unknown coefficient: " + name);
}

} // namespace msmag

#endif
