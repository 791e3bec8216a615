#ifndef MSMAG_FIELD_HPP
#define MSMAG_FIELD_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "msmag/common.hpp"
#include "msmag/vec.hpp"

namespace msmag {

// Per-node 3-vector field. `normalized` marks magnetization states whose
// nodal vectors are unit length; stage values and increments leave it false.
struct NodalField {
    std::vector<Vec3> values;
    bool normalized = false;

    NodalField() = default;
    explicit NodalField(std::size_t n, Vec3 fill = {}) : values(n, fill) {}

    std::size_t size() const { return values.size(); }
};

inline constexpr double unit_norm_tol = 1e-12;

// Throws if the field claims to be normalized but a nodal vector is not unit.
inline void check_normalized(const NodalField& f) {
    if (!f.normalized) return;
    for (std::size_t j = 0; j < f.values.size(); ++j)
        if (std::abs(f.values[j].norm() - 1.0) > unit_norm_tol)
            throw NumericalError("nodal vector " + std::to_string(j) +
                                 " violates unit norm");
}

// Nodal renormalization; a vanishing vector signals blow-up.
inline void normalize_nodes(NodalField& f) {
    for (std::size_t j = 0; j < f.values.size(); ++j) {
        double n = f.values[j].norm();
        if (n < 1e-12)
            throw NumericalError("zero-length nodal vector " + std::to_string(j) +
                                 " at renormalization");
        f.values[j] *= 1.0 / n;
    }
    f.normalized = true;
}

} // namespace msmag

#endif
