#pragma once

#include <map>
#include <vector>

#include "virakdv/heisenberg.hpp"

namespace virakdv {

/// Cohomological data of a smooth projective target with trivial odd
/// cohomology and vanishing first Chern class.
struct VarietyData {
    int r = 0;                                   // complex dimension
    std::map<std::pair<int, int>, int> hodge;    // (p, q) -> h^{p,q}
    std::vector<std::pair<int, int>> basis;      // per class (p_alpha, q_alpha)
    PairingPtr eta;                              // Poincare pairing
    std::vector<Scalar> mu;                      // p_alpha - r/2, filled by validation
    Scalar hbar{1, 2};

    int dim() const { return static_cast<int>(basis.size()); }
};

/// Integral of the top Chern class at desk scale: the topological Euler
/// characteristic from the Hodge numbers.
inline Scalar euler_characteristic(const VarietyData& v) {
    Scalar chi(0);
    for (const auto& [pq, h] : v.hodge) {
        int sign = ((pq.first + pq.second) % 2 == 0) ? 1 : -1;
        chi += Scalar(sign * h);
    }
    return chi;
}

inline VarietyData validate_variety(VarietyData v) {
    if (v.r < 0) throw ConfigError("variety dimension must be non-negative");
    if (v.hbar.sign() <= 0) throw ConfigError("hbar must be positive");
    int total = 0;
    for (const auto& [pq, h] : v.hodge) {
        if (h < 0) throw ConfigError("negative Hodge number");
        if ((pq.first + pq.second) % 2 != 0 && h != 0)
            throw ConstraintViolation("trivial-odd-cohomology");
        total += h;
    }
    if (static_cast<int>(v.basis.size()) != total)
        throw ConstraintViolation("basis-cardinality");
    std::map<std::pair<int, int>, int> counts;
    for (const auto& pq : v.basis) counts[pq]++;
    for (const auto& [pq, c] : counts) {
        auto it = v.hodge.find(pq);
        if (it == v.hodge.end() || it->second != c) throw ConstraintViolation("basis-cardinality");
    }
    if (v.basis.empty() || v.basis.front() != std::pair<int, int>{0, 0})
        throw ConstraintViolation("unit-class-first");
    if (!v.eta || v.eta->dim() != v.dim()) throw DimensionMismatch("pairing dimension");

    v.mu.clear();
    for (const auto& [p, q] : v.basis) v.mu.push_back(Scalar(2 * p - v.r, 2));
    const Matrix& eta = v.eta->eta();
    for (int a = 0; a < v.dim(); ++a)
        for (int b = 0; b < v.dim(); ++b)
            if (!eta(a, b).is_zero() && !(v.mu[a] + v.mu[b]).is_zero())
                throw ConstraintViolation("mua+mb=0");
    return v;
}

/// sqrt(2 hbar) as an exact rational; the variable substitution between the
/// two gradings needs it.
inline Scalar sqrt_two_hbar(const Scalar& hbar) {
    auto root = (Scalar(2) * hbar).sqrt_exact();
    if (!root) throw NonSquareHbar("2*hbar = " + (Scalar(2) * hbar).str() + " is not a rational square");
    return *root;
}

} // namespace virakdv
