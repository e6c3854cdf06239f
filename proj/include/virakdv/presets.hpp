#pragma once

#include "virakdv/fock.hpp"
#include "virakdv/gw_data.hpp"
#include "virakdv/virasoro.hpp"

namespace virakdv {

/// Quantizes every generator of the extension of the given data.
inline std::map<int, FockOperator> quantized_family(const SL2Data& data, int K, int M) {
    VirasoroRep rep = extend_to_W(data, K, M);
    std::map<int, FockOperator> ops;
    for (const auto& [k, g] : rep.gens) ops.emplace(k, quantize(g, *data.pairing));
    return ops;
}

namespace detail {

inline QuadOperator dim1_lowering(const PairingPtr& pairing, const Scalar& lin, const Scalar& qq,
                                  const Scalar& band, int M) {
    QuadParts parts;
    parts.linear = Matrix(1, 1, {lin});
    parts.qq = Matrix(1, 1, {qq});
    for (int j = 3; j <= M; j += 2) parts.qp[j] = Matrix(1, 1, {band});
    return make_typed(-1, pairing, parts, M);
}

} // namespace detail

/// Normalization used by the coefficient tables of the recursive solver:
/// quantizes to s d_1 + (1/2) t_1^2 + ((j+2)/2) t_{j+2} d_j and carries the
/// +1/16 on L_0.
inline SL2Data canonical1d_data(const Scalar& s, int M) {
    auto pairing = make_pairing(Matrix::identity(1));
    QuadOperator F = detail::dim1_lowering(pairing, s, Scalar(1, 2), Scalar(1, 2), M);
    return make_sl2_data(pairing, F, Scalar(-1, 8), Matrix(1, 1, {Scalar(-1)}),
                         Matrix(1, 1, {Scalar(-1, 8)}));
}

/// Scale-canonical normalization: quantizes to s d_1 + (1/4) t_1^2 +
/// ((j+2)/2) t_{j+2} d_j, the fixed point of canonical rescaling. At
/// s = -1/2 its constraint solution is the KdV tau function in the
/// double-factorial variables.
inline SL2Data wk1d_data(const Scalar& s, int M) {
    auto pairing = make_pairing(Matrix::identity(1));
    QuadOperator F = detail::dim1_lowering(pairing, s, Scalar(1, 4), Scalar(1, 2), M);
    return make_sl2_data(pairing, F, Scalar(-1, 8), Matrix(1, 1, {Scalar(-1)}),
                         Matrix(1, 1, {Scalar(-1, 4)}));
}

/// One-point target space: a single even class in degree zero.
inline VarietyData point_variety(const Scalar& hbar = Scalar(1, 2)) {
    VarietyData v;
    v.r = 0;
    v.hodge[{0, 0}] = 1;
    v.basis = {{0, 0}};
    v.eta = make_pairing(Matrix::identity(1));
    v.hbar = hbar;
    return validate_variety(std::move(v));
}

/// Two even degree-zero classes with a hyperbolic pairing; the smallest data
/// whose operators split into two one-dimensional factors only after a basis
/// change.
inline VarietyData gw2dim_variety(const Scalar& hbar = Scalar(1, 2)) {
    VarietyData v;
    v.r = 0;
    v.hodge[{0, 0}] = 2;
    v.basis = {{0, 0}, {0, 0}};
    Matrix eta(2, 2);
    eta(0, 1) = Scalar(1);
    eta(1, 0) = Scalar(1);
    v.eta = make_pairing(eta);
    v.hbar = hbar;
    return validate_variety(std::move(v));
}

/// K3 surface Hodge data: h^{0,0} = h^{2,0} = h^{0,2} = h^{2,2} = 1 and
/// h^{1,1} = 20, with the pairing coupling dual Hodge pieces.
inline VarietyData k3_variety(const Scalar& hbar = Scalar(1, 2)) {
    VarietyData v;
    v.r = 2;
    v.hodge[{0, 0}] = 1;
    v.hodge[{2, 0}] = 1;
    v.hodge[{0, 2}] = 1;
    v.hodge[{1, 1}] = 20;
    v.hodge[{2, 2}] = 1;
    v.basis.push_back({0, 0});
    v.basis.push_back({2, 0});
    v.basis.push_back({0, 2});
    for (int i = 0; i < 20; ++i) v.basis.push_back({1, 1});
    v.basis.push_back({2, 2});
    const int n = 24;
    Matrix eta(n, n);
    eta(0, n - 1) = Scalar(1);
    eta(n - 1, 0) = Scalar(1);
    eta(1, 2) = Scalar(1);
    eta(2, 1) = Scalar(1);
    for (int i = 3; i < n - 1; ++i) eta(i, i) = Scalar(1);
    v.eta = make_pairing(eta);
    v.hbar = hbar;
    return validate_variety(std::move(v));
}

} // namespace virakdv
