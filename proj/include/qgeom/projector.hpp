#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "qgeom/common.hpp"
#include "qgeom/model.hpp"

namespace qgeom {

// Bands are addressed by 1-based index in ascending-energy order.
// degeneracy_count == 1 sums single-band projectors over `indices`;
// degeneracy_count == indices.size() > 1 uses the degenerate-block
// construction and requires the selected bands to share one eigenvalue.
struct BandSelection {
    std::vector<int> indices;
    int degeneracy_count = 1;

    static BandSelection single(int index) { return {{index}, 1}; }
    static BandSelection lower() { return single(1); }
    static BandSelection multi(std::vector<int> idx) { return {std::move(idx), 1}; }
    static BandSelection degenerate(std::vector<int> idx) {
        BandSelection b{std::move(idx), 1};
        b.degeneracy_count = static_cast<int>(b.indices.size());
        return b;
    }
};

// Gauge-invariant eigenprojector jet.
template <typename S>
struct ProjectorJetT {
    using Mat = typename HamiltonianJetT<S>::Mat;
    int n_bands = 0;
    Mat P;
    std::array<Mat, 2> dP;
    std::array<std::array<Mat, 2>, 2> d2P;
};

using ProjectorJet = ProjectorJetT<double>;

inline void validate_selection(const BandSelection& band, int n_bands) {
    if (band.indices.empty()) throw PreconditionError("band selection is empty");
    for (std::size_t i = 0; i < band.indices.size(); ++i) {
        const int idx = band.indices[i];
        if (idx < 1 || idx > n_bands)
            throw PreconditionError("band index " + std::to_string(idx) + " outside [1, " +
                                    std::to_string(n_bands) + "]");
        if (i > 0 && band.indices[i] <= band.indices[i - 1])
            throw PreconditionError("band indices must be strictly ascending");
    }
    const int d = band.degeneracy_count;
    if (d != 1 && d != static_cast<int>(band.indices.size()))
        throw PreconditionError("degeneracy_count must be 1 or the selection size");
}

// Ascending eigenvalues of jet.H.
template <typename S>
inline Eigen::Vector<S, Eigen::Dynamic> eigenvalues_t(const HamiltonianJetT<S>& jet) {
    Eigen::SelfAdjointEigenSolver<typename HamiltonianJetT<S>::Mat> es(jet.H,
                                                                       Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("eigensolver failed");
    return es.eigenvalues();
}

inline Eigen::VectorXd eigenvalues(const HamiltonianJet& jet) { return eigenvalues_t(jet); }

namespace detail {

// Per-k scratch for the symmetric-polynomial recursions: cached powers H^n
// with first and second derivatives, power sums p_n, band powers E^n, and
// the elementary symmetric polynomials e_k of the non-selected eigenvalues.
template <typename S>
struct SymmetricPolyState {
    using Mat = typename HamiltonianJetT<S>::Mat;
    std::vector<Mat> Hpow;                                // H^0 .. H^M
    std::array<std::vector<Mat>, 2> dHpow;                // d_mu H^n
    std::array<std::array<std::vector<Mat>, 2>, 2> d2Hpow;
    std::vector<S> p;                                     // tr H^n
    std::array<std::vector<S>, 2> dp;
    std::array<std::array<std::vector<S>, 2>, 2> d2p;
    std::vector<S> e;                                     // e_k, k = 0..M
    std::array<std::vector<S>, 2> de;
    std::array<std::array<std::vector<S>, 2>, 2> d2e;
};

template <typename Mat>
inline auto re_trace(const Mat& m) {
    return m.trace().real();
}

template <typename S>
inline void build_power_tables(SymmetricPolyState<S>& st, const HamiltonianJetT<S>& jet,
                               int max_pow) {
    using Mat = typename HamiltonianJetT<S>::Mat;
    const int n = jet.n_bands;
    st.Hpow.resize(max_pow + 1);
    st.Hpow[0] = Mat::Identity(n, n);
    for (int m = 1; m <= max_pow; ++m) st.Hpow[m] = st.Hpow[m - 1] * jet.H;

    for (int mu = 0; mu < 2; ++mu) {
        st.dHpow[mu].resize(max_pow + 1);
        st.dHpow[mu][0] = Mat::Zero(n, n);
        for (int m = 1; m <= max_pow; ++m)
            st.dHpow[mu][m] = st.dHpow[mu][m - 1] * jet.H + st.Hpow[m - 1] * jet.dH[mu];
    }
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = mu; nu < 2; ++nu) {
            auto& tab = st.d2Hpow[mu][nu];
            tab.resize(max_pow + 1);
            tab[0] = Mat::Zero(n, n);
            for (int m = 1; m <= max_pow; ++m)
                tab[m] = tab[m - 1] * jet.H + st.dHpow[nu][m - 1] * jet.dH[mu] +
                         st.dHpow[mu][m - 1] * jet.dH[nu] + st.Hpow[m - 1] * jet.d2H[mu][nu];
        }
    st.d2Hpow[1][0] = st.d2Hpow[0][1];

    st.p.resize(max_pow + 1);
    for (int m = 0; m <= max_pow; ++m) st.p[m] = re_trace(st.Hpow[m]);
    for (int mu = 0; mu < 2; ++mu) {
        st.dp[mu].resize(max_pow + 1);
        for (int m = 0; m <= max_pow; ++m) st.dp[mu][m] = re_trace(st.dHpow[mu][m]);
    }
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu) {
            st.d2p[mu][nu].resize(max_pow + 1);
            for (int m = 0; m <= max_pow; ++m)
                st.d2p[mu][nu][m] = re_trace(st.d2Hpow[mu][nu][m]);
        }
}

// Projector jet for one isolated eigenvalue block (d bands sharing energy
// e_band, all other bands separated).  Implements the polynomial form
// P = d K / tr K with K = sum_k (-1)^k e_k H^(M-k), M = N - d, where the e_k
// obey the Newton-identity recursion in q_n = p_n - d E^n, and first/second
// derivatives follow by differentiating the recursion.  The derivative of
// d E^n is evaluated as tr[(d_mu H^n) P], which closes the ordering: P first,
// then dP, then the second-derivative layer.
template <typename S>
inline ProjectorJetT<S> block_projector_jet(const HamiltonianJetT<S>& jet, S e_band, int d_deg) {
    using Mat = typename HamiltonianJetT<S>::Mat;
    const int n = jet.n_bands;
    const int M = n - d_deg;
    SymmetricPolyState<S> st;
    build_power_tables(st, jet, M);

    std::vector<S> En(M + 1);  // E^n
    En[0] = S(1);
    for (int m = 1; m <= M; ++m) En[m] = En[m - 1] * e_band;

    auto q = [&](int m) { return st.p[m] - S(d_deg) * En[m]; };

    st.e.assign(M + 1, S(0));
    st.e[0] = S(1);
    for (int kk = 1; kk <= M; ++kk) {
        S acc(0);
        S sign(1);
        for (int m = 1; m <= kk; ++m) {
            acc += sign * q(m) * st.e[kk - m];
            sign = -sign;
        }
        st.e[kk] = acc / S(kk);
    }

    ProjectorJetT<S> pj;
    pj.n_bands = n;
    Mat K = Mat::Zero(n, n);
    {
        S sign(1);
        for (int kk = 0; kk <= M; ++kk) {
            K += sign * st.e[kk] * st.Hpow[M - kk];
            sign = -sign;
        }
    }
    const S trK = re_trace(K);
    if (std::abs(trK) < S(1e-12))
        throw NumericalBreakdownError("trace of the projector numerator underflowed",
                                      double(trK));
    pj.P = (S(d_deg) / trK) * K;

    // first derivatives
    std::array<std::vector<S>, 2> dEn;  // d_mu (d * E^n)
    for (int mu = 0; mu < 2; ++mu) {
        dEn[mu].resize(M + 1);
        for (int m = 0; m <= M; ++m)
            dEn[mu][m] = (st.dHpow[mu][m] * pj.P).trace().real();
    }
    for (int mu = 0; mu < 2; ++mu) {
        st.de[mu].assign(M + 1, S(0));
        for (int kk = 1; kk <= M; ++kk) {
            S acc(0);
            S sign(1);
            for (int m = 1; m <= kk; ++m) {
                const S dq = st.dp[mu][m] - dEn[mu][m];
                acc += sign * (dq * st.e[kk - m] + q(m) * st.de[mu][kk - m]);
                sign = -sign;
            }
            st.de[mu][kk] = acc / S(kk);
        }
    }
    std::array<Mat, 2> dK;
    std::array<S, 2> tr_dK;
    for (int mu = 0; mu < 2; ++mu) {
        dK[mu] = Mat::Zero(n, n);
        S sign(1);
        for (int kk = 0; kk <= M; ++kk) {
            dK[mu] += sign * (st.de[mu][kk] * st.Hpow[M - kk] + st.e[kk] * st.dHpow[mu][M - kk]);
            sign = -sign;
        }
        tr_dK[mu] = re_trace(dK[mu]);
        pj.dP[mu] = (S(d_deg) * dK[mu] - tr_dK[mu] * pj.P) / trK;
    }

    // second derivatives (mu <= nu, mirrored for exact index symmetry)
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = mu; nu < 2; ++nu) {
            std::vector<S> d2En(M + 1);  // d_mu d_nu (d * E^n)
            for (int m = 0; m <= M; ++m)
                d2En[m] = (st.d2Hpow[mu][nu][m] * pj.P).trace().real() +
                          (st.dHpow[mu][m] * pj.dP[nu]).trace().real();
            auto& d2e = st.d2e[mu][nu];
            d2e.assign(M + 1, S(0));
            for (int kk = 1; kk <= M; ++kk) {
                S acc(0);
                S sign(1);
                for (int m = 1; m <= kk; ++m) {
                    const S dq_mu = st.dp[mu][m] - dEn[mu][m];
                    const S dq_nu = st.dp[nu][m] - dEn[nu][m];
                    const S d2q = st.d2p[mu][nu][m] - d2En[m];
                    acc += sign * (d2q * st.e[kk - m] + dq_mu * st.de[nu][kk - m] +
                                   dq_nu * st.de[mu][kk - m] + q(m) * d2e[kk - m]);
                    sign = -sign;
                }
                d2e[kk] = acc / S(kk);
            }
            Mat d2K = Mat::Zero(n, n);
            S sign(1);
            for (int kk = 0; kk <= M; ++kk) {
                d2K += sign * (d2e[kk] * st.Hpow[M - kk] + st.e[kk] * st.d2Hpow[mu][nu][M - kk] +
                               st.de[mu][kk] * st.dHpow[nu][M - kk] +
                               st.de[nu][kk] * st.dHpow[mu][M - kk]);
                sign = -sign;
            }
            pj.d2P[mu][nu] = (S(d_deg) * d2K - re_trace(d2K) * pj.P -
                              tr_dK[mu] * pj.dP[nu] - tr_dK[nu] * pj.dP[mu]) /
                             trK;
        }
    pj.d2P[1][0] = pj.d2P[0][1];
    return pj;
}

}  // namespace detail

// Eigenprojector jet by the polynomial construction.  `energies` must be the
// ascending eigenvalues of jet.H.  Gap tolerances scale with the spectral
// range: eps_gap = eps_deg = 1e-8 * (E_max - E_min).
inline ProjectorJet polynomial_projector_jet(const HamiltonianJet& jet, const BandSelection& band,
                                             const Eigen::VectorXd& energies) {
    const int n = jet.n_bands;
    validate_selection(band, n);
    if (energies.size() != n)
        throw PreconditionError("energies length does not match n_bands");

    const double range = energies(n - 1) - energies(0);
    const double eps_gap = 1e-8 * range;
    const double eps_deg = 1e-8 * range;

    std::vector<bool> selected(n + 1, false);
    for (int idx : band.indices) selected[idx] = true;

    if (band.degeneracy_count == 1) {
        ProjectorJet total;
        bool first = true;
        for (int alpha : band.indices) {
            double gap = std::numeric_limits<double>::infinity();
            for (int beta = 1; beta <= n; ++beta)
                if (beta != alpha)
                    gap = std::min(gap, std::fabs(energies(alpha - 1) - energies(beta - 1)));
            if (gap <= eps_gap)
                throw NearDegeneracyError("band " + std::to_string(alpha) +
                                              " is nearly degenerate (gap " +
                                              std::to_string(gap) + ")",
                                          gap);
            ProjectorJet pj = detail::block_projector_jet(jet, energies(alpha - 1), 1);
            if (first) {
                total = std::move(pj);
                first = false;
            } else {
                total.P += pj.P;
                for (int mu = 0; mu < 2; ++mu) total.dP[mu] += pj.dP[mu];
                for (int mu = 0; mu < 2; ++mu)
                    for (int nu = 0; nu < 2; ++nu) total.d2P[mu][nu] += pj.d2P[mu][nu];
            }
        }
        return total;
    }

    // degenerate block: selected bands must share one eigenvalue
    const int d = band.degeneracy_count;
    double e_min = energies(band.indices.front() - 1);
    double e_max = energies(band.indices.back() - 1);
    for (int alpha : band.indices) {
        e_min = std::min(e_min, energies(alpha - 1));
        e_max = std::max(e_max, energies(alpha - 1));
    }
    if (e_max - e_min > eps_deg)
        throw NearDegeneracyError("selected bands are not mutually degenerate (spread " +
                                      std::to_string(e_max - e_min) + ")",
                                  e_max - e_min);
    double e_band = 0.0;
    for (int alpha : band.indices) e_band += energies(alpha - 1);
    e_band /= d;
    double gap = std::numeric_limits<double>::infinity();
    for (int beta = 1; beta <= n; ++beta)
        if (!selected[beta]) gap = std::min(gap, std::fabs(e_band - energies(beta - 1)));
    if (gap <= eps_gap)
        throw NearDegeneracyError(
            "degenerate block is not separated from the rest (gap " + std::to_string(gap) + ")",
            gap);
    return detail::block_projector_jet(jet, e_band, d);
}

// Spectral finite-difference oracle: P from the eigendecomposition, dP and
// d2P from 4th-order central differences of P on a 5x5 stencil.  Independent
// of the polynomial route; valid because the projector is gauge-invariant.
inline ProjectorJet spectral_projector_jet(const ModelSpec& spec, const KPoint& k,
                                           const BandSelection& band, double h) {
    if (!(h >= 1e-6 && h <= 1e-3))
        throw PreconditionError("spectral stencil step h must lie in [1e-6, 1e-3]");
    const int n = spec.n_bands;
    validate_selection(band, n);

    std::vector<bool> selected(n + 1, false);
    for (int idx : band.indices) selected[idx] = true;

    auto projector_at = [&](double kx, double ky) {
        HamiltonianJet jet = eval_jet(spec, {kx, ky});
        Eigen::SelfAdjointEigenSolver<Matrix> es(jet.H);
        if (es.info() != Eigen::Success) throw Error("eigensolver failed");
        const auto& ev = es.eigenvalues();
        const double range = std::max(ev(n - 1) - ev(0), 1e-300);
        double gap = std::numeric_limits<double>::infinity();
        for (int a = 1; a <= n; ++a)
            for (int b = 1; b <= n; ++b)
                if (selected[a] && !selected[b])
                    gap = std::min(gap, std::fabs(ev(a - 1) - ev(b - 1)));
        if (gap <= 1e-8 * range)
            throw StencilCrossingError(
                "eigenvalue crossing across the finite-difference stencil (gap " +
                std::to_string(gap) + ")");
        Matrix P = Matrix::Zero(n, n);
        for (int idx : band.indices) {
            const auto v = es.eigenvectors().col(idx - 1);
            P += v * v.adjoint();
        }
        return P;
    };

    // 5x5 stencil values
    std::array<std::array<Matrix, 5>, 5> grid;  // grid[a][b] at k + ((a-2)h, (b-2)h)
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
            grid[a][b] = projector_at(k.kx + (a - 2) * h, k.ky + (b - 2) * h);

    auto d1 = [&](auto&& f) -> Matrix {  // 4th-order first derivative over offsets -2..2
        return (f(-2) - 8.0 * f(-1) + 8.0 * f(1) - f(2)) / (12.0 * h);
    };
    auto d2 = [&](auto&& f) -> Matrix {  // 4th-order second derivative
        return (-f(-2) + 16.0 * f(-1) - 30.0 * f(0) + 16.0 * f(1) - f(2)) / (12.0 * h * h);
    };

    ProjectorJet pj;
    pj.n_bands = n;
    pj.P = grid[2][2];
    pj.dP[0] = d1([&](int a) { return grid[a + 2][2]; });
    pj.dP[1] = d1([&](int b) { return grid[2][b + 2]; });
    pj.d2P[0][0] = d2([&](int a) { return grid[a + 2][2]; });
    pj.d2P[1][1] = d2([&](int b) { return grid[2][b + 2]; });
    pj.d2P[0][1] = d1([&](int a) {
        return d1([&](int b) { return grid[a + 2][b + 2]; });
    });
    pj.d2P[1][0] = pj.d2P[0][1];
    return pj;
}

// Convenience: eigenvalues + polynomial jet at one k.
inline ProjectorJet projector_jet_at(const ModelSpec& spec, const BandSelection& band,
                                     const KPoint& k) {
    HamiltonianJet jet = eval_jet(spec, k);
    return polynomial_projector_jet(jet, band, eigenvalues(jet));
}

}  // namespace qgeom
