#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "qgeom/basis.hpp"
#include "qgeom/common.hpp"
#include "qgeom/kpoint.hpp"
#include "qgeom/model.hpp"
#include "qgeom/projector.hpp"

namespace qgeom {

// det g below this is treated as a singular (fold) point.
inline constexpr double eps_sing = 1e-8;

// Christoffel symbols of the first kind, Gamma[alpha][beta][gamma],
// symmetric in the last two indices.
using Christoffel = std::array<std::array<std::array<double, 2>, 2>, 2>;

namespace detail {

inline double real_checked(Complex z, double throw_at, const char* what) {
    if (std::fabs(z.imag()) >= throw_at)
        throw HermiticityError(std::string(what) + ": imaginary residue " +
                                   std::to_string(z.imag()),
                               std::fabs(z.imag()));
    return z.real();
}

}  // namespace detail

// g_mn = tr[(d_m P)(d_n P)]; the doubled convention (twice the conventional
// quantum metric) is used throughout.
inline Matrix2 metric_tensor(const ProjectorJet& pj) {
    Matrix2 g;
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = mu; nu < 2; ++nu) {
            const Complex t = (pj.dP[mu] * pj.dP[nu]).trace();
            g(mu, nu) = detail::real_checked(t, 1e-10, "metric_tensor");
            g(nu, mu) = g(mu, nu);
        }
    return g;
}

// Gamma_abc = tr[(d_a P)(d_b d_c P)].
inline Christoffel christoffel_first(const ProjectorJet& pj) {
    Christoffel gamma;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = b; c < 2; ++c) {
                const Complex t = (pj.dP[a] * pj.d2P[b][c]).trace();
                gamma[a][b][c] = detail::real_checked(t, 1e-10, "christoffel_first");
                gamma[a][c][b] = gamma[a][b][c];
            }
    return gamma;
}

// R_1212 from the normal-frame double sum; valid at singular points because
// it never inverts g.
inline double riemann_r1212_normal(const ProjectorJet& pj, const HermitianFrame& frame) {
    const int n = pj.n_bands;
    if (frame.mats.empty() || frame.mats.front().rows() != n)
        throw PreconditionError("riemann_r1212_normal: frame/jet dimension mismatch");
    double r = 0.0;
    for (std::size_t j = frame.tangent_count; j < frame.mats.size(); ++j) {
        const Matrix& nj = frame.mats[j];
        const double xx = trace_dot(pj.d2P[0][0], nj);
        const double yy = trace_dot(pj.d2P[1][1], nj);
        const double xy = trace_dot(pj.d2P[0][1], nj);
        const double yx = trace_dot(pj.d2P[1][0], nj);
        r += xx * yy - xy * yx;
    }
    return r;
}

// R_1212 from the intrinsic formula: derivatives of the Christoffel symbols
// by 4th-order finite differences over k plus the Gamma.Gamma contraction.
// Requires an invertible metric at k.
inline double riemann_r1212_intrinsic(const ModelSpec& spec, const BandSelection& band,
                                      const KPoint& k, double fd_step = 1e-4) {
    const ProjectorJet pj = projector_jet_at(spec, band, k);
    const Matrix2 g = metric_tensor(pj);
    const double det_g = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    if (det_g < eps_sing)
        throw SingularMetricError("riemann_r1212_intrinsic: metric is singular (det g = " +
                                      std::to_string(det_g) + ")",
                                  det_g);
    const Christoffel gamma = christoffel_first(pj);

    const double h = fd_step;
    auto gamma_at = [&](double kx, double ky) {
        return christoffel_first(projector_jet_at(spec, band, {kx, ky}));
    };
    std::array<Christoffel, 2> dgamma;  // dgamma[mu][a][b][c] = d_mu Gamma_abc
    for (int mu = 0; mu < 2; ++mu) {
        std::array<Christoffel, 4> s;  // offsets -2h, -h, +h, +2h
        const double ox = (mu == 0) ? 1.0 : 0.0;
        const double oy = (mu == 1) ? 1.0 : 0.0;
        s[0] = gamma_at(k.kx - 2 * h * ox, k.ky - 2 * h * oy);
        s[1] = gamma_at(k.kx - h * ox, k.ky - h * oy);
        s[2] = gamma_at(k.kx + h * ox, k.ky + h * oy);
        s[3] = gamma_at(k.kx + 2 * h * ox, k.ky + 2 * h * oy);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    dgamma[mu][a][b][c] = (s[0][a][b][c] - 8.0 * s[1][a][b][c] +
                                           8.0 * s[2][a][b][c] - s[3][a][b][c]) /
                                          (12.0 * h);
    }

    Matrix2 ginv;
    ginv << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
    ginv /= det_g;
    auto gamma2 = [&](int s, int b, int c) {  // Gamma^s_bc
        return ginv(s, 0) * gamma[0][b][c] + ginv(s, 1) * gamma[1][b][c];
    };

    // R_rlmn = d_m Gamma_rln - d_n Gamma_rlm + G^s_lm Gamma_srn - G^s_ln Gamma_srm
    // with (r, l, m, n) = (1, 2, 1, 2) in 1-based labels.
    const int r = 0, l = 1, m = 0, nn = 1;
    double val = dgamma[m][r][l][nn] - dgamma[nn][r][l][m];
    for (int s = 0; s < 2; ++s)
        val += gamma2(s, l, m) * gamma[s][r][nn] - gamma2(s, l, nn) * gamma[s][r][m];
    return val;
}

// K_G = R_1212 / det g; empty at singular points.
inline std::optional<double> gauss_curvature(double r1212, double det_g) {
    if (det_g < eps_sing) return std::nullopt;
    return r1212 / det_g;
}

// Signed area density lambda-bar = -i tr(P [dP_x, dP_y]); equals the Berry
// curvature.
inline double signed_area_density(const ProjectorJet& pj) {
    const Complex comm =
        (pj.P * pj.dP[0] * pj.dP[1]).trace() - (pj.P * pj.dP[1] * pj.dP[0]).trace();
    const Complex val = Complex(0.0, -1.0) * comm;
    return detail::real_checked(val, 1e-10, "signed_area_density");
}

// Berry curvature through the Q-form, Im sum_ij eps_ij tr[(d_i P) Q (d_j P)]
// with Q = 1 - P.
inline double berry_density_qform(const ProjectorJet& pj) {
    const Matrix Q = Matrix::Identity(pj.n_bands, pj.n_bands) - pj.P;
    const Complex t =
        (pj.dP[0] * Q * pj.dP[1]).trace() - (pj.dP[1] * Q * pj.dP[0]).trace();
    return t.imag();
}

// Pointwise bundle of the quantum geometry at k.
struct QGeometryPoint {
    KPoint k;
    Matrix2 g;
    double det_g = 0.0;
    double lambda_bar = 0.0;
    Christoffel gamma_first{};
    double r1212 = 0.0;
    std::optional<double> k_gauss;
    bool regular = false;
};

inline QGeometryPoint qgeometry_point(const ProjectorJet& pj, const KPoint& k) {
    QGeometryPoint q;
    q.k = k;
    q.g = metric_tensor(pj);
    q.det_g = q.g(0, 0) * q.g(1, 1) - q.g(0, 1) * q.g(1, 0);
    q.lambda_bar = signed_area_density(pj);
    q.gamma_first = christoffel_first(pj);
    const HermitianFrame frame = normal_frame(pj.dP[0], pj.dP[1], pj.n_bands);
    q.r1212 = riemann_r1212_normal(pj, frame);
    q.regular = q.det_g >= eps_sing;
    q.k_gauss = gauss_curvature(q.r1212, q.det_g);
    return q;
}

inline QGeometryPoint qgeometry_point(const ModelSpec& spec, const BandSelection& band,
                                      const KPoint& k) {
    return qgeometry_point(projector_jet_at(spec, band, k), k);
}

}  // namespace qgeom
