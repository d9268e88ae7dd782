// Test-side oracles, independent of the library's computation paths.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "qgeom/model.hpp"

namespace oracle {

using qgeom::Complex;
using qgeom::KPoint;
using qgeom::Matrix;
using qgeom::ModelSpec;

// ---- closed forms for the two-band d-vector model ----------------------

using Vec3 = Eigen::Vector3d;

inline Vec3 dvec(const KPoint& k, double m0) {
    return {std::sin(k.kx), std::sin(k.ky), m0 - std::cos(k.kx) - std::cos(k.ky)};
}

inline Vec3 d_dvec(const KPoint& k, int mu) {
    if (mu == 0) return {std::cos(k.kx), 0.0, std::sin(k.kx)};
    return {0.0, std::cos(k.ky), std::sin(k.ky)};
}

// d(dhat)/dk_mu = (d_mu d - dhat (dhat . d_mu d)) / |d|
inline Vec3 dhat_deriv(const KPoint& k, double m0, int mu) {
    const Vec3 d = dvec(k, m0);
    const double norm = d.norm();
    const Vec3 dh = d / norm;
    const Vec3 dd = d_dvec(k, mu);
    return (dd - dh * dh.dot(dd)) / norm;
}

// doubled-convention metric: g_mn = (1/2) d_m dhat . d_n dhat
inline Eigen::Matrix2d metric_oracle(const KPoint& k, double m0) {
    Eigen::Matrix2d g;
    const Vec3 dx = dhat_deriv(k, m0, 0), dy = dhat_deriv(k, m0, 1);
    g(0, 0) = 0.5 * dx.dot(dx);
    g(0, 1) = g(1, 0) = 0.5 * dx.dot(dy);
    g(1, 1) = 0.5 * dy.dot(dy);
    return g;
}

// lambda_bar = -(1/2) dhat . (d_x dhat x d_y dhat)
inline double lambda_oracle(const KPoint& k, double m0) {
    const Vec3 d = dvec(k, m0);
    const Vec3 dx = dhat_deriv(k, m0, 0), dy = dhat_deriv(k, m0, 1);
    return -0.5 * (d / d.norm()).dot(dx.cross(dy));
}

// ---- brute-force elementary symmetric polynomials ----------------------

inline double elementary_symmetric(const std::vector<double>& vals, int k) {
    const int n = static_cast<int>(vals.size());
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    // subset-sum DP
    std::vector<double> e(k + 1, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::min(k, i + 1); j >= 1; --j) e[j] += vals[i] * e[j - 1];
    return e[k];
}

// ---- companion-matrix eigenvalue oracle ---------------------------------

// Characteristic polynomial coefficients from power sums (Newton identities),
// then companion-matrix roots through the general complex eigensolver.
inline std::vector<double> companion_eigenvalues(const Matrix& H) {
    const int n = static_cast<int>(H.rows());
    std::vector<double> p(n + 1, 0.0);
    Matrix pw = Matrix::Identity(n, n);
    for (int m = 1; m <= n; ++m) {
        pw = pw * H;
        p[m] = pw.trace().real();
    }
    std::vector<double> e(n + 1, 0.0);
    e[0] = 1.0;
    for (int kk = 1; kk <= n; ++kk) {
        double acc = 0.0;
        double sign = 1.0;
        for (int m = 1; m <= kk; ++m) {
            acc += sign * p[m] * e[kk - m];
            sign = -sign;
        }
        e[kk] = acc / kk;
    }
    // char(x) = sum_k (-1)^k e_k x^(n-k);  companion of monic x^n + c_{n-1} x^(n-1) + ... + c_0
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) {
        const int k = n - i;  // coefficient of x^i is (-1)^k e_k
        const double c = ((k % 2) ? -1.0 : 1.0) * e[k];
        comp(i, n - 1) = -c;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
    std::vector<double> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = es.eigenvalues()(i).real();
    std::sort(roots.begin(), roots.end());
    return roots;
}

// ---- reference models ---------------------------------------------------

inline Matrix random_hermitian(int n, std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Matrix m(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) m(a, b) = Complex(gauss(rng), gauss(rng));
    return (m + Matrix(m.adjoint())) / 2.0;
}

// Well-gapped random 4-band tight-binding model (fixed seed).
inline ModelSpec random_four_band(unsigned seed = 7u) {
    std::mt19937 rng(seed);
    std::vector<qgeom::HoppingTerm> hops;
    Matrix onsite = Matrix::Zero(4, 4);
    onsite.diagonal() << 0.0, 3.0, 6.0, 9.0;
    onsite += random_hermitian(4, rng, 0.05);
    hops.push_back({0, 0, onsite});
    for (auto [r1, r2] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
        std::normal_distribution<double> gauss(0.0, 0.15);
        Matrix t(4, 4);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) t(a, b) = Complex(gauss(rng), gauss(rng));
        hops.push_back({r1, r2, t});
        hops.push_back({-r1, -r2, t.adjoint()});
    }
    return ModelSpec::tight_binding(4, std::move(hops));
}

// Gapped random 3-band model for multi-band geometry checks.
inline ModelSpec random_three_band(unsigned seed = 11u) {
    std::mt19937 rng(seed);
    std::vector<qgeom::HoppingTerm> hops;
    Matrix onsite = Matrix::Zero(3, 3);
    onsite.diagonal() << 0.0, 4.0, 8.0;
    hops.push_back({0, 0, onsite});
    for (auto [r1, r2] : {std::pair{1, 0}, std::pair{0, 1}}) {
        std::normal_distribution<double> gauss(0.0, 0.25);
        Matrix t(3, 3);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) t(a, b) = Complex(gauss(rng), gauss(rng));
        hops.push_back({r1, r2, t});
        hops.push_back({-r1, -r2, t.adjoint()});
    }
    return ModelSpec::tight_binding(3, std::move(hops));
}

// Spin-1 matrices.
inline std::array<Matrix, 3> spin1() {
    const double s = 1.0 / std::sqrt(2.0);
    const Complex I(0.0, 1.0);
    Matrix jx(3, 3), jy(3, 3), jz(3, 3);
    jx << 0, s, 0, s, 0, s, 0, s, 0;
    jy << 0, -I * s, 0, I * s, 0, -I * s, 0, I * s, 0;
    jz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
    return {jx, jy, jz};
}

// Three-band model with an exact two-fold degeneracy everywhere:
// H(k) = (d(k) . J)^2 has eigenvalues {0, d^2, d^2}; built as a genuine
// tight-binding hopping set by Fourier convolution.
inline ModelSpec degenerate_three_band(double m0 = 1.0) {
    const auto J = spin1();
    const Complex I(0.0, 1.0);
    std::map<std::pair<int, int>, Matrix> lin;  // Fourier components of d . J
    auto add = [&](int r1, int r2, const Matrix& m) {
        auto [it, fresh] = lin.try_emplace({r1, r2}, Matrix::Zero(3, 3));
        it->second += m;
    };
    add(1, 0, -I / 2.0 * J[0]);
    add(-1, 0, I / 2.0 * J[0]);
    add(0, 1, -I / 2.0 * J[1]);
    add(0, -1, I / 2.0 * J[1]);
    add(0, 0, m0 * J[2]);
    add(1, 0, -0.5 * J[2]);
    add(-1, 0, -0.5 * J[2]);
    add(0, 1, -0.5 * J[2]);
    add(0, -1, -0.5 * J[2]);

    std::map<std::pair<int, int>, Matrix> quad;
    for (const auto& [ra, ta] : lin)
        for (const auto& [rb, tb] : lin) {
            const std::pair<int, int> r{ra.first + rb.first, ra.second + rb.second};
            auto [it, fresh] = quad.try_emplace(r, Matrix::Zero(3, 3));
            it->second += ta * tb;
        }
    std::vector<qgeom::HoppingTerm> hops;
    for (const auto& [r, t] : quad) hops.push_back({r.first, r.second, t});
    return ModelSpec::tight_binding(3, std::move(hops));
}

// Tight-binding encoding of the two-band d-vector model (JSON text), for the
// parser + equivalence tests.
inline std::string two_band_tb_json(double m0) {
    auto row = [](double a, double b, double c, double d) {
        return "[[" + std::to_string(a) + "," + std::to_string(b) + "],[" + std::to_string(c) +
               "," + std::to_string(d) + "]]";
    };
    std::string s = R"({"kind":"tight_binding","n_bands":2,"hoppings":[)";
    // on-site m0 sigma_z
    s += R"({"dR":[0,0],"re":)" + row(m0, 0, 0, -m0) + R"(,"im":)" + row(0, 0, 0, 0) + "},";
    // dR (1,0): -(i/2) sigma_x - (1/2) sigma_z, and Hermitian partner
    s += R"({"dR":[1,0],"re":)" + row(-0.5, 0, 0, 0.5) + R"(,"im":)" + row(0, -0.5, -0.5, 0) +
         "},";
    s += R"({"dR":[-1,0],"re":)" + row(-0.5, 0, 0, 0.5) + R"(,"im":)" + row(0, 0.5, 0.5, 0) +
         "},";
    // dR (0,1): -(i/2) sigma_y - (1/2) sigma_z = [[-1/2,-1/2],[1/2,1/2]] (real)
    s += R"({"dR":[0,1],"re":)" + row(-0.5, -0.5, 0.5, 0.5) + R"(,"im":)" + row(0, 0, 0, 0) +
         "},";
    s += R"({"dR":[0,-1],"re":)" + row(-0.5, 0.5, -0.5, 0.5) + R"(,"im":)" + row(0, 0, 0, 0) +
         "}]}";
    return s;
}

}  // namespace oracle
