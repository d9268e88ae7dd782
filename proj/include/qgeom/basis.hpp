#pragma once

#include <cmath>
#include <vector>

#include "qgeom/common.hpp"

namespace qgeom {

// Trace-orthonormal set of Hermitian matrices.  The first tangent_count
// entries span the tangent plane {dPx, dPy}; the rest are normal to it.
struct HermitianFrame {
    std::vector<Matrix> mats;
    int tangent_count = 0;
};

inline double trace_dot(const Matrix& a, const Matrix& b) { return (a * b).trace().real(); }

// Standard orthonormal Hermitian frame: identity, symmetric real pairs,
// antisymmetric imaginary pairs, diagonal traceless.  Reproduces the Pauli
// matrices (over sqrt 2) for N = 2.
inline HermitianFrame standard_hermitian_frame(int n) {
    if (n < 1) throw PreconditionError("standard_hermitian_frame: N must be >= 1");
    HermitianFrame frame;
    frame.tangent_count = 0;
    frame.mats.reserve(n * n);
    frame.mats.push_back(Matrix::Identity(n, n) / std::sqrt(double(n)));
    const Complex I(0.0, 1.0);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            Matrix m = Matrix::Zero(n, n);
            m(a, b) = m(b, a) = 1.0 / std::sqrt(2.0);
            frame.mats.push_back(m);
        }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            Matrix m = Matrix::Zero(n, n);
            m(a, b) = -I / std::sqrt(2.0);
            m(b, a) = I / std::sqrt(2.0);
            frame.mats.push_back(m);
        }
    for (int j = 1; j < n; ++j) {
        Matrix m = Matrix::Zero(n, n);
        for (int a = 0; a < j; ++a) m(a, a) = 1.0;
        m(j, j) = -double(j);
        frame.mats.push_back(m / std::sqrt(double(j) * (j + 1)));
    }
    return frame;
}

// Gram-Schmidt frame adapted to the tangents dPx, dPy: tangents first (one
// entry if they are linearly dependent), then N^2 - tangent_count normals
// drawn from the standard frame.  Candidates whose residual norm squared
// falls below 1e-20 are rejected as dependent and the next one is tried.
inline HermitianFrame normal_frame(const Matrix& dPx, const Matrix& dPy, int n) {
    const double nx2 = trace_dot(dPx, dPx);
    if (nx2 <= 0.0) throw RankZeroError("normal_frame: dPx vanishes (rank-0 point)");

    HermitianFrame frame;
    Matrix t1 = dPx / std::sqrt(nx2);
    frame.mats.push_back(t1);

    const double ny2 = trace_dot(dPy, dPy);
    const double cross = trace_dot(dPx, dPy);
    const double gram_det = nx2 * ny2 - cross * cross;
    const double eps_rank = 1e-10 * nx2;
    if (gram_det < eps_rank) {
        frame.tangent_count = 1;
    } else {
        Matrix t2 = dPy - trace_dot(t1, dPy) * t1;
        t2 /= std::sqrt(trace_dot(t2, t2));
        frame.mats.push_back(t2);
        frame.tangent_count = 2;
    }

    const HermitianFrame candidates = standard_hermitian_frame(n);
    const std::size_t want = static_cast<std::size_t>(n) * n;
    for (const Matrix& cand : candidates.mats) {
        if (frame.mats.size() == want) break;
        Matrix h = cand;
        for (const Matrix& prev : frame.mats) h -= trace_dot(prev, cand) * prev;
        const double r2 = trace_dot(h, h);
        if (r2 < 1e-20) continue;  // dependent; take the next candidate
        frame.mats.push_back(h / std::sqrt(r2));
    }
    if (frame.mats.size() != want)
        throw Error("normal_frame: Gram-Schmidt terminated with an incomplete frame");
    return frame;
}

// Max deviation of sum_j (H_j)_ab (H_j)_cd from delta_ad delta_bc.
// Requires a full frame of N^2 elements.
inline double completeness_defect(const HermitianFrame& frame) {
    if (frame.mats.empty()) throw PreconditionError("completeness_defect: empty frame");
    const int n = static_cast<int>(frame.mats.front().rows());
    if (frame.mats.size() != static_cast<std::size_t>(n) * n)
        throw PreconditionError("completeness_defect: frame is partial (" +
                                std::to_string(frame.mats.size()) + " of " +
                                std::to_string(n * n) + " elements)");
    double defect = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    Complex s(0.0, 0.0);
                    for (const Matrix& m : frame.mats) s += m(a, b) * m(c, d);
                    if (a == d && b == c) s -= 1.0;
                    defect = std::max(defect, std::abs(s));
                }
    return defect;
}

}  // namespace qgeom
