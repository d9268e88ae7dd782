#pragma once

#include <cmath>

#include "qgeom/common.hpp"

namespace qgeom {

// Crystal momentum (kx, ky), periodic with period 2*pi in each component.
// Stored unwrapped; comparisons are taken modulo 2*pi.
struct KPoint {
    double kx = 0.0;
    double ky = 0.0;

    // Canonical representative in [0, 2*pi)^2.  Idempotent.
    KPoint wrapped() const {
        auto wrap = [](double x) {
            double r = std::fmod(x, two_pi);
            if (r < 0.0) r += two_pi;
            if (r >= two_pi) r = 0.0;  // fmod rounding at the boundary
            return r;
        };
        return {wrap(kx), wrap(ky)};
    }

    bool equals_mod_2pi(const KPoint& other, double tol = 1e-12) const {
        auto close = [tol](double a, double b) {
            double d = std::fabs(std::fmod(a - b, two_pi));
            return d < tol || two_pi - d < tol;
        };
        return close(kx, other.kx) && close(ky, other.ky);
    }
};

}  // namespace qgeom
