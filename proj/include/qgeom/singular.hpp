#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "qgeom/common.hpp"
#include "qgeom/geometry.hpp"
#include "qgeom/kpoint.hpp"
#include "qgeom/model.hpp"
#include "qgeom/projector.hpp"

namespace qgeom {

// One point on the degeneracy curve with its adapted-frame data.
struct SingularSample {
    KPoint k;
    double theta = 0.0;  // angle around (pi, pi)
    Vector2 u;           // tangent field (adapted coordinates)
    Vector2 v;           // kernel field
    double E = 0.0;      // e_u . e_u
    double lambda_bar_v = std::numeric_limits<double>::quiet_NaN();
    double kappa_s = std::numeric_limits<double>::quiet_NaN();
    double ds = 0.0;     // arc-length weight
    bool is_cusp_adjacent = false;
};

struct SingularCurve {
    std::vector<SingularSample> samples;  // theta ascending in [0, 2*pi)
    std::vector<double> cusp_thetas;      // angles of the cusp preimages
    std::vector<KPoint> cusp_preimages;   // bisected roots on the cusp rays
};

// Adapted coordinate fields (u along the fold, v along the kernel), from the
// closed forms with the |sin kx sin ky| factor that keeps the frame positive.
// Throws within eps_cusp of a cusp preimage, where the kernel field diverges.
inline std::pair<Vector2, Vector2> adapted_frame(const KPoint& k, double eps_cusp = 1e-6) {
    const double sx = std::sin(k.kx), cx = std::cos(k.kx);
    const double sy = std::sin(k.ky), cy = std::cos(k.ky);
    if (std::fabs(cx) < eps_cusp || std::fabs(cy) < eps_cusp)
        throw CuspProximityError("adapted_frame: cos kx or cos ky vanishes (cusp preimage)");
    // D decays like the 4th power of the cusp distance along the curve, so
    // it is only guarded against outright underflow; eps_cusp applies to the
    // cosines above.
    const double D = cx * cx * cx * sy * sy + cy * cy * cy * sx * sx;
    if (std::fabs(D) < 1e-250)
        throw CuspProximityError("adapted_frame: denominator D vanishes");
    const double sgn = std::fabs(sx * sy);
    Vector2 u(sgn * cx * cx * sy / D, -sgn * cy * cy * sx / D);
    const double c3 = cx * cx * cx * cy * cy * cy;
    Vector2 v(-c3 * (sx / cx) / D, -c3 * (sy / cy) / D);
    return {u, v};
}

inline double wedge(const Vector2& a, const Vector2& b) { return a.x() * b.y() - a.y() * b.x(); }

namespace detail {

inline double lambda_at(const ModelSpec& spec, const BandSelection& band, const KPoint& k) {
    return signed_area_density(projector_jet_at(spec, band, k));
}

// E, F and the adapted-frame signed density (u ^ v) * lambda_bar as scalar
// fields over k.
struct AdaptedScalars {
    double E = 0.0;
    double F = 0.0;
    double lamN = 0.0;
};

inline AdaptedScalars adapted_scalars(const ModelSpec& spec, const BandSelection& band,
                                      const KPoint& k, double eps_cusp) {
    const ProjectorJet pj = projector_jet_at(spec, band, k);
    const Matrix2 g = metric_tensor(pj);
    const auto [u, v] = adapted_frame(k, eps_cusp);
    AdaptedScalars s;
    s.E = u.dot(g * u);
    s.F = u.dot(g * v);
    s.lamN = wedge(u, v) * signed_area_density(pj);
    return s;
}

// Directional derivative (w . grad f)(k) with a 4th-order stencil.
template <typename Field, typename Dir>
inline double dir_deriv(Field&& f, Dir&& w_of, const KPoint& k, double h) {
    const Vector2 w = w_of(k);
    auto d1 = [&](bool along_x) {
        auto at = [&](double t) {
            return along_x ? f(KPoint{k.kx + t, k.ky}) : f(KPoint{k.kx, k.ky + t});
        };
        return (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
    };
    return w.x() * d1(true) + w.y() * d1(false);
}

struct KappaTerms {
    double E = 0.0, E_u = 0.0, F_v = 0.0, F_uv = 0.0, E_vv = 0.0, lambda_v = 0.0;
    double kappa_s = 0.0;
};

inline KappaTerms kappa_terms(const ModelSpec& spec, const BandSelection& band, const KPoint& k,
                              double h, double eps_cusp) {
    auto u_of = [&](const KPoint& p) { return adapted_frame(p, eps_cusp).first; };
    auto v_of = [&](const KPoint& p) { return adapted_frame(p, eps_cusp).second; };
    auto E_f = [&](const KPoint& p) { return adapted_scalars(spec, band, p, eps_cusp).E; };
    auto F_f = [&](const KPoint& p) { return adapted_scalars(spec, band, p, eps_cusp).F; };
    auto lamN_f = [&](const KPoint& p) { return adapted_scalars(spec, band, p, eps_cusp).lamN; };

    KappaTerms t;
    t.E = E_f(k);
    t.E_u = dir_deriv(E_f, u_of, k, h);
    t.F_v = dir_deriv(F_f, v_of, k, h);
    t.lambda_v = dir_deriv(lamN_f, v_of, k, h);
    auto dvE = [&](const KPoint& p) { return dir_deriv(E_f, v_of, p, h); };
    t.E_vv = dir_deriv(dvE, v_of, k, h);
    auto duF = [&](const KPoint& p) { return dir_deriv(F_f, u_of, p, h); };
    t.F_uv = dir_deriv(duF, v_of, k, h);

    if (std::fabs(t.lambda_v) < 1e-10)
        throw DegenerateDenominatorError(
            "singular curvature: lambda_bar_v below 1e-10 (non-fold singularity)");
    if (!(t.E > 0.0))
        throw DegenerateDenominatorError("singular curvature: E is not positive");
    t.kappa_s = (2.0 * t.E * t.F_uv - t.F_v * t.E_u - t.E * t.E_vv) /
                (2.0 * std::pow(t.E, 1.5) * t.lambda_v);
    return t;
}

}  // namespace detail

// lambda_bar_v by the trace formula -i tr(P [d_u P, d_v^2 P]) with the
// kernel-field variation term included; cross-checks the finite-difference
// route.
inline double lambda_v_trace(const ModelSpec& spec, const BandSelection& band, const KPoint& k,
                             double h = 1e-4, double eps_cusp = 1e-6) {
    const ProjectorJet pj = projector_jet_at(spec, band, k);
    const auto [u, v] = adapted_frame(k, eps_cusp);
    // dv[mu][nu] = d_mu v^nu by finite differences of the closed form
    double dv[2][2];
    for (int mu = 0; mu < 2; ++mu) {
        auto v_at = [&](double t) {
            KPoint p = k;
            (mu == 0 ? p.kx : p.ky) += t;
            return adapted_frame(p, eps_cusp).second;
        };
        const Vector2 der =
            (v_at(-2 * h) - 8.0 * v_at(-h) + 8.0 * v_at(h) - v_at(2 * h)) / (12.0 * h);
        dv[mu][0] = der.x();
        dv[mu][1] = der.y();
    }
    const Matrix duP = u.x() * pj.dP[0] + u.y() * pj.dP[1];
    Matrix dvvP = Matrix::Zero(pj.n_bands, pj.n_bands);
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu)
            dvvP += (mu == 0 ? v.x() : v.y()) *
                    (dv[mu][nu] * pj.dP[nu] +
                     (nu == 0 ? v.x() : v.y()) * pj.d2P[mu][nu]);
    const Complex comm = (pj.P * duP * dvvP).trace() - (pj.P * dvvP * duP).trace();
    return (Complex(0.0, -1.0) * comm).real();
}

// Root of lambda_bar on the radial ray at angle theta from (pi, pi):
// coarse march outward to bracket the sign change, then bisection down to
// |lambda_bar| < 1e-12.
inline KPoint singular_root_on_ray(const ModelSpec& spec, const BandSelection& band,
                                   double theta) {
    const double cx = std::cos(theta), cy = std::sin(theta);
    auto at = [&](double r) { return KPoint{pi + r * cx, pi + r * cy}; };
    auto lam = [&](double r) { return detail::lambda_at(spec, band, at(r)); };

    const double r0 = 0.05, r1 = 3.10;
    const int coarse = 64;
    double lo = r0, hi = r0;
    double f_lo = lam(r0);
    if (f_lo >= 0.0)
        throw TopologyMismatchError(
            "singular_root_on_ray: lambda_bar is not negative near (pi, pi)");
    bool bracketed = false;
    for (int i = 1; i <= coarse; ++i) {
        hi = r0 + (r1 - r0) * i / coarse;
        const double f_hi = lam(hi);
        if (f_hi >= 0.0) {
            bracketed = true;
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    if (!bracketed)
        throw TopologyMismatchError(
            "singular_root_on_ray: no sign change of lambda_bar along the ray (theta = " +
            std::to_string(theta) + ")");

    double f_mid = 1.0;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        f_mid = lam(mid);
        if (std::fabs(f_mid) < 1e-12) return at(mid);
        if (f_mid < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    throw RootRefinementError("singular_root_on_ray: bisection stagnated at |lambda_bar| = " +
                              std::to_string(std::fabs(f_mid)));
}

// Singular curvature at one traced sample (4th-order directional finite
// differences along the adapted fields, step 1e-4).
inline double singular_curvature_at(const ModelSpec& spec, const BandSelection& band,
                                    const SingularSample& sample, double fd_step = 1e-4,
                                    double eps_cusp = 1e-6) {
    if (sample.is_cusp_adjacent)
        throw CuspProximityError("singular_curvature_at: sample is cusp-adjacent");
    return detail::kappa_terms(spec, band, sample.k, fd_step, eps_cusp).kappa_s;
}

// Traces the closed degeneracy curve around (pi, pi) on a uniform midpoint
// theta grid (midpoints keep samples clear of the cusp angles and of the
// axis crossings where the adapted chart degenerates).  Fills the adapted
// frame, arc weights and, away from cusps, the singular curvature.
inline SingularCurve trace_singular_curve(const ModelSpec& spec, const BandSelection& band,
                                          int n_samples) {
    if (n_samples < 64)
        throw PreconditionError("trace_singular_curve: n_samples must be >= 64");
    if (spec.n_bands != 2)
        throw PreconditionError("trace_singular_curve: fold tracing assumes a two-band model");

    SingularCurve curve;
    curve.cusp_thetas = {pi / 4, 3 * pi / 4, 5 * pi / 4, 7 * pi / 4};
    for (double tc : curve.cusp_thetas)
        curve.cusp_preimages.push_back(singular_root_on_ray(spec, band, tc));

    const double spacing = two_pi / n_samples;
    const double delta_cusp = spacing;
    curve.samples.resize(n_samples);

    parallel_blocks(static_cast<std::size_t>(n_samples), [&](std::size_t j0, std::size_t j1) {
        for (std::size_t j = j0; j < j1; ++j) {
            SingularSample& s = curve.samples[j];
            s.theta = spacing * (static_cast<double>(j) + 0.5);
            s.k = singular_root_on_ray(spec, band, s.theta);
            for (double tc : curve.cusp_thetas) {
                double d = std::fabs(std::remainder(s.theta - tc, two_pi));
                if (d <= delta_cusp) s.is_cusp_adjacent = true;
            }
            const auto [u, v] = adapted_frame(s.k);
            s.u = u;
            s.v = v;
            const Matrix2 g = metric_tensor(projector_jet_at(spec, band, s.k));
            s.E = u.dot(g * u);
        }
    });

    // arc-length weights from adjacent-sample spacings through the du
    // one-form (inverse-Jacobian pairing)
    for (int j = 0; j < n_samples; ++j) {
        const SingularSample& prev = curve.samples[(j + n_samples - 1) % n_samples];
        const SingularSample& next = curve.samples[(j + 1) % n_samples];
        SingularSample& s = curve.samples[j];
        const double dkx = 0.5 * (next.k.kx - prev.k.kx);
        const double dky = 0.5 * (next.k.ky - prev.k.ky);
        const double w = wedge(s.u, s.v);
        const double du = (s.v.y() * dkx - s.v.x() * dky) / w;
        s.ds = std::sqrt(std::max(s.E, 0.0)) * std::fabs(du);
    }

    parallel_blocks(static_cast<std::size_t>(n_samples), [&](std::size_t j0, std::size_t j1) {
        for (std::size_t j = j0; j < j1; ++j) {
            SingularSample& s = curve.samples[j];
            if (s.is_cusp_adjacent) continue;
            const detail::KappaTerms t = detail::kappa_terms(spec, band, s.k, 1e-4, 1e-6);
            s.kappa_s = t.kappa_s;
            s.lambda_bar_v = t.lambda_v;
        }
    });
    return curve;
}

// (1/pi) * sum of kappa_s * ds over the non-cusp samples.
inline double singular_line_integral(const SingularCurve& curve) {
    if (curve.samples.size() < 64)
        throw PreconditionError("singular_line_integral: need at least 64 samples");
    std::vector<double> terms;
    terms.reserve(curve.samples.size());
    double last_theta = -1.0;
    for (const SingularSample& s : curve.samples) {
        if (s.theta <= last_theta)
            throw MalformedCurveError("singular_line_integral: theta values are not ascending");
        last_theta = s.theta;
        if (!s.is_cusp_adjacent && std::isfinite(s.kappa_s)) terms.push_back(s.kappa_s * s.ds);
    }
    return pairwise_sum(terms) / pi;
}

}  // namespace qgeom
