#pragma once

#include <cmath>
#include <ostream>
#include <string>

#include <json.hpp>

#include "qgeom/common.hpp"
#include "qgeom/quadrature.hpp"
#include "qgeom/singular.hpp"

namespace qgeom {

// Generalized Gauss-Bonnet bookkeeping: sum relation
//   (1/2pi) int K_G dA + (1/pi) int kappa_s ds = 4 (C - 1)
// and signed relation
//   (1/2pi) int K_G dAbar = 2 C.
struct GaussBonnetReport {
    int chern = 0;
    double chern_residual = 0.0;
    double gauss_integral = 0.0;         // (1/2pi) int K_G dA
    double signed_gauss_integral = 0.0;  // (1/2pi) int K_G dAbar
    double singular_integral = 0.0;      // (1/pi) int kappa_s ds
    double sum_lhs = 0.0;
    double sum_rhs = 0.0;
    double sub_lhs = 0.0;
    double sub_rhs = 0.0;
    int euler_plus = 0;
    int euler_minus = 0;
    int cusp_count = 0;
    double sum_residual = 0.0;
    double sub_residual = 0.0;
    bool verified = false;
    int grid_n = 0;
    int curve_n = 0;
    double chern_from_density = 0.0;
};

// Assembles the report for a two-band model in the fold regime.  The Gauss
// curvature integrals use K_G * dA = 2 |lambda_bar| d^2k (constant-curvature
// identity R_1212 = 2 det g), which stays finite across the fold.  For
// Chern numbers other than 1 the covering bookkeeping is conjectural; pass
// allow_general_c to evaluate it anyway.
inline GaussBonnetReport gauss_bonnet_report(const ModelSpec& spec, const BandSelection& band,
                                             int grid_n, int curve_n,
                                             bool allow_general_c = false) {
    if (spec.n_bands != 2)
        throw PreconditionError("gauss_bonnet_report: requires a two-band model");
    if (spec.kind == ModelSpec::Kind::TwoBandDVector &&
        (std::fabs(spec.m0) >= 2.0 || spec.m0 == 0.0))
        throw PreconditionError(
            "gauss_bonnet_report: two-band model must be in the fold regime (0 < |m0| < 2)");

    GaussBonnetReport rep;
    rep.grid_n = grid_n;
    rep.curve_n = curve_n;

    const FieldGrid lam = sample_lambda_grid(spec, band, grid_n);
    const std::size_t total = lam.values.size();
    std::vector<double> absval(total);
    for (std::size_t i = 0; i < total; ++i) absval[i] = std::fabs(lam.values[i]);
    const double cell = (two_pi / grid_n) * (two_pi / grid_n);
    const double v_unsigned = cell * pairwise_sum(absval);
    const double v_signed = cell * pairwise_sum(lam.values);

    rep.gauss_integral = 2.0 * v_unsigned / two_pi;
    rep.signed_gauss_integral = 2.0 * v_signed / two_pi;
    rep.chern_from_density = v_signed / two_pi;
    rep.chern = static_cast<int>(std::lround(rep.chern_from_density));
    rep.chern_residual = std::fabs(rep.chern_from_density - rep.chern);
    {
        const int oracle = chern_lattice_gauge(spec, band, std::min(grid_n, 256));
        if (oracle != rep.chern)
            throw NonConvergenceError("gauss_bonnet_report: Chern routes disagree (" +
                                          std::to_string(rep.chern) + " vs oracle " +
                                          std::to_string(oracle) + ")",
                                      rep.chern_residual);
    }
    if (rep.chern != 1 && !allow_general_c)
        throw PreconditionError("gauss_bonnet_report: general-C bookkeeping is experimental; "
                                "rerun with the experimental flag to evaluate C = " +
                                std::to_string(rep.chern));

    const SingularCurve curve = trace_singular_curve(spec, band, curve_n);
    rep.cusp_count = static_cast<int>(curve.cusp_thetas.size());
    rep.singular_integral = singular_line_integral(curve);

    // chi(M+) = C * chi(S^2 u disk) - 4 cusps; chi(M-) = C * chi(disk)
    rep.euler_plus = 3 * rep.chern - 4;
    rep.euler_minus = rep.chern;

    rep.sum_lhs = rep.gauss_integral + rep.singular_integral;
    rep.sum_rhs = 4.0 * (rep.chern - 1);
    rep.sub_lhs = rep.signed_gauss_integral;
    rep.sub_rhs = 2.0 * rep.chern;
    rep.sum_residual = std::fabs(rep.sum_lhs - rep.sum_rhs);
    rep.sub_residual = std::fabs(rep.sub_lhs - rep.sub_rhs);
    rep.verified = rep.sum_residual <= 0.05 && rep.sub_residual <= 0.05;
    return rep;
}

inline nlohmann::json to_json(const GaussBonnetReport& r) {
    nlohmann::json j;
    j["chern"] = r.chern;
    j["chern_residual"] = r.chern_residual;
    j["chern_from_density"] = r.chern_from_density;
    j["gauss_integral"] = r.gauss_integral;
    j["signed_gauss_integral"] = r.signed_gauss_integral;
    j["singular_integral"] = r.singular_integral;
    j["sum_lhs"] = r.sum_lhs;
    j["sum_rhs"] = r.sum_rhs;
    j["sub_lhs"] = r.sub_lhs;
    j["sub_rhs"] = r.sub_rhs;
    j["euler_plus"] = r.euler_plus;
    j["euler_minus"] = r.euler_minus;
    j["cusp_count"] = r.cusp_count;
    j["residuals"] = {{"sum", r.sum_residual}, {"sub", r.sub_residual}};
    j["verified"] = r.verified;
    j["provenance"] = {{"grid_n", r.grid_n},
                       {"curve_n", r.curve_n},
                       {"eps_sing", eps_sing},
                       {"fd_step", 1e-4},
                       {"version", "qgeom 0.1.0"}};
    return j;
}

inline nlohmann::json to_json(const VolumeReport& r) {
    nlohmann::json j;
    j["unsigned_volume"] = r.unsigned_volume;
    j["signed_volume"] = r.signed_volume;
    j["area_M3"] = r.area_M3;
    j["area_M1"] = r.area_M1;
    j["chern_from_density"] = r.chern_from_density;
    j["chern_rounded"] = r.chern_rounded;
    return j;
}

}  // namespace qgeom
