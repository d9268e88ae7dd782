#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qgeom/qgeom.hpp"

namespace qgeom {

struct RunConfig {
    enum class Command { Fields, Chern, Volume, SingularCurve, GaussBonnet, Validate };

    Command command = Command::Validate;
    std::string model_path;  // empty: built-in two_band m0 = 1
    int grid_n = 400;
    int curve_n = 800;
    std::string band = "lower";
    std::string out_path;    // empty: stdout
    bool experimental_general_c = false;
};

namespace detail {

inline BandSelection parse_band(const std::string& text, int n_bands) {
    if (text == "lower") return BandSelection::lower();
    if (text == "upper") return BandSelection::single(n_bands);
    std::vector<int> idx;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            idx.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ValidationError("--band: cannot parse index \"" + tok + "\"");
        }
    }
    if (idx.empty()) throw ValidationError("--band: empty selection");
    return BandSelection::multi(std::move(idx));
}

inline std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct OutStream {
    std::ofstream file;
    std::ostream* os = nullptr;

    explicit OutStream(const std::string& path) {
        if (path.empty()) {
            os = &std::cout;
        } else {
            file.open(path);
            if (!file) throw Error("cannot open output file: " + path);
            os = &file;
        }
    }
    std::ostream& get() { return *os; }
};

inline void write_fields_csv(const ModelSpec& spec, const BandSelection& band, int n,
                             std::ostream& out) {
    out << "kx,ky,det_g,lambda_bar,K_G\n";
    std::vector<std::string> rows(static_cast<std::size_t>(n) * n);
    parallel_blocks(static_cast<std::size_t>(n), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i)
            for (int j = 0; j < n; ++j) {
                const KPoint k{two_pi * double(i) / n, two_pi * double(j) / n};
                const QGeometryPoint q = qgeometry_point(spec, band, k);
                std::string row = fmt17(k.kx) + "," + fmt17(k.ky) + "," + fmt17(q.det_g) + "," +
                                  fmt17(q.lambda_bar) + ",";
                if (q.k_gauss) row += fmt17(*q.k_gauss);
                rows[i * n + j] = std::move(row);
            }
    });
    for (const auto& row : rows) out << row << "\n";
}

inline void write_curve_csv(const SingularCurve& curve, std::ostream& out) {
    out << "theta,kx,ky,u1,u2,v1,v2,E,lambda_bar_v,kappa_s,ds\n";
    for (const SingularSample& s : curve.samples) {
        out << fmt17(s.theta) << "," << fmt17(s.k.kx) << "," << fmt17(s.k.ky) << ","
            << fmt17(s.u.x()) << "," << fmt17(s.u.y()) << "," << fmt17(s.v.x()) << ","
            << fmt17(s.v.y()) << "," << fmt17(s.E) << ",";
        if (std::isfinite(s.lambda_bar_v)) out << fmt17(s.lambda_bar_v);
        out << ",";
        if (std::isfinite(s.kappa_s)) out << fmt17(s.kappa_s);
        out << "," << fmt17(s.ds) << "\n";
    }
}

// Invariant battery behind the `validate` subcommand: one PASS/FAIL line per
// property, return value is the number of failures.
inline int run_validation(const ModelSpec& spec, const BandSelection& band, std::ostream& out) {
    int failures = 0;
    auto report = [&](const std::string& name, bool ok) {
        out << (ok ? "PASS " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };
    std::mt19937 rng(20250810);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    auto random_k = [&]() { return KPoint{angle(rng), angle(rng)}; };
    const bool two_band = spec.n_bands == 2;

    try {
        // Hamiltonian jet invariants
        {
            double herm = 0.0, sym = 0.0, fd1 = 0.0, fd2 = 0.0, per = 0.0;
            for (int t = 0; t < 20; ++t) {
                const KPoint k = random_k();
                const HamiltonianJet jet = eval_jet(spec, k);
                herm = std::max(herm, (jet.H - jet.H.adjoint()).cwiseAbs().maxCoeff());
                for (int mu = 0; mu < 2; ++mu)
                    herm = std::max(herm,
                                    (jet.dH[mu] - jet.dH[mu].adjoint()).cwiseAbs().maxCoeff());
                sym = std::max(sym,
                               (jet.d2H[0][1] - jet.d2H[1][0]).cwiseAbs().maxCoeff());
                const double h = 1e-4;
                for (int mu = 0; mu < 2; ++mu) {
                    auto shift = [&](double t2) {
                        KPoint p = k;
                        (mu == 0 ? p.kx : p.ky) += t2;
                        return eval_jet(spec, p);
                    };
                    const Matrix fd = (shift(-2 * h).H - 8.0 * shift(-h).H + 8.0 * shift(h).H -
                                       shift(2 * h).H) /
                                      (12.0 * h);
                    fd1 = std::max(fd1, (fd - jet.dH[mu]).cwiseAbs().maxCoeff() /
                                            std::max(1.0, jet.dH[mu].cwiseAbs().maxCoeff()));
                    const Matrix fdd = (shift(-2 * h).dH[mu] - 8.0 * shift(-h).dH[mu] +
                                        8.0 * shift(h).dH[mu] - shift(2 * h).dH[mu]) /
                                       (12.0 * h);
                    fd2 = std::max(fd2, (fdd - jet.d2H[mu][mu]).cwiseAbs().maxCoeff() /
                                            std::max(1.0, 1.0));
                }
                const HamiltonianJet wrapped = eval_jet(spec, {k.kx + two_pi, k.ky});
                per = std::max(per, (wrapped.H - jet.H).cwiseAbs().maxCoeff());
            }
            report("model: Hermiticity < 1e-13", herm < 1e-13);
            report("model: d2H index symmetry exact", sym == 0.0);
            report("model: analytic dH matches FD < 1e-8", fd1 < 1e-8);
            report("model: analytic d2H matches FD of dH < 1e-8", fd2 < 1e-8);
            report("model: periodicity < 1e-13", per < 1e-13);
        }

        // projector invariants
        {
            double idem = 0.0, tr_err = 0.0, leib = 0.0, tangent = 0.0, cross = 0.0;
            for (int t = 0; t < 12; ++t) {
                const KPoint k = random_k();
                ProjectorJet pj;
                try {
                    pj = projector_jet_at(spec, band, k);
                } catch (const NearDegeneracyError&) {
                    continue;
                }
                idem = std::max(idem, (pj.P * pj.P - pj.P).cwiseAbs().maxCoeff());
                tr_err = std::max(tr_err, std::fabs(pj.P.trace().real() -
                                                    double(band.indices.size())));
                for (int mu = 0; mu < 2; ++mu) {
                    leib = std::max(leib, (pj.P * pj.dP[mu] + pj.dP[mu] * pj.P - pj.dP[mu])
                                              .cwiseAbs()
                                              .maxCoeff());
                    tangent = std::max(tangent, std::fabs((pj.P * pj.dP[mu]).trace().real()));
                }
                try {
                    const ProjectorJet sp = spectral_projector_jet(spec, k, band, 1e-4);
                    cross = std::max(cross, (pj.P - sp.P).cwiseAbs().maxCoeff());
                    for (int mu = 0; mu < 2; ++mu)
                        cross = std::max(cross, (pj.dP[mu] - sp.dP[mu]).cwiseAbs().maxCoeff());
                } catch (const StencilCrossingError&) {
                }
            }
            report("projector: idempotency < 1e-10", idem < 1e-10);
            report("projector: trace P = selection size < 1e-10", tr_err < 1e-10);
            report("projector: P dP + dP P = dP < 1e-9", leib < 1e-9);
            report("projector: tr(P dP) = 0 < 1e-10", tangent < 1e-10);
            report("projector: polynomial vs spectral < 1e-8", cross < 1e-8);
        }

        // geometry invariants
        {
            double gsym = 0.0, csym = 0.0, compat = 0.0, routes = 0.0, det_lam = 0.0;
            const double h = 1e-4;
            for (int t = 0; t < 10; ++t) {
                const KPoint k = random_k();
                QGeometryPoint q;
                try {
                    q = qgeometry_point(spec, band, k);
                } catch (const NearDegeneracyError&) {
                    continue;
                }
                gsym = std::max(gsym, std::fabs(q.g(0, 1) - q.g(1, 0)));
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        for (int c = 0; c < 2; ++c)
                            csym = std::max(csym, std::fabs(q.gamma_first[a][b][c] -
                                                            q.gamma_first[a][c][b]));
                if (two_band)
                    det_lam = std::max(det_lam,
                                       std::fabs(q.lambda_bar * q.lambda_bar - q.det_g));
                for (int mu = 0; mu < 2; ++mu) {
                    auto g_at = [&](double t2) {
                        KPoint p = k;
                        (mu == 0 ? p.kx : p.ky) += t2;
                        return metric_tensor(projector_jet_at(spec, band, p));
                    };
                    const Matrix2 dg = (g_at(-2 * h) - 8.0 * g_at(-h) + 8.0 * g_at(h) -
                                        g_at(2 * h)) /
                                       (12.0 * h);
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b)
                            compat = std::max(compat,
                                              std::fabs(dg(a, b) - q.gamma_first[a][b][mu] -
                                                        q.gamma_first[b][a][mu]));
                }
                if (q.regular && q.det_g > 1e-3) {
                    try {
                        const double intrinsic = riemann_r1212_intrinsic(spec, band, k);
                        routes = std::max(routes, std::fabs(intrinsic - q.r1212));
                    } catch (const SingularMetricError&) {
                    }
                }
            }
            report("geometry: metric symmetry < 1e-12", gsym < 1e-12);
            report("geometry: Christoffel lower-index symmetry < 1e-11", csym < 1e-11);
            report("geometry: metric compatibility via FD < 1e-7", compat < 1e-7);
            report("geometry: Riemann routes agree < 1e-6", routes < 1e-6);
            if (two_band) report("geometry: lambda_bar^2 = det g < 1e-9", det_lam < 1e-9);
        }

        // basis completeness
        {
            const HermitianFrame frame = standard_hermitian_frame(spec.n_bands);
            report("basis: completeness defect < 1e-12", completeness_defect(frame) < 1e-12);
        }

        // quadrature + topology
        {
            FieldGrid ones;
            ones.n = 16;
            ones.field_name = "one";
            ones.values.assign(256, 1.0);
            report("quadrature: constant integrates to (2pi)^2",
                   std::fabs(bz_integrate(ones) - two_pi * two_pi) < 1e-12);
            try {
                const ChernResult c = chern_number(spec, band, 64);
                report("quadrature: Chern routes agree (C = " + std::to_string(c.chern) + ")",
                       true);
            } catch (const Error& e) {
                report(std::string("quadrature: Chern routes agree (") + e.what() + ")", false);
            }
        }

        // singular curve (two-band only)
        if (two_band) {
            try {
                const SingularCurve curve = trace_singular_curve(spec, band, 128);
                double lam_max = 0.0, kernel = 0.0, wedge_min = 1.0, kappa_max = -1e300;
                for (const SingularSample& s : curve.samples) {
                    lam_max = std::max(lam_max,
                                       std::fabs(detail::lambda_at(spec, band, s.k)));
                    const ProjectorJet pj = projector_jet_at(spec, band, s.k);
                    kernel = std::max(kernel, (s.v.x() * pj.dP[0] + s.v.y() * pj.dP[1])
                                                  .cwiseAbs()
                                                  .maxCoeff());
                    wedge_min = std::min(wedge_min, wedge(s.u, s.v));
                    if (!s.is_cusp_adjacent) kappa_max = std::max(kappa_max, s.kappa_s);
                }
                report("singular: |lambda_bar| < 1e-12 on traced curve", lam_max < 1e-12);
                report("singular: kernel annihilation < 1e-7", kernel < 1e-7);
                report("singular: positive frame u ^ v > 0", wedge_min > 0.0);
                report("singular: kappa_s < 0 at non-cusp samples", kappa_max < 0.0);
            } catch (const Error& e) {
                report(std::string("singular: curve tracing (") + e.what() + ")", false);
            }
        }
    } catch (const Error& e) {
        report(std::string("validation aborted: ") + e.what(), false);
    }
    return failures;
}

}  // namespace detail

// Executes one CLI command; returns the process exit status.
inline int run(const RunConfig& cfg) {
    try {
        if (cfg.grid_n < 8) throw ValidationError("--grid must be >= 8");
        if (cfg.curve_n < 64) throw ValidationError("--curve-samples must be >= 64");
    } catch (const ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }
    try {
        const ModelSpec spec = cfg.model_path.empty() ? ModelSpec::two_band(1.0)
                                                      : load_model_file(cfg.model_path);
        const BandSelection band = detail::parse_band(cfg.band, spec.n_bands);
        validate_selection(band, spec.n_bands);
        detail::OutStream out(cfg.out_path);

        switch (cfg.command) {
            case RunConfig::Command::Fields:
                detail::write_fields_csv(spec, band, cfg.grid_n, out.get());
                return 0;
            case RunConfig::Command::Chern: {
                const ChernResult c = chern_number(spec, band, cfg.grid_n);
                out.get() << c.chern << " (residual " << detail::fmt17(c.residual) << ")\n";
                return 0;
            }
            case RunConfig::Command::Volume: {
                const VolumeReport rep = volume_report(spec, band, cfg.grid_n);
                out.get() << to_json(rep).dump(2) << "\n";
                return 0;
            }
            case RunConfig::Command::SingularCurve: {
                const SingularCurve curve = trace_singular_curve(spec, band, cfg.curve_n);
                detail::write_curve_csv(curve, out.get());
                return 0;
            }
            case RunConfig::Command::GaussBonnet: {
                const GaussBonnetReport rep = gauss_bonnet_report(
                    spec, band, cfg.grid_n, cfg.curve_n, cfg.experimental_general_c);
                out.get() << to_json(rep).dump(2) << "\n";
                return rep.verified ? 0 : 1;
            }
            case RunConfig::Command::Validate: {
                const int failures = detail::run_validation(spec, band, out.get());
                return failures == 0 ? 0 : 1;
            }
        }
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace qgeom
