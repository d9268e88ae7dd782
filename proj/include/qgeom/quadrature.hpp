#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "qgeom/common.hpp"
#include "qgeom/geometry.hpp"
#include "qgeom/model.hpp"
#include "qgeom/projector.hpp"

namespace qgeom {

// Scalar field sampled on the periodic n x n grid k = (2*pi*i/n, 2*pi*j/n),
// row-major in i.  No duplicated endpoint row or column.
struct FieldGrid {
    int n = 0;
    std::vector<double> values;
    std::string field_name;

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
    KPoint kpoint(int i, int j) const { return {two_pi * i / n, two_pi * j / n}; }
};

// Periodic trapezoid rule: (2*pi/n)^2 * sum.  Pairwise summation keeps the
// result independent of the worker count.
inline double bz_integrate(const FieldGrid& field) {
    if (field.n < 8) throw PreconditionError("bz_integrate: grid must have n >= 8");
    if (field.values.size() != static_cast<std::size_t>(field.n) * field.n)
        throw PreconditionError("bz_integrate: value count does not match n x n");
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < field.values.size(); ++i)
        if (!std::isfinite(field.values[i])) {
            bad.push_back(i);
            if (bad.size() >= 8) break;
        }
    if (!bad.empty()) {
        std::string msg = "bz_integrate: non-finite samples at flat indices";
        for (std::size_t i : bad) msg += " " + std::to_string(i);
        throw PoisonedGridError(msg, bad);
    }
    const double cell = (two_pi / field.n) * (two_pi / field.n);
    return cell * pairwise_sum(field.values);
}

// Samples a per-k scalar of the projector jet over the grid (row-parallel).
template <typename F>
inline FieldGrid sample_jet_field(const ModelSpec& spec, const BandSelection& band, int n,
                                  const std::string& name, F&& f) {
    FieldGrid grid;
    grid.n = n;
    grid.field_name = name;
    grid.values.resize(static_cast<std::size_t>(n) * n);
    parallel_blocks(static_cast<std::size_t>(n), [&](std::size_t row0, std::size_t row1) {
        for (std::size_t i = row0; i < row1; ++i)
            for (int j = 0; j < n; ++j) {
                const KPoint k = grid.kpoint(static_cast<int>(i), j);
                grid.values[i * n + j] = f(projector_jet_at(spec, band, k));
            }
    });
    return grid;
}

inline FieldGrid sample_lambda_grid(const ModelSpec& spec, const BandSelection& band, int n) {
    return sample_jet_field(spec, band, n, "lambda_bar",
                            [](const ProjectorJet& pj) { return signed_area_density(pj); });
}

// Lattice-gauge (plaquette field-strength) Chern number from eigenvector
// overlaps; the plaquette phases sum to an exact multiple of 2*pi.
inline int chern_lattice_gauge(const ModelSpec& spec, const BandSelection& band, int n) {
    const int nb = spec.n_bands;
    validate_selection(band, nb);
    const int d = static_cast<int>(band.indices.size());

    std::vector<Matrix> frames(static_cast<std::size_t>(n) * n);  // N x d eigencolumns
    parallel_blocks(static_cast<std::size_t>(n), [&](std::size_t row0, std::size_t row1) {
        for (std::size_t i = row0; i < row1; ++i)
            for (int j = 0; j < n; ++j) {
                const KPoint k{two_pi * double(i) / n, two_pi * double(j) / n};
                Eigen::SelfAdjointEigenSolver<Matrix> es(eval_jet(spec, k).H);
                if (es.info() != Eigen::Success) throw Error("eigensolver failed");
                Matrix v(nb, d);
                for (int c = 0; c < d; ++c) v.col(c) = es.eigenvectors().col(band.indices[c] - 1);
                frames[i * n + j] = std::move(v);
            }
    });

    auto link = [&](std::size_t a, std::size_t b) {
        const Complex det = (frames[a].adjoint() * frames[b]).determinant();
        if (std::abs(det) < 1e-12)
            throw NonConvergenceError("chern_lattice_gauge: vanishing link overlap", 1.0);
        return det;
    };

    std::vector<double> fluxes(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t s00 = static_cast<std::size_t>(i) * n + j;
            const std::size_t s10 = static_cast<std::size_t>((i + 1) % n) * n + j;
            const std::size_t s11 = static_cast<std::size_t>((i + 1) % n) * n + (j + 1) % n;
            const std::size_t s01 = static_cast<std::size_t>(i) * n + (j + 1) % n;
            const Complex loop = link(s00, s10) * link(s10, s11) * link(s11, s01) * link(s01, s00);
            fluxes[s00] = std::arg(loop);
        }
    const double total = pairwise_sum(fluxes);
    return static_cast<int>(std::lround(total / two_pi));
}

struct ChernResult {
    int chern = 0;
    double residual = 0.0;  // |raw/2pi - chern|
};

// Chern number from the signed-area-density integral, cross-validated
// against the lattice-gauge oracle.
inline ChernResult chern_number(const ModelSpec& spec, const BandSelection& band, int n) {
    const FieldGrid lam = sample_lambda_grid(spec, band, n);
    const double raw = bz_integrate(lam) / two_pi;
    ChernResult res;
    res.chern = static_cast<int>(std::lround(raw));
    res.residual = std::fabs(raw - res.chern);
    if (res.residual > 0.01)
        throw NonConvergenceError("chern_number: residual " + std::to_string(res.residual) +
                                      " exceeds 0.01; increase the grid size",
                                  res.residual);
    const int oracle = chern_lattice_gauge(spec, band, n);
    if (oracle != res.chern)
        throw NonConvergenceError("chern_number: density route gives " +
                                      std::to_string(res.chern) +
                                      " but the lattice-gauge oracle gives " +
                                      std::to_string(oracle) + "; increase the grid size",
                                  res.residual);
    return res;
}

// Quantum-volume bookkeeping for the two-band fold structure.
struct VolumeReport {
    double unsigned_volume = 0.0;   // integral of sqrt(det g) = |lambda_bar|
    double signed_volume = 0.0;     // integral of lambda_bar
    double area_M3 = 0.0;           // fold-region area (one covering)
    double area_M1 = 0.0;
    double chern_from_density = 0.0;
    int chern_rounded = 0;
};

inline VolumeReport volume_report(const ModelSpec& spec, const BandSelection& band, int n) {
    if (spec.n_bands != 2)
        throw PreconditionError(
            "volume_report: region bookkeeping assumes a two-band fold structure");
    const FieldGrid lam = sample_lambda_grid(spec, band, n);
    const std::size_t total = lam.values.size();
    std::vector<double> pos(total), neg(total);
    for (std::size_t i = 0; i < total; ++i) {
        pos[i] = std::max(lam.values[i], 0.0);
        neg[i] = std::max(-lam.values[i], 0.0);
    }
    const double cell = (two_pi / n) * (two_pi / n);
    const double vpos = cell * pairwise_sum(pos);
    const double vneg = cell * pairwise_sum(neg);

    VolumeReport rep;
    rep.unsigned_volume = vpos + vneg;
    rep.signed_volume = vpos - vneg;
    if (rep.unsigned_volume < std::fabs(rep.signed_volume) - 1e-9)
        throw IntegrationInconsistencyError(
            "volume_report: unsigned volume fell below |signed volume|");
    rep.area_M3 = std::min(vpos, vneg);  // = (V_unsigned - |V_signed|) / 2
    rep.area_M1 = std::fabs(rep.signed_volume) - rep.area_M3;
    rep.chern_from_density = rep.signed_volume / two_pi;
    rep.chern_rounded = static_cast<int>(std::lround(rep.chern_from_density));
    return rep;
}

// CSV export: header "kx,ky,<field_name>", row-major, 17 significant digits.
inline void write_field_csv(const FieldGrid& field, std::ostream& out) {
    out << "kx,ky," << field.field_name << "\n";
    char buf[160];
    for (int i = 0; i < field.n; ++i)
        for (int j = 0; j < field.n; ++j) {
            const KPoint k = field.kpoint(i, j);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", k.kx, k.ky, field.at(i, j));
            out << buf;
        }
}

}  // namespace qgeom
