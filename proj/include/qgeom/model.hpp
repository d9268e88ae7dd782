#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgeom/common.hpp"
#include "qgeom/kpoint.hpp"

namespace qgeom {

// Second-order jet of the Bloch Hamiltonian: value, k-gradient and k-Hessian.
// Templated on the real scalar so the singular-curvature pipeline can run the
// same formulas in extended precision.
template <typename S>
struct HamiltonianJetT {
    using Mat = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;
    int n_bands = 0;
    Mat H;
    std::array<Mat, 2> dH;                  // dH[mu] = d_mu H
    std::array<std::array<Mat, 2>, 2> d2H;  // d2H[mu][nu] = d_mu d_nu H
};

using HamiltonianJet = HamiltonianJetT<double>;

struct HoppingTerm {
    int dr1 = 0;
    int dr2 = 0;
    Matrix amplitude;
};

struct ModelSpec {
    enum class Kind { TwoBandDVector, TightBinding };

    Kind kind = Kind::TwoBandDVector;
    double m0 = 1.0;                    // two_band_d_vector only
    int n_bands = 2;
    std::vector<HoppingTerm> hoppings;  // tight_binding only

    static ModelSpec two_band(double m0) {
        ModelSpec s;
        s.kind = Kind::TwoBandDVector;
        s.m0 = m0;
        s.n_bands = 2;
        return s;
    }

    static ModelSpec tight_binding(int n_bands, std::vector<HoppingTerm> hops);
};

namespace detail {

template <typename S>
inline typename HamiltonianJetT<S>::Mat pauli_t(int i) {
    typename HamiltonianJetT<S>::Mat m(2, 2);
    const std::complex<S> I(0, 1), one(1, 0), zero(0, 0);
    switch (i) {
        case 0: m << one, zero, zero, one; break;
        case 1: m << zero, one, one, zero; break;
        case 2: m << zero, -I, I, zero; break;
        default: m << one, zero, zero, -one; break;
    }
    return m;
}

inline Matrix pauli(int i) { return pauli_t<double>(i); }

inline std::string hopping_name(const HoppingTerm& h, std::size_t idx) {
    std::ostringstream os;
    os << "hoppings[" << idx << "] (dR = [" << h.dr1 << ", " << h.dr2 << "])";
    return os.str();
}

}  // namespace detail

// Checks the Hermiticity pairing amplitude(-dR) = amplitude(dR)^dagger; throws
// ValidationError naming the offending hopping.
inline void validate_model(const ModelSpec& spec) {
    if (spec.kind == ModelSpec::Kind::TwoBandDVector) {
        if (!std::isfinite(spec.m0))
            throw ValidationError("two_band_d_vector: m0 is not finite");
        return;
    }
    if (spec.n_bands < 1)
        throw ValidationError("tight_binding: n_bands must be a positive integer");
    const int n = spec.n_bands;
    for (std::size_t i = 0; i < spec.hoppings.size(); ++i) {
        const auto& h = spec.hoppings[i];
        if (h.amplitude.rows() != n || h.amplitude.cols() != n)
            throw ValidationError(detail::hopping_name(h, i) + ": amplitude is not " +
                                  std::to_string(n) + "x" + std::to_string(n));
        for (std::size_t j = 0; j < i; ++j)
            if (spec.hoppings[j].dr1 == h.dr1 && spec.hoppings[j].dr2 == h.dr2)
                throw ValidationError(detail::hopping_name(h, i) + ": duplicate dR entry");
    }
    for (std::size_t i = 0; i < spec.hoppings.size(); ++i) {
        const auto& h = spec.hoppings[i];
        bool paired = false;
        for (const auto& g : spec.hoppings) {
            if (g.dr1 == -h.dr1 && g.dr2 == -h.dr2) {
                paired = true;
                const double mismatch =
                    (g.amplitude - h.amplitude.adjoint()).cwiseAbs().maxCoeff();
                if (mismatch > 1e-12)
                    throw ValidationError(detail::hopping_name(h, i) +
                                          ": Hermiticity pair violated, |amplitude(-dR) - "
                                          "amplitude(dR)^dagger| = " +
                                          std::to_string(mismatch));
                break;
            }
        }
        if (!paired)
            throw ValidationError(detail::hopping_name(h, i) +
                                  ": no partner hopping at -dR (Hermiticity pair missing)");
    }
}

inline ModelSpec ModelSpec::tight_binding(int n_bands, std::vector<HoppingTerm> hops) {
    ModelSpec s;
    s.kind = Kind::TightBinding;
    s.n_bands = n_bands;
    s.hoppings = std::move(hops);
    validate_model(s);
    return s;
}

// Evaluates H, dH, d2H at k with exact trigonometric derivatives.
template <typename S>
inline HamiltonianJetT<S> eval_jet_t(const ModelSpec& spec, S kx, S ky) {
    using Mat = typename HamiltonianJetT<S>::Mat;
    HamiltonianJetT<S> jet;
    if (spec.kind == ModelSpec::Kind::TwoBandDVector) {
        jet.n_bands = 2;
        const S sx = std::sin(kx), cx = std::cos(kx);
        const S sy = std::sin(ky), cy = std::cos(ky);
        const Mat px = detail::pauli_t<S>(1), py = detail::pauli_t<S>(2),
                  pz = detail::pauli_t<S>(3);
        jet.H = sx * px + sy * py + (S(spec.m0) - cx - cy) * pz;
        jet.dH[0] = cx * px + sx * pz;
        jet.dH[1] = cy * py + sy * pz;
        jet.d2H[0][0] = -sx * px + cx * pz;
        jet.d2H[1][1] = -sy * py + cy * pz;
        jet.d2H[0][1] = Mat::Zero(2, 2);
        jet.d2H[1][0] = jet.d2H[0][1];
        return jet;
    }

    const int n = spec.n_bands;
    jet.n_bands = n;
    jet.H = Mat::Zero(n, n);
    jet.dH[0] = Mat::Zero(n, n);
    jet.dH[1] = Mat::Zero(n, n);
    jet.d2H[0][0] = Mat::Zero(n, n);
    jet.d2H[0][1] = Mat::Zero(n, n);
    jet.d2H[1][1] = Mat::Zero(n, n);
    const std::complex<S> I(0, 1);
    for (const auto& h : spec.hoppings) {
        const Mat amp = h.amplitude.cast<std::complex<S>>();
        const S phase_arg = kx * S(h.dr1) + ky * S(h.dr2);
        const std::complex<S> phase = std::exp(I * phase_arg);
        jet.H += amp * phase;
        jet.dH[0] += (I * S(h.dr1)) * amp * phase;
        jet.dH[1] += (I * S(h.dr2)) * amp * phase;
        jet.d2H[0][0] += (-S(h.dr1) * S(h.dr1)) * amp * phase;
        jet.d2H[0][1] += (-S(h.dr1) * S(h.dr2)) * amp * phase;
        jet.d2H[1][1] += (-S(h.dr2) * S(h.dr2)) * amp * phase;
    }
    jet.d2H[1][0] = jet.d2H[0][1];
    return jet;
}

inline HamiltonianJet eval_jet(const ModelSpec& spec, const KPoint& k) {
    return eval_jet_t<double>(spec, k.kx, k.ky);
}

// ---- model files (JSON) ------------------------------------------------
//
// two_band:      {"kind":"two_band_d_vector","m0":<real>}
// tight_binding: {"kind":"tight_binding","n_bands":N,
//                 "hoppings":[{"dR":[i,j],"re":[[..]],"im":[[..]]}, ...]}

namespace detail {

inline Matrix parse_matrix(const nlohmann::json& re, const nlohmann::json& im, int n,
                           const std::string& where) {
    auto check_shape = [&](const nlohmann::json& a, const char* name) {
        if (!a.is_array() || static_cast<int>(a.size()) != n)
            throw ValidationError(where + "." + name + ": expected " + std::to_string(n) +
                                  " rows");
        for (const auto& row : a)
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                throw ValidationError(where + "." + name + ": expected " + std::to_string(n) +
                                      " columns per row");
    };
    check_shape(re, "re");
    check_shape(im, "im");
    Matrix m(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            m(a, b) = Complex(re[a][b].get<double>(), im[a][b].get<double>());
    return m;
}

}  // namespace detail

inline ModelSpec parse_model_spec(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.contains("kind") || !j["kind"].is_string())
        throw ValidationError("missing string field \"kind\"");
    const std::string kind = j["kind"].get<std::string>();

    ModelSpec spec;
    if (kind == "two_band_d_vector") {
        spec.kind = ModelSpec::Kind::TwoBandDVector;
        spec.n_bands = 2;
        if (!j.contains("m0") || !j["m0"].is_number())
            throw ValidationError("two_band_d_vector: missing numeric field \"m0\"");
        spec.m0 = j["m0"].get<double>();
    } else if (kind == "tight_binding") {
        spec.kind = ModelSpec::Kind::TightBinding;
        if (!j.contains("n_bands") || !j["n_bands"].is_number_integer())
            throw ValidationError("tight_binding: missing integer field \"n_bands\"");
        spec.n_bands = j["n_bands"].get<int>();
        if (spec.n_bands < 1)
            throw ValidationError("tight_binding: n_bands must be positive");
        if (!j.contains("hoppings") || !j["hoppings"].is_array())
            throw ValidationError("tight_binding: missing array field \"hoppings\"");
        std::size_t idx = 0;
        for (const auto& hj : j["hoppings"]) {
            const std::string where = "hoppings[" + std::to_string(idx) + "]";
            if (!hj.contains("dR") || !hj["dR"].is_array() || hj["dR"].size() != 2 ||
                !hj["dR"][0].is_number_integer() || !hj["dR"][1].is_number_integer())
                throw ValidationError(where + ".dR: expected an integer 2-vector");
            if (!hj.contains("re") || !hj.contains("im"))
                throw ValidationError(where + ": missing \"re\" or \"im\" matrix");
            HoppingTerm h;
            h.dr1 = hj["dR"][0].get<int>();
            h.dr2 = hj["dR"][1].get<int>();
            h.amplitude = detail::parse_matrix(hj["re"], hj["im"], spec.n_bands, where);
            spec.hoppings.push_back(std::move(h));
            ++idx;
        }
    } else {
        throw ValidationError("unknown model kind \"" + kind + "\"");
    }
    validate_model(spec);
    return spec;
}

inline ModelSpec parse_model_spec(const std::string& text) {
    std::istringstream in(text);
    return parse_model_spec(in);
}

inline ModelSpec load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    return parse_model_spec(in);
}

}  // namespace qgeom
