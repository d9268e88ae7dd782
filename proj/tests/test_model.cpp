#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qgeom/model.hpp"
#include "qgeom/projector.hpp"
#include "oracles.hpp"

using namespace qgeom;

TEST_CASE("kpoint wrapping is canonical and idempotent") {
    KPoint k{-0.5, 3 * two_pi + 1.0};
    KPoint w = k.wrapped();
    CHECK(w.kx >= 0.0);
    CHECK(w.kx < two_pi);
    CHECK(w.kx == Catch::Approx(two_pi - 0.5));
    CHECK(w.ky == Catch::Approx(1.0));
    KPoint w2 = w.wrapped();
    CHECK(w2.kx == w.kx);
    CHECK(w2.ky == w.ky);
    CHECK(k.equals_mod_2pi(w));
}

TEST_CASE("two-band jet at the symmetry point") {
    const ModelSpec spec = ModelSpec::two_band(1.0);
    const HamiltonianJet jet = eval_jet(spec, {0.0, 0.0});
    Matrix mz(2, 2), mx(2, 2);
    mz << -1, 0, 0, 1;  // -sigma_z
    mx << 0, 1, 1, 0;
    CHECK((jet.H - mz).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((jet.dH[0] - mx).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((jet.d2H[0][0] + mz).cwiseAbs().maxCoeff() < 1e-15);  // d2H_xx = sigma_z
}

TEST_CASE("hermiticity, symmetry and periodicity invariants") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    const ModelSpec two = ModelSpec::two_band(0.7);
    const ModelSpec four = oracle::random_four_band();
    for (const ModelSpec& spec : {two, four}) {
        for (int t = 0; t < 30; ++t) {
            const KPoint k{angle(rng), angle(rng)};
            const HamiltonianJet jet = eval_jet(spec, k);
            CHECK((jet.H - jet.H.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
            for (int mu = 0; mu < 2; ++mu)
                CHECK((jet.dH[mu] - jet.dH[mu].adjoint()).cwiseAbs().maxCoeff() < 1e-13);
            for (int mu = 0; mu < 2; ++mu)
                for (int nu = 0; nu < 2; ++nu) {
                    CHECK((jet.d2H[mu][nu] - jet.d2H[mu][nu].adjoint()).cwiseAbs().maxCoeff() <
                          1e-13);
                    CHECK((jet.d2H[mu][nu] - jet.d2H[nu][mu]).cwiseAbs().maxCoeff() == 0.0);
                }
            const HamiltonianJet px = eval_jet(spec, {k.kx + two_pi, k.ky});
            const HamiltonianJet py = eval_jet(spec, {k.kx, k.ky + two_pi});
            CHECK((px.H - jet.H).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((py.H - jet.H).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
}

TEST_CASE("analytic derivatives match central finite differences") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    const double h = 1e-4;
    for (const ModelSpec& spec : {ModelSpec::two_band(1.0), oracle::random_four_band()}) {
        for (int t = 0; t < 10; ++t) {
            const KPoint k{angle(rng), angle(rng)};
            const HamiltonianJet jet = eval_jet(spec, k);
            for (int mu = 0; mu < 2; ++mu) {
                auto at = [&](double s) {
                    KPoint p = k;
                    (mu == 0 ? p.kx : p.ky) += s;
                    return eval_jet(spec, p);
                };
                const Matrix fd =
                    (at(-2 * h).H - 8.0 * at(-h).H + 8.0 * at(h).H - at(2 * h).H) / (12.0 * h);
                const double scale = std::max(1.0, jet.dH[mu].cwiseAbs().maxCoeff());
                CHECK((fd - jet.dH[mu]).cwiseAbs().maxCoeff() / scale < 1e-8);
                for (int nu = 0; nu < 2; ++nu) {
                    const Matrix fdd = (at(-2 * h).dH[nu] - 8.0 * at(-h).dH[nu] +
                                        8.0 * at(h).dH[nu] - at(2 * h).dH[nu]) /
                                       (12.0 * h);
                    const double s2 = std::max(1.0, jet.d2H[mu][nu].cwiseAbs().maxCoeff());
                    CHECK((fdd - jet.d2H[mu][nu]).cwiseAbs().maxCoeff() / s2 < 1e-8);
                }
            }
        }
    }
}

TEST_CASE("tight-binding file reproduces the built-in two-band model") {
    const double m0 = 1.0;
    const ModelSpec builtin = ModelSpec::two_band(m0);
    const ModelSpec tb = parse_model_spec(oracle::two_band_tb_json(m0));
    REQUIRE(tb.kind == ModelSpec::Kind::TightBinding);
    REQUIRE(tb.n_bands == 2);
    double worst = 0.0;
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            const KPoint k{two_pi * i / 32, two_pi * j / 32};
            const HamiltonianJet a = eval_jet(builtin, k);
            const HamiltonianJet b = eval_jet(tb, k);
            worst = std::max(worst, (a.H - b.H).cwiseAbs().maxCoeff());
            for (int mu = 0; mu < 2; ++mu)
                worst = std::max(worst, (a.dH[mu] - b.dH[mu]).cwiseAbs().maxCoeff());
            for (int mu = 0; mu < 2; ++mu)
                for (int nu = 0; nu < 2; ++nu)
                    worst = std::max(worst, (a.d2H[mu][nu] - b.d2H[mu][nu]).cwiseAbs().maxCoeff());
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("model spec parsing and validation errors") {
    SECTION("minimal two-band document") {
        const ModelSpec s = parse_model_spec(std::string(R"({"kind":"two_band_d_vector","m0":1.0})"));
        CHECK(s.kind == ModelSpec::Kind::TwoBandDVector);
        CHECK(s.m0 == 1.0);
    }
    SECTION("missing m0 names the field") {
        try {
            parse_model_spec(std::string(R"({"kind":"two_band_d_vector"})"));
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("m0") != std::string::npos);
        }
    }
    SECTION("unknown kind") {
        CHECK_THROWS_AS(parse_model_spec(std::string(R"({"kind":"three_band"})")), ValidationError);
    }
    SECTION("unmatched hopping pair is a Hermiticity error") {
        const std::string text = R"({"kind":"tight_binding","n_bands":1,
            "hoppings":[{"dR":[1,0],"re":[[1.0]],"im":[[0.0]]}]})";
        try {
            parse_model_spec(text);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("dR = [1, 0]") != std::string::npos);
        }
    }
    SECTION("mismatched pair amplitude is rejected") {
        const std::string text = R"({"kind":"tight_binding","n_bands":1,"hoppings":[
            {"dR":[1,0],"re":[[1.0]],"im":[[0.5]]},
            {"dR":[-1,0],"re":[[1.0]],"im":[[0.5]]}]})";
        CHECK_THROWS_AS(parse_model_spec(text), ValidationError);
    }
    SECTION("malformed JSON") {
        CHECK_THROWS_AS(parse_model_spec(std::string("{not json")), ValidationError);
    }
}
