#include <doctest.h>

#include <cmath>
#include <random>

#include "mvb/bounds.hpp"
#include "mvb/errors.hpp"
#include "mvb/rng.hpp"
#include "oracles.hpp"

using namespace mvb;

namespace {

LayerRatioData uniform_ratio_layer(int n, double r, double g) {
    LayerRatioData layer;
    layer.n = n;
    layer.layer_id = "u";
    layer.gamma = g;
    for (std::uint64_t idx = 1; idx < pauli_space_size(n); ++idx) {
        layer.ratios[idx] = r;
    }
    return layer;
}

PauliStochastishChannel depolarizing(int n, double r) {
    PauliVector f = PauliVector::constant(n, r);
    f.values[0] = 1.0;
    return PauliStochastishChannel::from_fidelities(std::move(f));
}

}  // namespace

TEST_CASE("nu0 estimate") {
    CHECK(nu0_estimate(uniform_ratio_layer(2, 1.0, 1.0)) == doctest::Approx(1.0));
    CHECK(nu0_estimate(uniform_ratio_layer(1, 1.2, 1.0)) == doctest::Approx(1.15).epsilon(1e-14));

    LayerRatioData partial;
    partial.n = 1;
    partial.gamma = 1.0;
    partial.ratios[PauliString::parse("Z").index()] = 0.9;
    CHECK(nu0_estimate(partial) == doctest::Approx(0.975).epsilon(1e-14));
    CHECK(partial.coverage() == doctest::Approx(0.5));

    LayerRatioData empty;
    empty.n = 1;
    CHECK_THROWS_AS(nu0_estimate(empty), ValidationError);
}

TEST_CASE("delta_gamma") {
    SUBCASE("stays at gamma - 1 for perfect ratios") {
        CHECK(delta_gamma({uniform_ratio_layer(2, 1.0, 1.05)}) == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(delta_gamma({uniform_ratio_layer(2, 1.0, 1.0)}) == doctest::Approx(0.0));
    }
    SUBCASE("pure cross-talk closed form") {
        const double lambda = 1e-3;
        const int l = 4;
        PauliLindbladModel actual{4, "x", {{PauliString::parse("ZIIZ"), lambda}}};
        PauliLindbladModel fitted{4, "x",
                                  {{PauliString::parse("ZIII"), lambda},
                                   {PauliString::parse("IIIZ"), lambda}}};
        const auto layer = LayerRatioData::from_channels(channel_from_model(actual), fitted);
        const std::vector<LayerRatioData> layers(l, layer);
        const double expected = std::exp(4.0 * l * lambda) - 1.0;
        CHECK(delta_gamma(layers) == doctest::Approx(expected).epsilon(1e-9));
        CHECK(worst_case_clifford(layers) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("delta_two") {
    SUBCASE("vanishes for perfect mitigation") {
        CHECK(delta_two({uniform_ratio_layer(3, 1.0, 1.2)}) == 0.0);
    }
    SUBCASE("uniform ratios reproduce the depolarizing closed form") {
        for (double r : {0.9, 0.99, 1.1}) {
            const double expected = 2.0 * (3.0 / 4.0) * std::abs(1.0 - r);
            CHECK(delta_two({uniform_ratio_layer(1, r, 1.3)}) ==
                  doctest::Approx(expected).epsilon(1e-12));
            CHECK(diamond_distance_identity_exact(depolarizing(1, r)) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("single layer upper-bounds the exact diamond distance") {
        auto rng = make_rng(71, 0);
        std::uniform_real_distribution<double> dist(0.85, 1.15);
        for (int n = 1; n <= 3; ++n) {
            for (int trial = 0; trial < 20; ++trial) {
                LayerRatioData layer;
                layer.n = n;
                layer.gamma = 1.0;
                PauliVector f = PauliVector::constant(n, 1.0);
                for (std::uint64_t idx = 1; idx < pauli_space_size(n); ++idx) {
                    const double r = dist(rng);
                    layer.ratios[idx] = r;
                    f.values[idx] = r;
                }
                const double exact =
                    diamond_distance_identity_exact(PauliStochastishChannel::from_fidelities(f));
                CHECK(delta_two({layer}) >= exact - 1e-10);
            }
        }
    }
    SUBCASE("delta_gamma dominates delta_two at perfect ratios") {
        const auto layer = uniform_ratio_layer(2, 1.0, 1.08);
        CHECK(delta_two({layer}) == 0.0);
        CHECK(delta_gamma({layer}) > 0.0);
    }
}

TEST_CASE("delta_cptp") {
    CHECK(delta_cptp({1.0, 1.0}) == 0.0);
    CHECK(delta_cptp({0.99, 0.99}) == doctest::Approx(0.04).epsilon(1e-14));
    CHECK_THROWS_AS(delta_cptp({1.1}), ValidationError);

    // Single CPTP layer: 2(1 - nu0) equals the exact diamond distance.
    const auto dep = depolarizing(2, 0.95);
    const PauliVector nu = wht_commutation(dep.fidelities, true);
    CHECK(delta_cptp({nu.values[0]}) ==
          doctest::Approx(diamond_distance_identity_exact(dep)).epsilon(1e-12));
}

TEST_CASE("worst_case_clifford") {
    CHECK(worst_case_clifford({uniform_ratio_layer(2, 1.0, 1.0)}) == 0.0);

    LayerRatioData layer;
    layer.n = 1;
    layer.ratios[PauliString::parse("X").index()] = 0.95;
    layer.ratios[PauliString::parse("Z").index()] = 1.01;
    CHECK(worst_case_clifford({layer}) == doctest::Approx(0.05).epsilon(1e-14));

    LayerRatioData a;
    a.n = 1;
    a.ratios[PauliString::parse("X").index()] = 1.02;
    LayerRatioData b;
    b.n = 1;
    b.ratios[PauliString::parse("Z").index()] = 1.03;
    CHECK(worst_case_clifford({a, b}) == doctest::Approx(std::abs(1 - 1.02 * 1.03)).epsilon(1e-12));

    LayerRatioData identity_only;
    identity_only.n = 1;
    identity_only.ratios[0] = 1.0;
    CHECK_THROWS_AS(worst_case_clifford({identity_only}), ValidationError);
}

TEST_CASE("worst-case Clifford sits below the rigorous bounds on full ratio data") {
    auto rng = make_rng(73, 0);
    std::uniform_real_distribution<double> eps(1e-4, 1e-3);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 2;
        const auto model = oracles::random_sparse_model(n, 6, 1e-3, 1e-2, rng);
        auto actual = model;
        for (auto& term : actual.terms) {
            term.rate += eps(rng);
        }
        std::vector<LayerRatioData> layers(
            3, LayerRatioData::from_channels(channel_from_model(actual), model));
        const double wc = worst_case_clifford(layers);
        CHECK(wc <= std::min(delta_gamma(layers), delta_two(layers)) + 1e-9);
    }
}

TEST_CASE("compare_models") {
    PauliLindbladModel a{1, "l", {{PauliString::parse("X"), 0.01}}};
    SUBCASE("identical models give zero") {
        CHECK(compare_models(a, a, 3) == 0.0);
    }
    SUBCASE("single-term plug-in") {
        PauliLindbladModel b{1, "l", {{PauliString::parse("X"), 0.02}}};
        CHECK(compare_models(a, b, 1) == doctest::Approx(std::exp(0.02) - 1.0).epsilon(1e-12));
    }
    SUBCASE("asymmetric in its arguments") {
        PauliLindbladModel b{1, "l", {{PauliString::parse("X"), 0.02}}};
        const double ab = compare_models(a, b, 2);
        const double ba = compare_models(b, a, 2);
        CHECK(ab != ba);
        CHECK(ab > 0.0);
        CHECK(ba > 0.0);
    }
    SUBCASE("T1 drift all-decrease closed form") {
        const double t = 100e-9;
        const int l = 100;
        const std::vector<double> nominal{200e-6, 150e-6};
        std::vector<double> actual_t1 = nominal;
        for (auto& v : actual_t1) {
            v /= 0.9;  // relaxation rates decrease by 10%
        }
        const auto learnt = twirled_amplitude_damping(nominal, t);
        const auto actual = twirled_amplitude_damping(actual_t1, t);
        double r_zz = 1.0;
        for (std::size_t q = 0; q < nominal.size(); ++q) {
            const double delta = t / (4.0 * actual_t1[q]) - t / (4.0 * nominal[q]);
            r_zz *= std::exp(-4.0 * delta);
        }
        const double expected = std::pow(r_zz, l) - 1.0;
        CHECK(compare_models(actual, learnt, l) == doctest::Approx(expected).epsilon(1e-9));

        std::vector<LayerRatioData> layers(
            static_cast<std::size_t>(l),
            LayerRatioData::from_channels(channel_from_model(actual), learnt));
        CHECK(worst_case_clifford(layers) == doctest::Approx(expected).epsilon(1e-9));
    }
    SUBCASE("mismatched qubit counts are rejected") {
        PauliLindbladModel wide{2, "l", {{PauliString::parse("XX"), 0.01}}};
        CHECK_THROWS_AS(compare_models(a, wide, 1), ValidationError);
    }
}

TEST_CASE("pea_bound") {
    SUBCASE("matching fidelities give exactly zero") {
        auto rng = make_rng(79, 0);
        for (int trial = 0; trial < 10; ++trial) {
            const auto model = oracles::random_sparse_model(2, 5, 1e-4, 1e-2, rng);
            const auto f = channel_from_model(model).fidelities;
            const auto bound = pea_bound(f, f, {0.0, 0.5, 1.0, 2.0}, 4);
            for (double eta : bound.eta) {
                CHECK(eta == 0.0);
            }
            CHECK(bound.sigma.cwiseAbs().maxCoeff() == 0.0);
        }
    }
    SUBCASE("mu = 0 always vanishes") {
        const auto f = channel_from_model(
                           PauliLindbladModel{1, "l", {{PauliString::parse("X"), 0.02}}})
                           .fidelities;
        const auto g = channel_from_model(
                           PauliLindbladModel{1, "l", {{PauliString::parse("X"), 0.03}}})
                           .fidelities;
        const auto bound = pea_bound(f, g, {0.0}, 3);
        CHECK(bound.eta[0] == 0.0);
    }
    SUBCASE("single mismatch against the identity model matches delta_two") {
        PauliVector f = PauliVector::constant(1, 1.0);
        f.at(PauliString::parse("Z")) = 0.93;
        const PauliVector ones = PauliVector::constant(1, 1.0);
        const auto bound = pea_bound(f, ones, {1.0}, 1);

        LayerRatioData layer;
        layer.n = 1;
        layer.gamma = 1.0;
        for (std::uint64_t idx = 1; idx < 4; ++idx) {
            layer.ratios[idx] = f.values[idx];
        }
        CHECK(bound.eta[0] == doctest::Approx(delta_two({layer})).epsilon(1e-12));
    }
    SUBCASE("eta grows with mu when the model over-estimates fidelities") {
        auto rng = make_rng(83, 0);
        for (int trial = 0; trial < 10; ++trial) {
            auto model = oracles::random_sparse_model(2, 5, 1e-3, 1e-2, rng);
            auto actual = model;
            for (auto& term : actual.terms) {
                term.rate *= 1.5;  // actual noisier, so f_meas <= f_mod
            }
            const auto f = channel_from_model(actual).fidelities;
            const auto g = channel_from_model(model).fidelities;
            const auto bound = pea_bound(f, g, {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}, 2);
            for (std::size_t i = 1; i < bound.eta.size(); ++i) {
                CHECK(bound.eta[i] >= bound.eta[i - 1] - 1e-12);
            }
        }
    }
    SUBCASE("covariance is the rank-one outer product") {
        PauliVector f = PauliVector::constant(1, 1.0);
        f.at(PauliString::parse("X")) = 0.97;
        const auto bound = pea_bound(f, PauliVector::constant(1, 1.0), {0.5, 1.0, 2.0}, 2);
        for (std::size_t i = 0; i < bound.eta.size(); ++i) {
            for (std::size_t j = 0; j < bound.eta.size(); ++j) {
                CHECK(bound.sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                      doctest::Approx(bound.eta[i] * bound.eta[j]).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("tem_bound") {
    SUBCASE("exact model gives zero") {
        CHECK(tem_bound({uniform_ratio_layer(2, 1.0, 1.1), uniform_ratio_layer(2, 1.0, 1.2)}) == 0.0);
    }
    SUBCASE("single layer equals the distance term") {
        const auto layer = uniform_ratio_layer(1, 0.95, 1.3);
        CHECK(tem_bound({layer}) == doctest::Approx(layer_distance_two(layer)).epsilon(1e-14));
    }
    SUBCASE("dominates the PEC bound for gamma > 1") {
        auto rng = make_rng(89, 0);
        std::uniform_real_distribution<double> dist(0.9, 1.1);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<LayerRatioData> layers;
            for (int l = 0; l < 2 + trial % 3; ++l) {
                LayerRatioData layer;
                layer.n = 2;
                layer.gamma = 1.0 + 0.05 * (l + 1);
                for (std::uint64_t idx = 1; idx < pauli_space_size(2); ++idx) {
                    layer.ratios[idx] = dist(rng);
                }
                layers.push_back(std::move(layer));
            }
            CHECK(tem_bound(layers) >= delta_two(layers) - 1e-12);
        }
    }
}

TEST_CASE("depth scaling: rigorous bounds grow super-linearly, the Clifford heuristic linearly") {
    // Low-error layer with gamma > 1: the non-CP weighting compounds the
    // rigorous bounds while the extreme-ratio products stay near linear.
    LayerRatioData layer;
    layer.n = 2;
    layer.layer_id = "l";
    layer.gamma = 1.01;
    auto rng = make_rng(137, 0);
    std::uniform_real_distribution<double> dist(0.995, 1.002);
    for (std::uint64_t idx = 1; idx < pauli_space_size(2); ++idx) {
        layer.ratios[idx] = dist(rng);
    }
    auto at_depth = [&](int depth) {
        return std::vector<LayerRatioData>(static_cast<std::size_t>(depth), layer);
    };
    const int d = 16;
    CHECK(delta_gamma(at_depth(2 * d)) > 2.0 * delta_gamma(at_depth(d)));
    CHECK(delta_two(at_depth(2 * d)) > 2.0 * delta_two(at_depth(d)));
    const double wc_d = worst_case_clifford(at_depth(d));
    const double wc_2d = worst_case_clifford(at_depth(2 * d));
    CHECK(wc_2d < 2.0 * wc_d);          // sub-linear: products bend toward saturation
    CHECK(wc_2d > 2.0 * wc_d * 0.9);    // but stay near linear in the low-error regime
}

TEST_CASE("gls_line_fit") {
    SUBCASE("two points define the line exactly") {
        const auto fit = gls_line_fit({1.0, 3.0}, {2.0, 8.0}, Eigen::MatrixXd());
        CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(fit.intercept == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("rank-one covariance is handled") {
        std::vector<double> x{0.5, 1.0, 2.0};
        std::vector<double> y{1.0, 2.0, 4.0};
        Eigen::VectorXd eta(3);
        eta << 0.1, 0.2, 0.4;
        const Eigen::MatrixXd sigma = eta * eta.transpose();
        const auto fit = gls_line_fit(x, y, sigma);
        CHECK(std::isfinite(fit.slope));
        CHECK(std::isfinite(fit.intercept));
        CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-8));
    }
}

TEST_CASE("bound report") {
    const auto layer = uniform_ratio_layer(2, 0.98, 1.04);
    const auto report = build_bound_report({layer, layer});
    CHECK(report.n == 2);
    CHECK(report.layers.size() == 2);
    CHECK(report.delta_min == std::min(report.delta_gamma, report.delta_two));
    CHECK(report.delta_min <= report.delta_gamma);
    CHECK(report.delta_min <= report.delta_two);
    CHECK(report.worst_case_clifford >= 0.0);
    CHECK(report.coverage_fraction == doctest::Approx(1.0));
    CHECK(report.delta_gamma >= 0.0);
    CHECK(report.delta_two >= 0.0);
}
