#include <doctest.h>

#include <cmath>
#include <random>

#include "mvb/channel.hpp"
#include "mvb/errors.hpp"
#include "mvb/rng.hpp"
#include "oracles.hpp"

using namespace mvb;

namespace {

PauliStochastishChannel depolarizing(int n, double r) {
    PauliVector f = PauliVector::constant(n, r);
    f.values[0] = 1.0;
    return PauliStochastishChannel::from_fidelities(std::move(f));
}

}  // namespace

TEST_CASE("model_fidelity examples") {
    PauliLindbladModel m{1, "l", {{PauliString::parse("X"), 0.01}}};
    CHECK(model_fidelity(m, PauliString::parse("X")) == doctest::Approx(1.0));
    CHECK(model_fidelity(m, PauliString::parse("Z")) == doctest::Approx(std::exp(-0.02)).epsilon(1e-14));

    PauliLindbladModel m2{2, "l", {{PauliString::parse("XX"), 0.005}, {PauliString::parse("IZ"), 0.002}}};
    CHECK(model_fidelity(m2, PauliString::parse("ZI")) ==
          doctest::Approx(std::exp(-0.01)).epsilon(1e-14));
}

TEST_CASE("channel_from_model examples") {
    SUBCASE("empty model gives the identity channel") {
        PauliLindbladModel empty{2, "l", {}};
        const auto c = channel_from_model(empty);
        for (double f : c.fidelities.values) {
            CHECK(f == 1.0);
        }
    }
    SUBCASE("single-qubit X and Y generators") {
        const double lambda = 0.01;
        PauliLindbladModel m{1, "l",
                             {{PauliString::parse("X"), lambda}, {PauliString::parse("Y"), lambda}}};
        const auto c = channel_from_model(m);
        CHECK(c.fidelities.at(PauliString::parse("X")) ==
              doctest::Approx(std::exp(-2 * lambda)).epsilon(1e-14));
        CHECK(c.fidelities.at(PauliString::parse("Y")) ==
              doctest::Approx(std::exp(-2 * lambda)).epsilon(1e-14));
        CHECK(c.fidelities.at(PauliString::parse("Z")) ==
              doctest::Approx(std::exp(-4 * lambda)).epsilon(1e-14));
    }
}

TEST_CASE("model channels are CPTP: probabilities nonnegative and normalized") {
    auto rng = make_rng(31, 0);
    for (int n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 15; ++trial) {
            const auto model = oracles::random_sparse_model(n, 6, 0.0, 0.05, rng);
            const auto c = channel_from_model(model);
            const PauliVector nu = wht_commutation(c.fidelities, true);
            double sum = 0.0;
            for (double v : nu.values) {
                CHECK(v >= -1e-12);
                sum += v;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("gamma examples and the inverse-channel norm inequality") {
    CHECK(gamma(PauliLindbladModel{1, "l", {}}) == doctest::Approx(1.0));
    PauliLindbladModel m{1, "l", {{PauliString::parse("X"), 0.004}, {PauliString::parse("Z"), 0.006}}};
    CHECK(gamma(m) == doctest::Approx(std::exp(0.02)).epsilon(1e-14));

    auto rng = make_rng(37, 0);
    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto model = oracles::random_sparse_model(n, 5, 0.0, 0.08, rng);
            const auto inv = invert(channel_from_model(model));
            CHECK(diamond_norm_exact(inv) <= gamma(model) + 1e-10);
        }
    }
}

TEST_CASE("compose, invert and ratio are elementwise") {
    auto rng = make_rng(41, 0);
    const auto model = oracles::random_sparse_model(3, 6, 0.001, 0.05, rng);
    const auto e = channel_from_model(model);
    const auto id = compose(e, invert(e));
    for (double f : id.fidelities.values) {
        CHECK(f == doctest::Approx(1.0).epsilon(1e-14));
    }
    const auto r = ratio(e.fidelities, e.fidelities);
    for (double f : r.fidelities.values) {
        CHECK(f == 1.0);
    }
    PauliVector meas = PauliVector::constant(1, 1.0);
    PauliVector mod = PauliVector::constant(1, 1.0);
    meas.at(PauliString::parse("Z")) = 0.95;
    mod.at(PauliString::parse("Z")) = 0.97;
    CHECK(ratio(meas, mod).fidelities.at(PauliString::parse("Z")) ==
          doctest::Approx(0.95 / 0.97).epsilon(1e-14));

    PauliVector zero = PauliVector::constant(1, 1.0);
    zero.at(PauliString::parse("X")) = 0.0;
    CHECK_THROWS_AS(invert(PauliStochastishChannel::from_fidelities(zero)), NumericalError);
}

TEST_CASE("diamond norm of Pauli channels") {
    SUBCASE("CPTP channels have norm 1") {
        auto rng = make_rng(43, 0);
        for (int trial = 0; trial < 10; ++trial) {
            const auto model = oracles::random_sparse_model(2, 5, 0.0, 0.1, rng);
            CHECK(diamond_norm_exact(channel_from_model(model)) ==
                  doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("inflating ratios") {
        PauliVector f(1);
        f.values = {1.0, 1.2, 1.2, 1.2};
        CHECK(diamond_norm_exact(PauliStochastishChannel::from_fidelities(f)) ==
              doctest::Approx(1.3).epsilon(1e-13));
    }
    SUBCASE("identity") {
        CHECK(diamond_norm_exact(PauliStochastishChannel::identity(3)) == doctest::Approx(1.0));
    }
}

TEST_CASE("diamond distance to identity") {
    CHECK(diamond_distance_identity_exact(PauliStochastishChannel::identity(2)) ==
          doctest::Approx(0.0));
    CHECK(diamond_distance_identity_exact(depolarizing(1, 0.9)) ==
          doctest::Approx(0.15).epsilon(1e-13));
    const double above = diamond_distance_identity_exact(depolarizing(1, 1.2));
    CHECK(above == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(above == doctest::Approx(diamond_norm_exact(depolarizing(1, 1.2)) - 1.0).epsilon(1e-12));
}

TEST_CASE("depolarizing family matches the closed form exactly") {
    auto rng = make_rng(47, 0);
    std::uniform_real_distribution<double> rdist(1e-6, 2.0 - 1e-6);
    for (int n = 1; n <= 3; ++n) {
        const double size = static_cast<double>(pauli_space_size(n));
        for (int trial = 0; trial < 30; ++trial) {
            const double r = rdist(rng);
            const double expected = 2.0 * (size - 1.0) / size * std::abs(1.0 - r);
            CHECK(diamond_distance_identity_exact(depolarizing(n, r)) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("norm-distance triangle relation") {
    auto rng = make_rng(53, 0);
    std::uniform_real_distribution<double> dist(0.7, 1.3);
    for (int trial = 0; trial < 30; ++trial) {
        PauliVector f(2);
        f.values[0] = 1.0;
        for (std::size_t i = 1; i < f.size(); ++i) {
            f.values[i] = dist(rng);
        }
        const auto v = PauliStochastishChannel::from_fidelities(f);
        CHECK(diamond_norm_exact(v) <= 1.0 + diamond_distance_identity_exact(v) + 1e-10);
    }
}

TEST_CASE("twirled amplitude damping") {
    SUBCASE("infinite T1 drops the qubit") {
        const auto m = twirled_amplitude_damping({std::numeric_limits<double>::infinity()}, 1e-7);
        CHECK(m.terms.empty());
    }
    SUBCASE("rates are t over 4 T1") {
        const auto m = twirled_amplitude_damping({200e-6}, 100e-9);
        REQUIRE(m.terms.size() == 2);
        CHECK(m.terms[0].rate == doctest::Approx(1.25e-4).epsilon(1e-14));
        CHECK(m.terms[1].rate == doctest::Approx(1.25e-4).epsilon(1e-14));
        const auto c = channel_from_model(m);
        CHECK(c.fidelities.at(PauliString::parse("Z")) ==
              doctest::Approx(std::exp(-100e-9 / 200e-6)).epsilon(1e-14));
        CHECK(c.fidelities.at(PauliString::parse("X")) ==
              doctest::Approx(std::exp(-100e-9 / 400e-6)).epsilon(1e-14));
    }
    SUBCASE("drift ratio of the Z fidelity") {
        const double t = 100e-9;
        const auto learnt = twirled_amplitude_damping({200e-6}, t);
        const auto actual = twirled_amplitude_damping({100e-6}, t);
        const auto r = ratio(channel_from_model(actual).fidelities,
                             channel_from_model(learnt).fidelities);
        const double delta = t / (4.0 * 100e-6) - t / (4.0 * 200e-6);
        CHECK(r.fidelities.at(PauliString::parse("Z")) ==
              doctest::Approx(std::exp(-4.0 * delta)).epsilon(1e-12));
    }
    SUBCASE("rejects nonpositive times") {
        CHECK_THROWS_AS(twirled_amplitude_damping({-1.0}, 1e-7), ValidationError);
        CHECK_THROWS_AS(twirled_amplitude_damping({1e-4}, 0.0), ValidationError);
    }
}

TEST_CASE("model validation") {
    PauliLindbladModel dup{1, "l", {{PauliString::parse("X"), 0.1}, {PauliString::parse("X"), 0.2}}};
    CHECK_THROWS_AS(dup.validate(), ValidationError);
    PauliLindbladModel neg{1, "l", {{PauliString::parse("X"), -0.1}}};
    CHECK_THROWS_AS(neg.validate(), ValidationError);
    PauliLindbladModel ident{1, "l", {{PauliString::identity(1), 0.1}}};
    CHECK_THROWS_AS(ident.validate(), ValidationError);
}

TEST_CASE("pairwise local paulis on a line") {
    const auto paulis = pairwise_local_paulis(4, line_pairs(4));
    CHECK(paulis.size() == 12 + 27);
    for (const auto& p : paulis) {
        CHECK(!p.is_identity());
        CHECK(p.weight() <= 2);
    }
}
