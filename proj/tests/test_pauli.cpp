#include <doctest.h>

#include <random>

#include "mvb/errors.hpp"
#include "mvb/pauli.hpp"
#include "mvb/rng.hpp"
#include "oracles.hpp"

using namespace mvb;

TEST_CASE("pauli text and index round-trips") {
    auto rng = make_rng(7, 0);
    for (int n = 1; n <= 6; ++n) {
        std::uniform_int_distribution<std::uint64_t> dist(0, pauli_space_size(n) - 1);
        for (int trial = 0; trial < 50; ++trial) {
            const std::uint64_t idx = dist(rng);
            const PauliString p = PauliString::from_index(n, idx);
            CHECK(p.index() == idx);
            CHECK(PauliString::parse(p.str()) == p);
        }
    }
    CHECK(PauliString::parse("XIZY").str() == "XIZY");
    CHECK_THROWS_AS(PauliString::parse("XQ"), ValidationError);
    CHECK_THROWS_AS(PauliString::from_index(2, 16), ValidationError);
}

TEST_CASE("symplectic product examples") {
    const auto X = PauliString::parse("X");
    const auto Z = PauliString::parse("Z");
    CHECK(symplectic_product(X, Z) == 1);
    CHECK(symplectic_product(X, PauliString::identity(1)) == 0);
    CHECK(symplectic_product(PauliString::parse("XIZY"), PauliString::parse("ZIZX")) == 0);
    CHECK_THROWS_AS(symplectic_product(X, PauliString::identity(2)), ValidationError);
}

TEST_CASE("symplectic product is symmetric and bilinear over products") {
    auto rng = make_rng(11, 0);
    std::uniform_int_distribution<std::uint64_t> dist(0, pauli_space_size(4) - 1);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = PauliString::from_index(4, dist(rng));
        const auto q = PauliString::from_index(4, dist(rng));
        const auto r = PauliString::from_index(4, dist(rng));
        CHECK(symplectic_product(p, q) == symplectic_product(q, p));
        const auto qr = multiply(q, r).first;
        CHECK(symplectic_product(p, qr) ==
              (symplectic_product(p, q) ^ symplectic_product(p, r)));
    }
}

TEST_CASE("pauli multiplication examples") {
    const auto X = PauliString::parse("X");
    const auto Z = PauliString::parse("Z");
    CHECK(multiply(X, X) == std::pair{PauliString::identity(1), 0});
    CHECK(multiply(X, Z) == std::pair{PauliString::parse("Y"), 3});
    CHECK(multiply(PauliString::parse("ZY"), PauliString::identity(2)) ==
          std::pair{PauliString::parse("ZY"), 0});
}

TEST_CASE("pauli multiplication matches dense matrices") {
    auto rng = make_rng(13, 0);
    for (int n = 1; n <= 3; ++n) {
        std::uniform_int_distribution<std::uint64_t> dist(0, pauli_space_size(n) - 1);
        for (int trial = 0; trial < 40; ++trial) {
            const auto p = PauliString::from_index(n, dist(rng));
            const auto q = PauliString::from_index(n, dist(rng));
            const auto [r, k] = multiply(p, q);
            const std::complex<double> phase = std::pow(std::complex<double>(0, 1), k);
            const Eigen::MatrixXcd lhs = oracles::dense_pauli(p) * oracles::dense_pauli(q);
            const Eigen::MatrixXcd rhs = phase * oracles::dense_pauli(r);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("wht single-qubit closed forms") {
    PauliVector ones(1);
    ones.values = {1, 1, 1, 1};
    const PauliVector nu = wht_commutation(ones, true);
    CHECK(nu[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(nu[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(nu[2] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(nu[3] == doctest::Approx(0.0).epsilon(1e-15));

    const double r = 0.9;
    PauliVector dep(1);
    dep.values = {1, r, r, r};
    const PauliVector nud = wht_commutation(dep, true);
    CHECK(nud[0] == doctest::Approx((1 + 3 * r) / 4).epsilon(1e-15));
    for (int i = 1; i < 4; ++i) {
        CHECK(nud[i] == doctest::Approx((1 - r) / 4).epsilon(1e-15));
    }
}

TEST_CASE("wht matches the naive dense transform for n <= 3") {
    auto rng = make_rng(17, 0);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 25; ++trial) {
            PauliVector v(n);
            for (auto& x : v.values) {
                x = dist(rng);
            }
            const PauliVector fast = wht_commutation(v, false);
            const PauliVector slow = oracles::naive_wht(v, false);
            for (std::size_t i = 0; i < fast.size(); ++i) {
                CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("wht involution and serial/parallel agreement") {
    auto rng = make_rng(19, 0);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int n = 1; n <= 6; ++n) {
        PauliVector v(n);
        for (auto& x : v.values) {
            x = dist(rng);
        }
        const PauliVector twice = wht_commutation(wht_commutation(v, false), true);
        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK(twice[i] == doctest::Approx(v[i]).epsilon(1e-10));
        }
        const PauliVector parallel = wht_commutation(v, false);
        const PauliVector serial = wht_commutation_serial(v, false);
        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK(parallel[i] == serial[i]);
        }
    }
}

TEST_CASE("density matrix transforms") {
    SUBCASE("|0><0| coefficients") {
        std::vector<std::complex<double>> rho = {1, 0, 0, 0};
        const PauliVector c = density_to_pauli_coeffs(rho, 1);
        CHECK(c[0] == doctest::Approx(1.0));
        CHECK(c.at(PauliString::parse("Z")) == doctest::Approx(1.0));
        CHECK(c.at(PauliString::parse("X")) == doctest::Approx(0.0));
        CHECK(c.at(PauliString::parse("Y")) == doctest::Approx(0.0));
    }
    SUBCASE("maximally mixed state") {
        const int n = 2;
        const std::size_t dim = 4;
        std::vector<std::complex<double>> rho(dim * dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            rho[i * dim + i] = 0.25;
        }
        const PauliVector c = density_to_pauli_coeffs(rho, n);
        CHECK(c[0] == doctest::Approx(1.0));
        for (std::size_t i = 1; i < c.size(); ++i) {
            CHECK(c[i] == doctest::Approx(0.0));
        }
    }
    SUBCASE("round trip on random Hermitian matrices") {
        auto rng = make_rng(23, 0);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int n = 1; n <= 3; ++n) {
            const std::size_t dim = std::size_t{1} << n;
            std::vector<std::complex<double>> m(dim * dim);
            for (std::size_t r = 0; r < dim; ++r) {
                for (std::size_t c2 = 0; c2 <= r; ++c2) {
                    const std::complex<double> v(dist(rng), r == c2 ? 0.0 : dist(rng));
                    m[r * dim + c2] = v;
                    m[c2 * dim + r] = std::conj(v);
                }
            }
            const auto back = pauli_coeffs_to_density(density_to_pauli_coeffs(m, n));
            for (std::size_t i = 0; i < m.size(); ++i) {
                CHECK(std::abs(back[i] - m[i]) < 1e-12);
            }
        }
    }
    SUBCASE("coefficients agree with trace against dense Paulis") {
        auto rng = make_rng(29, 0);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        const int n = 2;
        const std::size_t dim = 4;
        std::vector<std::complex<double>> m(dim * dim);
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c2 = 0; c2 <= r; ++c2) {
                const std::complex<double> v(dist(rng), r == c2 ? 0.0 : dist(rng));
                m[r * dim + c2] = v;
                m[c2 * dim + r] = std::conj(v);
            }
        }
        Eigen::MatrixXcd rho(dim, dim);
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c2 = 0; c2 < dim; ++c2) {
                rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c2)) = m[r * dim + c2];
            }
        }
        const PauliVector c = density_to_pauli_coeffs(m, n);
        for (std::size_t idx = 0; idx < c.size(); ++idx) {
            const auto p = PauliString::from_index(n, idx);
            const std::complex<double> tr = (oracles::dense_pauli(p) * rho).trace();
            CHECK(c[idx] == doctest::Approx(tr.real()).epsilon(1e-12));
            CHECK(std::abs(tr.imag()) < 1e-12);
        }
    }
    SUBCASE("rejects non-power-of-two dimension") {
        std::vector<std::complex<double>> bad(9, 0.0);
        CHECK_THROWS_AS(density_to_pauli_coeffs(bad, 1), ValidationError);
    }
}
