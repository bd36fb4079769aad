#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mvb {

// Dense Pauli vectors are capped here: 4^12 entries is the intended scale.
inline constexpr int kMaxDenseQubits = 12;

inline std::size_t pauli_space_size(int n) {
    return std::size_t{1} << (2 * n);
}

// An n-qubit Pauli operator in symplectic bit form. Qubit q carries X iff bit
// q of `x` is set, Z iff bit q of `z` is set, and Y iff both. The text form is
// an uppercase string over {I,X,Y,Z} with qubit 0 leftmost. The dense index
// packs one base-4 digit per qubit, qubit 0 least significant, with the
// per-qubit code I=0, X=1, Z=2, Y=3 (x bit low, z bit high).
struct PauliString {
    int n = 0;
    std::uint64_t x = 0;
    std::uint64_t z = 0;

    static PauliString identity(int n);
    static PauliString parse(const std::string& text);
    static PauliString from_index(int n, std::uint64_t index);
    static PauliString from_bits(int n, std::uint64_t x, std::uint64_t z);

    std::uint64_t index() const;
    std::string str() const;
    int weight() const;
    bool is_identity() const { return x == 0 && z == 0; }

    friend bool operator==(const PauliString&, const PauliString&) = default;
};

// 0 when p and q commute, 1 when they anticommute.
int symplectic_product(const PauliString& p, const PauliString& q);

// r and k such that p*q = i^k r, with k in {0,1,2,3}.
std::pair<PauliString, int> multiply(const PauliString& p, const PauliString& q);

// Dense length-4^n real vector indexed by the Pauli dense index; entry 0 is
// the identity component. Depending on context it holds Pauli fidelities,
// fidelity ratios, Pauli-basis state coefficients, or transformed weights.
struct PauliVector {
    int n = 0;
    std::vector<double> values;

    PauliVector() = default;
    explicit PauliVector(int n);
    static PauliVector constant(int n, double v);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    double& at(const PauliString& p);
    double at(const PauliString& p) const;

    void validate() const;  // length 4^n, all entries finite
};

// w_m = sum_k (-1)^{<m,k>} v_k over the symplectic pairing <m,k>, divided by
// 4^n when `normalize`. Runs the per-qubit radix-4 butterfly in O(4^n n);
// the unnormalized transform composed with itself is multiplication by 4^n.
PauliVector wht_commutation(const PauliVector& v, bool normalize);

// Single-threaded reference for the same transform.
PauliVector wht_commutation_serial(const PauliVector& v, bool normalize);

// c_P = Tr[P rho] for a row-major 2^n x 2^n Hermitian matrix, and the inverse
// reconstruction rho = sum_P c_P P / 2^n. Both run per-qubit contractions.
PauliVector density_to_pauli_coeffs(const std::vector<std::complex<double>>& rho, int n);
std::vector<std::complex<double>> pauli_coeffs_to_density(const PauliVector& coeffs);

}  // namespace mvb
