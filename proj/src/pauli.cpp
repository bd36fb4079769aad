#include "mvb/pauli.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "mvb/errors.hpp"

namespace mvb {

namespace {

void check_qubit_count(int n) {
    if (n < 0) {
        throw ValidationError("qubit count must be nonnegative");
    }
    if (n > kMaxDenseQubits) {
        throw ValidationError("qubit count " + std::to_string(n) + " exceeds dense cap " +
                              std::to_string(kMaxDenseQubits));
    }
}

void check_same_n(const PauliString& p, const PauliString& q) {
    if (p.n != q.n) {
        throw ValidationError("Pauli qubit counts differ: " + std::to_string(p.n) + " vs " +
                              std::to_string(q.n));
    }
}

}  // namespace

PauliString PauliString::identity(int n) {
    check_qubit_count(n);
    return PauliString{n, 0, 0};
}

PauliString PauliString::from_bits(int n, std::uint64_t x, std::uint64_t z) {
    check_qubit_count(n);
    const std::uint64_t mask = (n == 64) ? ~0ULL : ((1ULL << n) - 1);
    if ((x & ~mask) != 0 || (z & ~mask) != 0) {
        throw ValidationError("Pauli bit vectors longer than qubit count");
    }
    return PauliString{n, x, z};
}

PauliString PauliString::parse(const std::string& text) {
    check_qubit_count(static_cast<int>(text.size()));
    PauliString p{static_cast<int>(text.size()), 0, 0};
    for (std::size_t q = 0; q < text.size(); ++q) {
        switch (text[q]) {
            case 'I':
                break;
            case 'X':
                p.x |= 1ULL << q;
                break;
            case 'Z':
                p.z |= 1ULL << q;
                break;
            case 'Y':
                p.x |= 1ULL << q;
                p.z |= 1ULL << q;
                break;
            default:
                throw ValidationError("invalid Pauli character '" + std::string(1, text[q]) +
                                      "' in \"" + text + "\"");
        }
    }
    return p;
}

PauliString PauliString::from_index(int n, std::uint64_t index) {
    check_qubit_count(n);
    if (index >= pauli_space_size(n)) {
        throw ValidationError("Pauli index out of range");
    }
    PauliString p{n, 0, 0};
    for (int q = 0; q < n; ++q) {
        const std::uint64_t code = (index >> (2 * q)) & 3;
        p.x |= (code & 1) << q;
        p.z |= ((code >> 1) & 1) << q;
    }
    return p;
}

std::uint64_t PauliString::index() const {
    std::uint64_t idx = 0;
    for (int q = 0; q < n; ++q) {
        const std::uint64_t code = ((x >> q) & 1) | (((z >> q) & 1) << 1);
        idx |= code << (2 * q);
    }
    return idx;
}

std::string PauliString::str() const {
    static const char kLetters[4] = {'I', 'X', 'Z', 'Y'};
    std::string out(static_cast<std::size_t>(n), 'I');
    for (int q = 0; q < n; ++q) {
        out[q] = kLetters[((x >> q) & 1) | (((z >> q) & 1) << 1)];
    }
    return out;
}

int PauliString::weight() const {
    return std::popcount(x | z);
}

int symplectic_product(const PauliString& p, const PauliString& q) {
    check_same_n(p, q);
    return (std::popcount(p.x & q.z) + std::popcount(p.z & q.x)) & 1;
}

std::pair<PauliString, int> multiply(const PauliString& p, const PauliString& q) {
    check_same_n(p, q);
    PauliString r{p.n, p.x ^ q.x, p.z ^ q.z};
    // Per qubit: X^x Z^z picks up i^{xz} to make Y Hermitian, and commuting
    // Z^z1 past X^x2 contributes (-1)^{z1 x2}.
    int k = std::popcount(p.x & p.z) + std::popcount(q.x & q.z) + 2 * std::popcount(p.z & q.x) -
            std::popcount(r.x & r.z);
    return {r, ((k % 4) + 4) % 4};
}

PauliVector::PauliVector(int n) : n(n) {
    check_qubit_count(n);
    values.assign(pauli_space_size(n), 0.0);
}

PauliVector PauliVector::constant(int n, double v) {
    PauliVector out(n);
    std::fill(out.values.begin(), out.values.end(), v);
    return out;
}

double& PauliVector::at(const PauliString& p) {
    if (p.n != n) {
        throw ValidationError("PauliString qubit count does not match PauliVector");
    }
    return values[p.index()];
}

double PauliVector::at(const PauliString& p) const {
    if (p.n != n) {
        throw ValidationError("PauliString qubit count does not match PauliVector");
    }
    return values[p.index()];
}

void PauliVector::validate() const {
    check_qubit_count(n);
    if (values.size() != pauli_space_size(n)) {
        throw ValidationError("PauliVector length is not 4^n");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValidationError("PauliVector entry is not finite");
        }
    }
}

namespace {

// One radix-4 butterfly along the qubit-q digit. The per-qubit kernel over the
// code order (I,X,Z,Y) is
//   [ 1  1  1  1 ]
//   [ 1  1 -1 -1 ]
//   [ 1 -1  1 -1 ]
//   [ 1 -1 -1  1 ]
// which is its own inverse up to a factor 4.
inline void butterfly4(double* v, std::size_t i0, std::size_t stride) {
    const double a = v[i0];
    const double b = v[i0 + stride];
    const double c = v[i0 + 2 * stride];
    const double d = v[i0 + 3 * stride];
    const double ab = a + b, amb = a - b;
    const double cd = c + d, cmd = c - d;
    v[i0] = ab + cd;
    v[i0 + stride] = ab - cd;
    v[i0 + 2 * stride] = amb + cmd;
    v[i0 + 3 * stride] = amb - cmd;
}

PauliVector wht_impl(const PauliVector& v, bool normalize, bool parallel) {
    v.validate();
    PauliVector out = v;
    const std::size_t size = out.size();
    double* data = out.values.data();
    for (int q = 0; q < out.n; ++q) {
        const std::size_t stride = std::size_t{1} << (2 * q);
        const std::size_t groups = size / 4;
        if (parallel && size >= (1u << 18)) {
#pragma omp parallel for schedule(static)
            for (std::int64_t t = 0; t < static_cast<std::int64_t>(groups); ++t) {
                const std::size_t base =
                    (static_cast<std::size_t>(t) / stride) * (4 * stride) +
                    (static_cast<std::size_t>(t) % stride);
                butterfly4(data, base, stride);
            }
        } else {
            for (std::size_t t = 0; t < groups; ++t) {
                const std::size_t base = (t / stride) * (4 * stride) + (t % stride);
                butterfly4(data, base, stride);
            }
        }
    }
    if (normalize) {
        const double scale = 1.0 / static_cast<double>(size);
        for (double& x : out.values) {
            x *= scale;
        }
    }
    return out;
}

}  // namespace

PauliVector wht_commutation(const PauliVector& v, bool normalize) {
    return wht_impl(v, normalize, true);
}

PauliVector wht_commutation_serial(const PauliVector& v, bool normalize) {
    return wht_impl(v, normalize, false);
}

namespace {

using cplx = std::complex<double>;

int qubits_from_dim(std::size_t dim) {
    int n = 0;
    std::size_t d = 1;
    while (d < dim) {
        d <<= 1;
        ++n;
    }
    if (d != dim || n > kMaxDenseQubits) {
        throw ValidationError("matrix dimension is not a power of two within the dense cap");
    }
    return n;
}

// Forward map per qubit, rows (I,X,Z,Y), columns the (a,b) matrix-element
// digit a+2b: G[m][a+2b] = P_m[a][b].
const cplx kDensityToPauli[4][4] = {
    {1, 0, 0, 1},
    {0, 1, 1, 0},
    {1, 0, 0, -1},
    {0, cplx(0, 1), cplx(0, -1), 0},
};

// Inverse map per qubit: H[a+2b][m] = P_m[b][a]; H*G = 2*Id.
const cplx kPauliToDensity[4][4] = {
    {1, 0, 1, 0},
    {0, 1, 0, cplx(0, -1)},
    {0, 1, 0, cplx(0, 1)},
    {1, 0, -1, 0},
};

void apply_qubit_map(std::vector<cplx>& t, int q, const cplx m[4][4]) {
    const std::size_t stride = std::size_t{1} << (2 * q);
    const std::size_t groups = t.size() / 4;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t base = (g / stride) * (4 * stride) + (g % stride);
        cplx in[4];
        for (int k = 0; k < 4; ++k) {
            in[k] = t[base + k * stride];
        }
        for (int r = 0; r < 4; ++r) {
            t[base + r * stride] = m[r][0] * in[0] + m[r][1] * in[1] + m[r][2] * in[2] + m[r][3] * in[3];
        }
    }
}

}  // namespace

PauliVector density_to_pauli_coeffs(const std::vector<cplx>& rho, int n) {
    const std::size_t dim = std::size_t{1} << n;
    if (qubits_from_dim(dim) != n || rho.size() != dim * dim) {
        throw ValidationError("density matrix must be 2^n x 2^n row-major");
    }
    // Pack rho[b][a] so that qubit q's (a_q, b_q) pair is base-4 digit q.
    std::vector<cplx> t(pauli_space_size(n));
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = 0; b < dim; ++b) {
            std::size_t idx = 0;
            for (int q = 0; q < n; ++q) {
                idx |= (((a >> q) & 1) | (((b >> q) & 1) << 1)) << (2 * q);
            }
            t[idx] = rho[b * dim + a];
        }
    }
    for (int q = 0; q < n; ++q) {
        apply_qubit_map(t, q, kDensityToPauli);
    }
    PauliVector out(n);
    for (std::size_t i = 0; i < t.size(); ++i) {
        out.values[i] = t[i].real();
    }
    return out;
}

std::vector<cplx> pauli_coeffs_to_density(const PauliVector& coeffs) {
    coeffs.validate();
    const int n = coeffs.n;
    const std::size_t dim = std::size_t{1} << n;
    std::vector<cplx> t(coeffs.values.begin(), coeffs.values.end());
    for (int q = 0; q < n; ++q) {
        apply_qubit_map(t, q, kPauliToDensity);
    }
    const double scale = 1.0 / static_cast<double>(dim);
    std::vector<cplx> rho(dim * dim);
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = 0; b < dim; ++b) {
            std::size_t idx = 0;
            for (int q = 0; q < n; ++q) {
                idx |= (((a >> q) & 1) | (((b >> q) & 1) << 1)) << (2 * q);
            }
            rho[b * dim + a] = t[idx] * scale;
        }
    }
    return rho;
}

}  // namespace mvb
