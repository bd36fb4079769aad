#include "mvb/simulation.hpp"

#include <cmath>
#include <set>

#include <omp.h>

#include "mvb/errors.hpp"

namespace mvb {

namespace {

using cplx = std::complex<double>;

const std::array<std::array<cplx, 4>, 4> kPauliMatrices = {{
    {1, 0, 0, 1},            // I
    {0, 1, 1, 0},            // X
    {1, 0, 0, -1},           // Z
    {0, cplx(0, -1), cplx(0, 1), 0},  // Y
}};

}  // namespace

void LayeredCircuit::validate() const {
    if (n < 1 || n > kMaxSimQubits) {
        throw ValidationError("circuit qubit count must be in [1, " +
                              std::to_string(kMaxSimQubits) + "]");
    }
    for (const auto& layer : layers) {
        for (const auto& gate : layer.easy) {
            if (gate.qubit < 0 || gate.qubit >= n) {
                throw ValidationError("easy gate qubit out of range");
            }
        }
        if (layer.channel) {
            layer.channel->validate();
            if (layer.channel->n != n) {
                throw ValidationError("layer channel qubit count mismatch");
            }
        }
        std::set<int> used;
        for (const auto& gate : layer.hard) {
            if (gate.control < 0 || gate.control >= n || gate.target < 0 || gate.target >= n ||
                gate.control == gate.target) {
                throw ValidationError("CNOT qubits out of range");
            }
            if (!used.insert(gate.control).second || !used.insert(gate.target).second) {
                throw ValidationError("CNOT pairs within a layer must be disjoint");
            }
        }
    }
}

PauliVector zero_state_coeffs(int n) {
    PauliVector c(n);
    // Tr[P |0..0><0..0|] = 1 iff every qubit carries I or Z.
    const std::size_t size = c.size();
    for (std::size_t idx = 0; idx < size; ++idx) {
        bool z_only = true;
        for (int q = 0; q < n && z_only; ++q) {
            z_only = (((idx >> (2 * q)) & 3) & 1) == 0;
        }
        if (z_only) {
            c.values[idx] = 1.0;
        }
    }
    return c;
}

std::array<double, 16> single_qubit_ptm(const std::array<cplx, 4>& u) {
    std::array<double, 16> r{};
    const std::array<cplx, 4> udag = {std::conj(u[0]), std::conj(u[2]), std::conj(u[1]),
                                      std::conj(u[3])};
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            // (1/2) Tr[P_a U P_b U^dag]
            cplx trace = 0.0;
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    for (int k = 0; k < 2; ++k) {
                        for (int l = 0; l < 2; ++l) {
                            trace += kPauliMatrices[a][2 * i + j] * u[2 * j + k] *
                                     kPauliMatrices[b][2 * k + l] * udag[2 * l + i];
                        }
                    }
                }
            }
            r[static_cast<std::size_t>(4 * a + b)] = 0.5 * trace.real();
        }
    }
    return r;
}

SingleQubitGate pauli_rotation_gate(int qubit, char axis, double theta) {
    const double c = std::cos(theta / 2.0);
    const cplx ms(0.0, -std::sin(theta / 2.0));
    SingleQubitGate gate;
    gate.qubit = qubit;
    switch (axis) {
        case 'X':
            gate.u = {c, ms, ms, c};
            break;
        case 'Y':
            gate.u = {c, -std::sin(theta / 2.0), std::sin(theta / 2.0), c};
            break;
        case 'Z':
            gate.u = {std::exp(cplx(0, -theta / 2.0)), 0, 0, std::exp(cplx(0, theta / 2.0))};
            break;
        default:
            throw ValidationError("rotation axis must be X, Y or Z");
    }
    return gate;
}

SingleQubitGate haar_single_qubit_gate(int qubit, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    double a, b, c, d, norm;
    do {
        a = normal(rng);
        b = normal(rng);
        c = normal(rng);
        d = normal(rng);
        norm = std::sqrt(a * a + b * b + c * c + d * d);
    } while (norm < 1e-12);
    a /= norm;
    b /= norm;
    c /= norm;
    d /= norm;
    SingleQubitGate gate;
    gate.qubit = qubit;
    gate.u = {cplx(a, b), cplx(c, d), cplx(-c, d), cplx(a, -b)};
    return gate;
}

std::pair<PauliString, int> cnot_conjugate(const PauliString& p, int control, int target) {
    if (control < 0 || target < 0 || control >= p.n || target >= p.n || control == target) {
        throw ValidationError("CNOT qubits out of range");
    }
    // Generator images: X_c -> X_c X_t, Z_c -> Z_c, X_t -> X_t, Z_t -> Z_c Z_t.
    const bool xc = (p.x >> control) & 1;
    const bool zc = (p.z >> control) & 1;
    const bool xt = (p.x >> target) & 1;
    const bool zt = (p.z >> target) & 1;

    const std::uint64_t rest_x = p.x & ~((1ULL << control) | (1ULL << target));
    const std::uint64_t rest_z = p.z & ~((1ULL << control) | (1ULL << target));

    auto chain = [&](const std::array<PauliString, 4>& factors) {
        PauliString acc = PauliString::identity(p.n);
        int phase = 0;
        const bool flags[4] = {xc, zc, xt, zt};
        for (int i = 0; i < 4; ++i) {
            if (flags[i]) {
                auto [prod, k] = multiply(acc, factors[static_cast<std::size_t>(i)]);
                acc = prod;
                phase = (phase + k) % 4;
            }
        }
        return std::make_pair(acc, phase);
    };

    const auto x_on = [&](int q) { return PauliString::from_bits(p.n, 1ULL << q, 0); };
    const auto z_on = [&](int q) { return PauliString::from_bits(p.n, 0, 1ULL << q); };
    const auto xx = PauliString::from_bits(p.n, (1ULL << control) | (1ULL << target), 0);
    const auto zz = PauliString::from_bits(p.n, 0, (1ULL << control) | (1ULL << target));

    const auto [plain, k0] = chain({x_on(control), z_on(control), x_on(target), z_on(target)});
    (void)plain;
    auto [image, k1] = chain({xx, z_on(control), x_on(target), zz});

    const int rel = ((k1 - k0) % 4 + 4) % 4;
    if (rel != 0 && rel != 2) {
        throw NumericalError("CNOT conjugation produced a non-Hermitian phase");
    }
    image.x |= rest_x;
    image.z |= rest_z;
    return {image, rel == 0 ? 1 : -1};
}

namespace {

// Signed local permutation of the 16 (control, target) code pairs.
struct CnotTable {
    std::array<std::uint8_t, 16> image;
    std::array<double, 16> sign;
};

const CnotTable& cnot_table() {
    static const CnotTable table = [] {
        CnotTable t{};
        for (std::uint64_t idx = 0; idx < 16; ++idx) {
            const PauliString p = PauliString::from_index(2, idx);
            const auto [img, sign] = cnot_conjugate(p, 0, 1);
            t.image[idx] = static_cast<std::uint8_t>(img.index());
            t.sign[idx] = sign;
        }
        return t;
    }();
    return table;
}

void apply_ptm(PauliVector& state, int qubit, const std::array<double, 16>& r, bool parallel) {
    const std::size_t stride = std::size_t{1} << (2 * qubit);
    const std::size_t groups = state.size() / 4;
    double* data = state.values.data();
    auto body = [&](std::size_t g) {
        const std::size_t base = (g / stride) * (4 * stride) + (g % stride);
        double in[4];
        for (int k = 0; k < 4; ++k) {
            in[k] = data[base + static_cast<std::size_t>(k) * stride];
        }
        for (int a = 0; a < 4; ++a) {
            data[base + static_cast<std::size_t>(a) * stride] =
                r[static_cast<std::size_t>(4 * a)] * in[0] +
                r[static_cast<std::size_t>(4 * a + 1)] * in[1] +
                r[static_cast<std::size_t>(4 * a + 2)] * in[2] +
                r[static_cast<std::size_t>(4 * a + 3)] * in[3];
        }
    };
    if (parallel && state.size() >= (1u << 16)) {
#pragma omp parallel for schedule(static)
        for (std::int64_t g = 0; g < static_cast<std::int64_t>(groups); ++g) {
            body(static_cast<std::size_t>(g));
        }
    } else {
        for (std::size_t g = 0; g < groups; ++g) {
            body(g);
        }
    }
}

void apply_cnot(PauliVector& state, int control, int target, bool parallel) {
    const CnotTable& table = cnot_table();
    const int shift_c = 2 * control;
    const int shift_t = 2 * target;
    const std::size_t size = state.size();
    double* data = state.values.data();
    auto body = [&](std::size_t idx) {
        const std::size_t cc = (idx >> shift_c) & 3;
        const std::size_t tt = (idx >> shift_t) & 3;
        const std::size_t local = cc | (tt << 2);
        const std::size_t mapped = table.image[local];
        const std::size_t partner = (idx & ~((std::size_t{3} << shift_c) | (std::size_t{3} << shift_t))) |
                                    ((mapped & 3) << shift_c) | ((mapped >> 2) << shift_t);
        if (partner > idx) {
            const double a = data[idx];
            const double b = data[partner];
            // The conjugation is an involution and both directions share a sign.
            data[idx] = table.sign[local] * b;
            data[partner] = table.sign[local] * a;
        } else if (partner == idx) {
            data[idx] *= table.sign[local];
        }
    };
    if (parallel && size >= (1u << 16)) {
#pragma omp parallel for schedule(static)
        for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(size); ++idx) {
            body(static_cast<std::size_t>(idx));
        }
    } else {
        for (std::size_t idx = 0; idx < size; ++idx) {
            body(idx);
        }
    }
}

void apply_channel(PauliVector& state, const PauliStochastishChannel& channel) {
    for (std::size_t i = 0; i < state.size(); ++i) {
        state.values[i] *= channel.fidelities[i];
    }
}

PauliVector evolve_impl(const LayeredCircuit& c, const PauliVector& rho0, bool parallel) {
    c.validate();
    rho0.validate();
    if (rho0.n != c.n) {
        throw ValidationError("initial state qubit count does not match circuit");
    }
    if (std::abs(rho0.values[0] - 1.0) > 1e-12) {
        throw ValidationError("initial state must have unit trace (identity coefficient 1)");
    }
    PauliVector state = rho0;
    for (const auto& layer : c.layers) {
        for (const auto& gate : layer.easy) {
            apply_ptm(state, gate.qubit, single_qubit_ptm(gate.u), parallel);
        }
        if (c.channel_position == ChannelPosition::before_hard && layer.channel) {
            apply_channel(state, *layer.channel);
        }
        for (const auto& gate : layer.hard) {
            apply_cnot(state, gate.control, gate.target, parallel);
        }
        if (c.channel_position == ChannelPosition::after_hard && layer.channel) {
            apply_channel(state, *layer.channel);
        }
    }
    return state;
}

}  // namespace

PauliVector evolve(const LayeredCircuit& c, const PauliVector& rho0) {
    return evolve_impl(c, rho0, true);
}

PauliVector evolve_serial(const LayeredCircuit& c, const PauliVector& rho0) {
    return evolve_impl(c, rho0, false);
}

double exact_expectation(const LayeredCircuit& c, const PauliVector& rho0, const PauliString& obs) {
    if (obs.n != c.n) {
        throw ValidationError("observable qubit count does not match circuit");
    }
    return evolve(c, rho0).at(obs);
}

LayeredCircuit strip_channels(const LayeredCircuit& c) {
    LayeredCircuit out = c;
    for (auto& layer : out.layers) {
        layer.channel.reset();
    }
    return out;
}

double mitigated_delta(const LayeredCircuit& c_with_actual,
                       const std::vector<std::optional<PauliStochastishChannel>>& models,
                       const PauliVector& rho0, const PauliString& obs) {
    if (models.size() != c_with_actual.layers.size()) {
        throw ValidationError("one model slot per layer is required");
    }
    LayeredCircuit mitigated = c_with_actual;
    for (std::size_t i = 0; i < mitigated.layers.size(); ++i) {
        auto& slot = mitigated.layers[i].channel;
        if (models[i]) {
            const PauliStochastishChannel inverse = invert(*models[i]);
            slot = slot ? compose(*slot, inverse) : inverse;
        }
    }
    const double ideal = exact_expectation(strip_channels(c_with_actual), rho0, obs);
    const double corrected = exact_expectation(mitigated, rho0, obs);
    return std::abs(ideal - corrected);
}

}  // namespace mvb
