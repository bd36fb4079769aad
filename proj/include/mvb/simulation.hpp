#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mvb/channel.hpp"
#include "mvb/pauli.hpp"

namespace mvb {

inline constexpr int kMaxSimQubits = 10;

// Row-major 2x2 unitary acting on one qubit.
struct SingleQubitGate {
    int qubit = 0;
    std::array<std::complex<double>, 4> u{1.0, 0.0, 0.0, 1.0};
};

struct CnotGate {
    int control = 0;
    int target = 0;
};

enum class ChannelPosition { before_hard, after_hard };

// One circuit layer: error-free single-qubit gates, an optional noise channel,
// and a hard two-qubit-gate layer. The channel slot is applied before the hard
// gates unless the circuit selects the after-the-gate convention.
struct CircuitLayer {
    std::vector<SingleQubitGate> easy;
    std::optional<PauliStochastishChannel> channel;
    std::vector<CnotGate> hard;
};

struct LayeredCircuit {
    int n = 0;
    ChannelPosition channel_position = ChannelPosition::before_hard;
    std::vector<CircuitLayer> layers;

    void validate() const;
};

// Pauli coefficients c_P = Tr[P rho] of |0...0>.
PauliVector zero_state_coeffs(int n);

// Evolves the Pauli-coefficient state through the circuit: single-qubit gates
// act as 4x4 transfer matrices per qubit, CNOTs as signed index permutations,
// channels elementwise. Exact up to floating point.
PauliVector evolve(const LayeredCircuit& c, const PauliVector& rho0);
PauliVector evolve_serial(const LayeredCircuit& c, const PauliVector& rho0);

// Tr[C(rho) O] for a Pauli observable: the O component of the evolved state.
double exact_expectation(const LayeredCircuit& c, const PauliVector& rho0, const PauliString& obs);

LayeredCircuit strip_channels(const LayeredCircuit& c);

// |ideal - mitigated| in the infinite-sample limit: the circuit's channel
// slots hold the actual per-layer error E_k, `models` the learnt models; the
// mitigated circuit replaces each E_k by E_k * inverse(model_k).
double mitigated_delta(const LayeredCircuit& c_with_actual,
                       const std::vector<std::optional<PauliStochastishChannel>>& models,
                       const PauliVector& rho0, const PauliString& obs);

// Heisenberg image of a Pauli under CNOT conjugation: returns (P', sign) with
// CNOT P CNOT = sign * P'.
std::pair<PauliString, int> cnot_conjugate(const PauliString& p, int control, int target);

// exp(-i theta P/2) for a single-qubit Pauli axis.
SingleQubitGate pauli_rotation_gate(int qubit, char axis, double theta);

SingleQubitGate haar_single_qubit_gate(int qubit, std::mt19937_64& rng);

// Pauli transfer matrix of a 2x2 unitary in the (I,X,Z,Y) code order,
// row-major: out_a = sum_b R[4a+b] in_b.
std::array<double, 16> single_qubit_ptm(const std::array<std::complex<double>, 4>& u);

}  // namespace mvb
