#pragma once

#include <string>
#include <vector>

#include "mvb/pauli.hpp"

namespace mvb {

struct PauliLindbladTerm {
    PauliString generator;
    double rate = 0.0;
};

// Sparse generator-rate noise model for one hard layer: the channel is
// exp(L) with L(rho) = sum_j rate_j (P_j rho P_j - rho). Rates are
// nonnegative and the generators distinct and non-identity.
struct PauliLindbladModel {
    int n = 0;
    std::string layer_id;
    std::vector<PauliLindbladTerm> terms;

    void validate() const;
    double total_rate() const;
};

// A map with a real diagonal Pauli transfer matrix. Entries are Pauli
// fidelities (or fidelity ratios); the identity entry is exactly 1 (trace
// preserving) but other entries may exceed 1 or be negative, so the map need
// not be completely positive.
struct PauliStochastishChannel {
    int n = 0;
    PauliVector fidelities;

    static PauliStochastishChannel identity(int n);
    static PauliStochastishChannel from_fidelities(PauliVector f);

    void validate() const;
};

// exp(-2 sum_{j : <P,P_j> = 1} rate_j), the model-predicted fidelity of P.
double model_fidelity(const PauliLindbladModel& m, const PauliString& p);

// Full fidelity vector of exp(L); always a CPTP Pauli channel.
PauliStochastishChannel channel_from_model(const PauliLindbladModel& m);

// exp(2 sum_j rate_j): the sampling overhead of inverting the model, and an
// upper bound on the diamond norm of the inverse channel.
double gamma(const PauliLindbladModel& m);

// Diagonal maps compose elementwise and commute.
PauliStochastishChannel compose(const PauliStochastishChannel& a, const PauliStochastishChannel& b);
PauliStochastishChannel invert(const PauliStochastishChannel& a);
PauliStochastishChannel ratio(const PauliVector& measured, const PauliVector& model);

// sum_m |nu_m| with nu the normalized commutation transform of the fidelity
// vector; exact for any diagonal map.
double diamond_norm_exact(const PauliStochastishChannel& v);

// |1 - nu_0| + sum_{m>=1} |nu_m|: exact diamond distance to the identity.
double diamond_distance_identity_exact(const PauliStochastishChannel& v);

// Pauli twirl of per-qubit amplitude damping over a gate of duration
// `gate_time`: terms X_q and Y_q with rate gate_time / (4 T1_q) each, giving
// f_Z = exp(-t/T1) and f_X = f_Y = exp(-t/(2 T1)) per qubit.
PauliLindbladModel twirled_amplitude_damping(const std::vector<double>& t1, double gate_time,
                                             const std::string& layer_id = "layer");

// All 3n weight-one Paulis followed by the weight-two Paulis supported on the
// given qubit pairs, in dense-index order. This is both the default measured
// set in Pauli learning and the generator support of a pairwise-local model.
std::vector<PauliString> pairwise_local_paulis(int n, const std::vector<std::pair<int, int>>& pairs);

// Nearest-neighbour pairs (0,1), (1,2), ... of a line of n qubits.
std::vector<std::pair<int, int>> line_pairs(int n);

}  // namespace mvb
