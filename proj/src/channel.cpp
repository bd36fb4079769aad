#include "mvb/channel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mvb/errors.hpp"

namespace mvb {

void PauliLindbladModel::validate() const {
    std::set<std::uint64_t> seen;
    for (const auto& term : terms) {
        if (term.generator.n != n) {
            throw ValidationError("model term qubit count does not match model");
        }
        if (term.generator.is_identity()) {
            throw ValidationError("model generators must be non-identity");
        }
        if (!(term.rate >= 0.0) || !std::isfinite(term.rate)) {
            throw ValidationError("model rates must be finite and nonnegative");
        }
        if (!seen.insert(term.generator.index()).second) {
            throw ValidationError("duplicate model generator " + term.generator.str());
        }
    }
}

double PauliLindbladModel::total_rate() const {
    double sum = 0.0;
    for (const auto& term : terms) {
        sum += term.rate;
    }
    return sum;
}

PauliStochastishChannel PauliStochastishChannel::identity(int n) {
    return PauliStochastishChannel{n, PauliVector::constant(n, 1.0)};
}

PauliStochastishChannel PauliStochastishChannel::from_fidelities(PauliVector f) {
    PauliStochastishChannel c{f.n, std::move(f)};
    c.validate();
    return c;
}

void PauliStochastishChannel::validate() const {
    fidelities.validate();
    if (fidelities.n != n) {
        throw ValidationError("channel fidelity vector qubit count mismatch");
    }
    if (fidelities.values.empty() || fidelities.values[0] != 1.0) {
        throw ValidationError("channel identity fidelity must equal 1 exactly");
    }
}

double model_fidelity(const PauliLindbladModel& m, const PauliString& p) {
    if (p.n != m.n) {
        throw ValidationError("Pauli qubit count does not match model");
    }
    double exponent = 0.0;
    for (const auto& term : m.terms) {
        if (symplectic_product(p, term.generator)) {
            exponent += term.rate;
        }
    }
    return std::exp(-2.0 * exponent);
}

PauliStochastishChannel channel_from_model(const PauliLindbladModel& m) {
    m.validate();
    PauliVector f(m.n);
    const std::size_t size = f.size();
    for (std::size_t idx = 0; idx < size; ++idx) {
        f.values[idx] = model_fidelity(m, PauliString::from_index(m.n, idx));
    }
    return PauliStochastishChannel{m.n, std::move(f)};
}

double gamma(const PauliLindbladModel& m) {
    return std::exp(2.0 * m.total_rate());
}

PauliStochastishChannel compose(const PauliStochastishChannel& a, const PauliStochastishChannel& b) {
    if (a.n != b.n) {
        throw ValidationError("cannot compose channels on different qubit counts");
    }
    PauliVector f(a.n);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.values[i] = a.fidelities[i] * b.fidelities[i];
    }
    return PauliStochastishChannel{a.n, std::move(f)};
}

PauliStochastishChannel invert(const PauliStochastishChannel& a) {
    PauliVector f(a.n);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (a.fidelities[i] == 0.0) {
            throw NumericalError("cannot invert channel with zero fidelity at index " +
                                 std::to_string(i));
        }
        f.values[i] = 1.0 / a.fidelities[i];
    }
    return PauliStochastishChannel{a.n, std::move(f)};
}

PauliStochastishChannel ratio(const PauliVector& measured, const PauliVector& model) {
    if (measured.n != model.n) {
        throw ValidationError("fidelity vectors have different qubit counts");
    }
    PauliVector f(measured.n);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (model.values[i] == 0.0) {
            throw NumericalError("zero model fidelity in ratio at index " + std::to_string(i));
        }
        f.values[i] = measured.values[i] / model.values[i];
    }
    return PauliStochastishChannel{measured.n, std::move(f)};
}

double diamond_norm_exact(const PauliStochastishChannel& v) {
    v.validate();
    const PauliVector nu = wht_commutation(v.fidelities, true);
    double sum = 0.0;
    for (double x : nu.values) {
        sum += std::abs(x);
    }
    return sum;
}

double diamond_distance_identity_exact(const PauliStochastishChannel& v) {
    v.validate();
    const PauliVector nu = wht_commutation(v.fidelities, true);
    double sum = std::abs(1.0 - nu.values[0]);
    for (std::size_t i = 1; i < nu.size(); ++i) {
        sum += std::abs(nu.values[i]);
    }
    return sum;
}

PauliLindbladModel twirled_amplitude_damping(const std::vector<double>& t1, double gate_time,
                                             const std::string& layer_id) {
    if (!(gate_time > 0.0)) {
        throw ValidationError("gate time must be positive");
    }
    PauliLindbladModel m;
    m.n = static_cast<int>(t1.size());
    m.layer_id = layer_id;
    for (int q = 0; q < m.n; ++q) {
        if (!(t1[q] > 0.0)) {
            throw ValidationError("T1 must be positive");
        }
        if (std::isinf(t1[q])) {
            continue;
        }
        const double rate = gate_time / (4.0 * t1[q]);
        m.terms.push_back({PauliString::from_bits(m.n, 1ULL << q, 0), rate});          // X_q
        m.terms.push_back({PauliString::from_bits(m.n, 1ULL << q, 1ULL << q), rate});  // Y_q
    }
    return m;
}

std::vector<PauliString> pairwise_local_paulis(int n, const std::vector<std::pair<int, int>>& pairs) {
    std::set<std::uint64_t> indices;
    for (int q = 0; q < n; ++q) {
        for (std::uint64_t code = 1; code < 4; ++code) {
            indices.insert(code << (2 * q));
        }
    }
    for (const auto& [a, b] : pairs) {
        if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
            throw ValidationError("invalid qubit pair");
        }
        for (std::uint64_t ca = 1; ca < 4; ++ca) {
            for (std::uint64_t cb = 1; cb < 4; ++cb) {
                indices.insert((ca << (2 * a)) | (cb << (2 * b)));
            }
        }
    }
    std::vector<PauliString> out;
    out.reserve(indices.size());
    for (std::uint64_t idx : indices) {
        out.push_back(PauliString::from_index(n, idx));
    }
    return out;
}

std::vector<std::pair<int, int>> line_pairs(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int q = 0; q + 1 < n; ++q) {
        pairs.emplace_back(q, q + 1);
    }
    return pairs;
}

}  // namespace mvb
