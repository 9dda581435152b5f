#pragma once

#include <sstream>

#include "ccim/packed_symmetric.hpp"
#include "ccim/types.hpp"

namespace ccim {

/// -(1/2) sum_{i,j} J_ij s_i s_j - sum_i g_i s_i, double sum over both
/// orderings, J_ii treated as 0.
template <typename Scalar>
double ising_energy(const PackedSymmetricMatrix<Scalar>& coupling, const Vec<Scalar>& zeeman,
                    const VecXi& sigma) {
    const Index n = coupling.size();
    if (zeeman.size() != n || sigma.size() != n) fail_validation("ising_energy: length mismatch");
    double e = 0.0;
    for (Index i = 0; i < n; ++i) {
        if (sigma[i] != 1 && sigma[i] != -1) {
            std::ostringstream os;
            os << "ising_energy: sigma[" << i << "]=" << sigma[i] << " is not +-1";
            fail_validation(os.str());
        }
        e -= static_cast<double>(zeeman[i]) * sigma[i];
        for (Index j = i + 1; j < n; ++j)
            e -= static_cast<double>(coupling.read(i, j)) * sigma[i] * sigma[j];
    }
    return e;
}

/// -(1/2) sum_{i,j} J_ij r_i r_j q_i q_j - sum_i g_i r_i q_i + lambda sum_i q_i.
template <typename Scalar>
double qubo_energy(const PackedSymmetricMatrix<Scalar>& coupling, const Vec<Scalar>& zeeman,
                   const Vec<Scalar>& r, const VecXi& q, double lambda) {
    const Index n = coupling.size();
    if (zeeman.size() != n || r.size() != n || q.size() != n) fail_validation("qubo_energy: length mismatch");
    double e = 0.0;
    for (Index i = 0; i < n; ++i) {
        if (q[i] != 0 && q[i] != 1) {
            std::ostringstream os;
            os << "qubo_energy: q[" << i << "]=" << q[i] << " is not 0/1";
            fail_validation(os.str());
        }
        if (q[i] == 0) continue;
        e += lambda - static_cast<double>(zeeman[i]) * static_cast<double>(r[i]);
        for (Index j = i + 1; j < n; ++j) {
            if (q[j] == 0) continue;
            e -= static_cast<double>(coupling.read(i, j)) * static_cast<double>(r[i]) *
                 static_cast<double>(r[j]);
        }
    }
    return e;
}

/// Binarize amplitudes: sign (Ising, sign(0)=+1) or Heaviside (QUBO, H(0)=0).
template <typename Scalar>
VecXi spins_from_amplitudes(const Vec<Scalar>& c, HamiltonianMode mode) {
    VecXi out(c.size());
    for (Index i = 0; i < c.size(); ++i)
        out[i] = mode == HamiltonianMode::Ising ? sign_spin(c[i]) : heaviside(c[i]);
    return out;
}

/// Energies of binarized readouts recorded along a run.
struct EnergyTrace {
    std::vector<long> steps;
    std::vector<double> energies;
};

}  // namespace ccim
