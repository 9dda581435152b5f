#pragma once

#include <sstream>

#include "ccim/packed_symmetric.hpp"
#include "ccim/types.hpp"

namespace ccim {

/// A problem to optimize: coupling J (packed symmetric, diagonal stored but
/// excluded from all j != i sums), Zeeman field g, and for QUBO/SOR use the
/// auxiliary vector r and the diagonal-inverse vector d.
template <typename Scalar>
struct ProblemInstance {
    Index n = 0;
    PackedSymmetricMatrix<Scalar> coupling;
    Vec<Scalar> zeeman;
    HamiltonianMode mode = HamiltonianMode::Ising;
    Vec<Scalar> aux_r;     // r in the QUBO Hamiltonian; all-ones by default
    Vec<Scalar> diag_inv;  // d, used only by Jacobi SOR

    static ProblemInstance make(PackedSymmetricMatrix<Scalar> coupling, Vec<Scalar> zeeman,
                                HamiltonianMode mode) {
        ProblemInstance inst;
        inst.n = coupling.size();
        inst.coupling = std::move(coupling);
        inst.zeeman = std::move(zeeman);
        inst.mode = mode;
        inst.aux_r = Vec<Scalar>::Ones(inst.n);
        inst.diag_inv = Vec<Scalar>::Zero(inst.n);
        inst.validate();
        return inst;
    }

    void validate() const {
        if (n < 1) fail_validation("instance: n must be >= 1");
        if (coupling.size() != n || zeeman.size() != n || aux_r.size() != n || diag_inv.size() != n) {
            std::ostringstream os;
            os << "instance: vector lengths disagree with n=" << n;
            fail_validation(os.str());
        }
    }

    template <typename To>
    ProblemInstance<To> cast() const {
        ProblemInstance<To> out;
        out.n = n;
        out.coupling = PackedSymmetricMatrix<To>(n);
        for (std::size_t k = 0; k < coupling.upper().size(); ++k)
            out.coupling.upper()[k] = static_cast<To>(coupling.upper()[k]);
        out.coupling.diag() = coupling.diag().template cast<To>();
        out.zeeman = zeeman.template cast<To>();
        out.mode = mode;
        out.aux_r = aux_r.template cast<To>();
        out.diag_inv = diag_inv.template cast<To>();
        return out;
    }
};

}  // namespace ccim
