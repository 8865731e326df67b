// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_HAMILTONIAN_HPP
#define SPECLAB_HAMILTONIAN_HPP

#include <stdexcept>

namespace speclab {

enum class HamiltonianKind { scalar, matrix };

/// Free Hamiltonian selector. The scalar system is -Laplacian; the matrix
/// system is diag(Laplacian - mu, -Laplacian + mu) with spectral gap mu > 0
/// and two-component states.
struct HamiltonianSpec {
    HamiltonianKind kind = HamiltonianKind::scalar;
    double mu = 0.0;

    static HamiltonianSpec scalar() { return {HamiltonianKind::scalar, 0.0}; }
    static HamiltonianSpec matrix(double mu)
    {
        if (!(mu > 0.0))
            throw std::invalid_argument("matrix case requires gap");
        return {HamiltonianKind::matrix, mu};
    }

    int components() const { return kind == HamiltonianKind::scalar ? 1 : 2; }

    /// Symbol of the free Hamiltonian on component c at squared wavenumber
    /// xi2: |xi|^2 for the scalar case, -(|xi|^2 + mu) and |xi|^2 + mu for
    /// the two matrix components.
    double symbol(int c, double xi2) const
    {
        if (kind == HamiltonianKind::scalar)
            return xi2;
        return c == 0 ? -(xi2 + mu) : (xi2 + mu);
    }
};

} // namespace speclab

#endif
