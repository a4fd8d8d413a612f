// Reconstruct a resolvent from a black-box solver and compare with a direct solve.

#include <iostream>

#include "semilab/semilab.hpp"

int main() {
    using namespace semilab;
    const OperatorPair op(laplacian1d(32));
    const double T = 1.0;
    const ExponentialSolver solver(op);

    const auto w2 = omega2(op, T);
    std::cout << "s(A) = " << op.spectral_bound() << ", omega2 = " << w2.omega2 << "\n";

    const Complex mu(w2.omega2 + 1.0, 4.0);
    const Vec y = Vec::Ones(op.dim());
    const auto grid = theorem_grid(T, mu, op.stiffness());
    const auto data = assemble_U_V(solver, mu, grid);
    const auto rec = neumann_resolvent(data, y);
    const Vec direct = resolvent_solve(op, mu, y);

    std::cout << "||V_mu|| = " << data.V_norm << ", Neumann terms = " << rec.neumann_terms << "\n"
              << "identity residual = " << surjectivity_identity_check(op, data, y) << "\n"
              << "relative reconstruction error = " << (rec.x - direct).norm() / direct.norm() << "\n";

    const auto est = estimate_M(op, default_grid(op, T), default_probes(op, 1));
    std::cout << "M_hat = " << est.M_hat << " (lower estimate), omega1 = " << omega1(est.M_hat, T) << "\n";
}
