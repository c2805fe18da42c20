#ifndef EME_GENERATOR_HPP
#define EME_GENERATOR_HPP

/*
 * Schrieffer-Wolff stage.  The displaced circuit Hamiltonian is
 *   H(t) = H2 - eps (w/48) B(t)^4,
 * where B collects the phase quadratures of the normal modes plus the c-number
 * drive field.  B^4 splits into a number-conserving part S4 (Kerr shifts) and
 * a nonconserving part N4.  The generator G4 of the transformation removing
 * N4 at first order obeys
 *   -i dG4/dt + [H2, G4] = (w/48) N4,   [H2, G4(0)] = (w/48) N4(0),
 * which decouples per monomial because [H2, a^dag^m a^n c^dag^p c^q] =
 * ((m-n) wq + (p-q) wc) times the same monomial.  Each coefficient is then a
 * scalar ODE with a closed-form harmonic solution.  I4 integrates the
 * oscillating part of S4; it enters the dressed bath coupling on the same
 * footing as G4.
 */

#include "eme/circuit.hpp"
#include "eme/displacement.hpp"
#include "eme/poly.hpp"

namespace eme {

/* a denominator below this means the closed-form solution is invalid */
inline constexpr double resonance_guard = 1e-9;

struct quartic_expansion {
    operator_poly h2;      // wq (nq + 1/2) + wc (nc + 1/2)
    operator_poly s4_raw;  // number-conserving part of B^4
    operator_poly n4_raw;  // number-nonconserving part of B^4
    double weight = 0.0;   // frequency multiplying B^4 / 48
    double epsilon = 0.0;

    /* h2 - eps (weight/48) (s4_raw + n4_raw) */
    operator_poly hamiltonian() const;
};

/* Readout circuit: B(t) = u_aa (a + a^dag) + u_ac (c + c^dag) + x(t) with
 * x(t) = eta_x e^{-i wd t} + c.c.; weight is the bare transmon frequency. */
quartic_expansion expand_displaced_hamiltonian(const circuit_params& params,
                                               const normal_mode_data& nm,
                                               const displacement_data& disp);

/* Single driven mode: B(t) = a + a^dag + x(t); weight = omega_q. */
quartic_expansion expand_one_mode(double omega_q, double omega_d, cplx eta,
                                  double epsilon);

struct generator_solution {
    operator_poly g4;  // antihermitian solution of the generator ODE
    operator_poly i4;  // i * int_0^t of the oscillating part of (w/48) S4
};

generator_solution solve_generator(const quartic_expansion& qe);

/* Kerr-form coefficients of H_eff = H2 - eps (w/48) S4, arranged as
 *   [wq - lambda_q(t)] nq + [wc - lambda_c(t)] nc
 *       - chi_ac nq nc - alpha_q nq^2 - alpha_c nc^2   (+ scalar),
 * with lambda_x(t) = lambda_x_static + oscillating drive harmonics. */
struct effective_hamiltonian_data {
    double lambda_q_static = 0.0;
    double lambda_c_static = 0.0;
    double chi_ac = 0.0;
    double alpha_q = 0.0;
    double alpha_c = 0.0;
    harmonic_coeff lambda_q_osc;
    harmonic_coeff lambda_c_osc;
    operator_poly h_eff;      // full time-dependent effective Hamiltonian
    operator_poly h_secular;  // h_eff with oscillating coefficients dropped
};

effective_hamiltonian_data effective_hamiltonian(const quartic_expansion& qe);

/* C(t) = coupling + eps [coupling, G4 + I4].  The I4 piece carries the
 * micromotion of the frame change; include_i4 = false drops it so its
 * effect can be isolated. */
operator_poly dressed_quadrature(const operator_poly& coupling,
                                 const generator_solution& gen, double epsilon,
                                 bool include_i4 = true);

/* quadratures of the normal modes */
operator_poly qubit_x(const frequencies& fr);   // a + a^dag
operator_poly qubit_y(const frequencies& fr);   // -i (a - a^dag)
operator_poly cavity_y(const frequencies& fr);  // -i (c - c^dag)

/* bare cavity charge quadrature, the operator the bath couples to:
 * v_ca Yq + v_cc Yc */
operator_poly bare_cavity_charge(const normal_mode_data& nm, const frequencies& fr);

}  // namespace eme

#endif
