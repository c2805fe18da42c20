#ifndef EME_CIRCUIT_HPP
#define EME_CIRCUIT_HPP

/*
 * Physical parameters and exact diagonalization of the quadratic circuit
 *   H2 = (1/4) (X^T A X + Y^T B Y),  A = diag(wa, wc),  B = [[wa, 2g],[2g, wc]]
 * in phase/charge quadratures with [X_i, Y_j] = 2i delta_ij.  The u, v blocks
 * express the bare quadratures in the normal-mode ones, X = u Xbar, Y = v Ybar
 * with v = u^{-T}; this is the decomposition the quartic term and the bath
 * coupling line need.
 */

#include "eme/poly.hpp"

namespace eme {

struct circuit_params {
    double omega_a_bar = 0.0;  // bare transmon frequency (rescaled units, 1 = 10 GHz)
    double omega_c_bar = 0.0;  // bare cavity frequency
    double g = 0.0;            // charge-charge coupling
    double epsilon = 0.0;      // anharmonicity sqrt(2 E_C / E_J)
    double drive_amp = 0.0;    // eps_d
    double drive_freq = 0.0;   // omega_d
    double kappa_flat = 0.0;   // flat bath rate parameter

    void validate() const;  // throws config_error; warns via return of normal_modes
};

struct normal_mode_data {
    double omega_q = 0.0;
    double omega_c = 0.0;
    /* rows are bare modes (a, c), columns normal modes (q, c) */
    double u_aa = 0.0, u_ac = 0.0, u_ca = 0.0, u_cc = 0.0;
    double v_aa = 0.0, v_ac = 0.0, v_ca = 0.0, v_cc = 0.0;
    bool dispersive_warning = false;  // g / |detuning| > 0.3
};

/* Exact symplectic diagonalization; signs fixed by u_aa > 0, u_cc > 0, labels
 * by bare-mode overlap (|u-row-a| dominant column is the qubit). */
normal_mode_data normal_modes(const circuit_params& params);

/* (Delta / 2g)^2 with Delta = omega_c_bar - omega_a_bar */
double critical_photon_number(const circuit_params& params);

}  // namespace eme

#endif
