#ifndef EME_DISPLACEMENT_HPP
#define EME_DISPLACEMENT_HPP

/*
 * Dissipation-aware classical displacement that removes the drive
 * eps_d sin(w_d t) (v_ca Ybar_q + v_cc Ybar_c) from the linear dynamics.
 * The damped steady-state amplitudes use the normal-mode single-photon rates
 * kappa_j = kappa_flat v_cj^2 computed from the linear theory; one fixed-point
 * pass, no iteration, since corrections are higher order.
 */

#include <complex>

#include "eme/circuit.hpp"

namespace eme {

struct displacement_data {
    cplx eta_qx{};  // phase-quadrature amplitude of the qubit mode
    cplx eta_cx{};  // phase-quadrature amplitude of the cavity mode
    cplx eta_cy{};  // charge-quadrature amplitude of the cavity mode
    cplx eta_x{};   // composite u_aa eta_qx + u_ac eta_cx entering the quartic
    double nbar_c = 0.0;  // predicted steady-state cavity population
    double kappa_q = 0.0;
    double kappa_c = 0.0;
};

/* kappa_q = kappa_flat v_ca^2, kappa_c = kappa_flat v_cc^2 */
std::pair<double, double> linear_rates(const normal_mode_data& nm, double kappa_flat);

displacement_data steady_state_displacement(const normal_mode_data& nm,
                                            const circuit_params& params, double kappa_q,
                                            double kappa_c);

/* closed-form inversion of nbar_c(eps_d) = eps_d^2 * nbar_c(1) */
double drive_amp_for_target_nbar(double target_nbar, const normal_mode_data& nm,
                                 const circuit_params& params, double kappa_q,
                                 double kappa_c);

/* single damped mode: eta = eps_d (w_d + i kappa) / (w^2 - (w_d + i kappa)^2) */
cplx one_mode_displacement(double omega, double kappa, double eps_d, double omega_d);

}  // namespace eme

#endif
