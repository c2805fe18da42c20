#include "eme/displacement.hpp"

#include <cmath>

namespace eme {

std::pair<double, double> linear_rates(const normal_mode_data& nm, double kappa_flat) {
    return {kappa_flat * nm.v_ca * nm.v_ca, kappa_flat * nm.v_cc * nm.v_cc};
}

cplx one_mode_displacement(double omega, double kappa, double eps_d, double omega_d) {
    const cplx z(omega_d, kappa);
    return eps_d * z / (omega * omega - z * z);
}

displacement_data steady_state_displacement(const normal_mode_data& nm,
                                            const circuit_params& params, double kappa_q,
                                            double kappa_c) {
    if (params.drive_freq <= 0.0 && params.drive_amp != 0.0)
        throw config_error("drive_freq must be positive when a drive is present");
    if (kappa_c == 0.0 && std::abs(params.drive_freq - nm.omega_c) < 1e-9)
        throw resonance_without_damping("drive resonant with undamped cavity");

    displacement_data out;
    out.kappa_q = kappa_q;
    out.kappa_c = kappa_c;
    if (params.drive_amp == 0.0) return out;

    const double wd = params.drive_freq;
    out.eta_qx = nm.v_ca * one_mode_displacement(nm.omega_q, kappa_q, params.drive_amp, wd);
    out.eta_cx = nm.v_cc * one_mode_displacement(nm.omega_c, kappa_c, params.drive_amp, wd);
    out.eta_cy = cplx(0.0, -1.0) * nm.omega_c / cplx(wd, kappa_c) * out.eta_cx;
    out.eta_x = nm.u_aa * out.eta_qx + nm.u_ac * out.eta_cx;
    out.nbar_c = std::norm((out.eta_cx + cplx(0.0, 1.0) * out.eta_cy) / 2.0);
    return out;
}

double drive_amp_for_target_nbar(double target_nbar, const normal_mode_data& nm,
                                 const circuit_params& params, double kappa_q,
                                 double kappa_c) {
    if (target_nbar < 0.0) throw config_error("target nbar must be non-negative");
    if (target_nbar == 0.0) return 0.0;
    circuit_params unit = params;
    unit.drive_amp = 1.0;
    const double nbar_unit =
        steady_state_displacement(nm, unit, kappa_q, kappa_c).nbar_c;
    return std::sqrt(target_nbar / nbar_unit);
}

}  // namespace eme
