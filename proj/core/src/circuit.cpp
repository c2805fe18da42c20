#include "eme/circuit.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace eme {

void circuit_params::validate() const {
    if (!(omega_a_bar > 0.0) || !(omega_c_bar > 0.0))
        throw config_error("omega_a_bar and omega_c_bar must be positive");
    if (!(epsilon >= 0.0) || !(epsilon < 1.0))
        throw config_error("epsilon must be in [0, 1)");
    if (g < 0.0) throw config_error("g must be non-negative");
    if (kappa_flat < 0.0) throw config_error("kappa_flat must be non-negative");
    if (!std::isfinite(omega_a_bar) || !std::isfinite(omega_c_bar) || !std::isfinite(g) ||
        !std::isfinite(epsilon) || !std::isfinite(drive_amp) || !std::isfinite(drive_freq) ||
        !std::isfinite(kappa_flat))
        throw config_error("circuit parameters must be finite");
}

normal_mode_data normal_modes(const circuit_params& params) {
    params.validate();
    const double wa = params.omega_a_bar;
    const double wc = params.omega_c_bar;
    const double g = params.g;

    /* M = A^{1/2} B A^{1/2}; its eigenvalues are the squared normal frequencies */
    Eigen::Matrix2d m;
    m(0, 0) = wa * wa;
    m(1, 1) = wc * wc;
    m(0, 1) = m(1, 0) = 2.0 * g * std::sqrt(wa * wc);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    if (es.eigenvalues()(0) <= 0.0)
        throw non_positive_definite("coupling too strong: quadratic form not positive definite");

    Eigen::Vector2d w2 = es.eigenvalues();
    Eigen::Matrix2d r = es.eigenvectors();

    /* u = A^{-1/2} R W^{1/2}, v = A^{1/2} R W^{-1/2} (bare-in-terms-of-normal) */
    Eigen::Matrix2d u, v;
    for (int col = 0; col < 2; ++col) {
        const double wr = std::sqrt(std::sqrt(w2(col)));  // omega^{1/2}
        u(0, col) = r(0, col) * wr / std::sqrt(wa);
        u(1, col) = r(1, col) * wr / std::sqrt(wc);
        v(0, col) = r(0, col) * std::sqrt(wa) / wr;
        v(1, col) = r(1, col) * std::sqrt(wc) / wr;
    }

    /* qubit label: column whose bare-a component dominates */
    int qcol = (std::abs(u(0, 0)) >= std::abs(u(1, 0))) ? 0 : 1;
    int ccol = 1 - qcol;
    /* sign fix u_aa > 0, u_cc > 0 */
    if (u(0, qcol) < 0.0) {
        u.col(qcol) *= -1.0;
        v.col(qcol) *= -1.0;
    }
    if (u(1, ccol) < 0.0) {
        u.col(ccol) *= -1.0;
        v.col(ccol) *= -1.0;
    }

    normal_mode_data out;
    out.omega_q = std::sqrt(w2(qcol));
    out.omega_c = std::sqrt(w2(ccol));
    out.u_aa = u(0, qcol);
    out.u_ac = u(0, ccol);
    out.u_ca = u(1, qcol);
    out.u_cc = u(1, ccol);
    out.v_aa = v(0, qcol);
    out.v_ac = v(0, ccol);
    out.v_ca = v(1, qcol);
    out.v_cc = v(1, ccol);
    out.dispersive_warning =
        std::abs(wc - wa) > 0.0 && g / std::abs(wc - wa) > 0.3;
    return out;
}

double critical_photon_number(const circuit_params& params) {
    const double delta = params.omega_c_bar - params.omega_a_bar;
    if (delta == 0.0) throw degenerate_detuning("omega_c_bar equals omega_a_bar");
    if (params.g <= 0.0) throw degenerate_detuning("n_crit undefined at g = 0");
    const double r = delta / (2.0 * params.g);
    return r * r;
}

}  // namespace eme
