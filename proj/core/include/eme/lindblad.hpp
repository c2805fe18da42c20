#ifndef EME_LINDBLAD_HPP
#define EME_LINDBLAD_HPP

/*
 * Dense density-matrix propagation of an assembled generator on a truncated
 * Fock basis, with an embedded 4(5) adaptive Runge-Kutta stepper.
 *
 * Propagation happens in the frame corotating with the linear Hamiltonian
 * w_q n_q + w_c n_c.  Every collapse operator of an assembled generator is a
 * single-frequency bin, so this frame multiplies it by one global phase that
 * cancels inside its dissipator, while Hamiltonian monomials shift their
 * harmonic tuples exactly; with the frequencies the generator already
 * carries, the transformation is exact and removes the fastest rotations
 * from the integration.  Photon numbers, trace, purity, and the spectrum of
 * the state commute with the frame rotation, so the recorded series are
 * frame independent; final_rho is the rotating-frame state.
 */

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eme/eme_builder.hpp"
#include "eme/poly.hpp"

namespace eme {

/* Largest total truncated dimension the dense engine accepts by default. */
inline constexpr int dimension_cap = 64;

struct integrator_options {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double first_step = 0.0;    // 0: choose from the fastest harmonic
    double fixed_step = 0.0;    // > 0: that step, no error control (order studies)
    double leak_threshold = 1e-4;
    int dim_cap = dimension_cap;
};

/* Sampled observables of one propagation.  Series are recorded on the
 * requested output grid plus the final time; diagnostics cover every
 * accepted step, not only the samples. */
struct trajectory {
    truncation trunc;
    std::vector<double> times;
    std::vector<cplx> n_q;        // <a^dag a>
    std::vector<cplx> n_c;        // <c^dag c>
    std::vector<cplx> trace;
    std::vector<double> purity;   // Tr[rho^2]
    std::vector<double> min_eig;  // smallest eigenvalue of rho
    Eigen::MatrixXcd final_rho;   // rotating-frame state at times.back()

    /* population of the top two Fock levels of either mode (modes with
     * fewer than three levels are skipped); the run is flagged, never
     * discarded */
    bool truncation_leak = false;
    double max_leak = 0.0;

    double max_herm_drift = 0.0;  // worst asymmetry before re-hermitization
    long steps_accepted = 0;
    long steps_rejected = 0;
};

/* Integrates rho' = -i[h(t), rho] + sum_j rate_j D[C_j] from rho0 over
 * [0, t_end], sampling every dt_out.  rho0 must be Hermitian, unit trace,
 * and positive within the trajectory tolerances.  Throws dimension_mismatch
 * on shape or cap violations, config_error on an invalid state or grid, and
 * adaptive_failure when step control collapses. */
trajectory propagate(const me_generator& gen, const Eigen::MatrixXcd& rho0,
                     const truncation& tr, double t_end, double dt_out,
                     const integrator_options& opts = {});

/* Tr[rho op(t)] on the truncated basis; real for Hermitian op up to
 * round-off.  Throws dimension_mismatch if rho does not match tr. */
cplx expectation(const Eigen::MatrixXcd& rho, const operator_poly& op, double t,
                 const truncation& tr);

/* CSV text: time, re/im of photon numbers and trace, purity, trace_error,
 * min_eig; one row per sample, %.12e throughout. */
std::string trajectory_csv(const trajectory& traj);

}  // namespace eme

#endif
