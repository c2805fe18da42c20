#ifndef EME_ANALYSIS_HPP
#define EME_ANALYSIS_HPP

/*
 * Rate extraction and the three sweep experiments.  A relaxation rate is the
 * least-squares slope of ln<n>(t) over a fit window; the window starts after
 * the cavity has rung up so the qubit series is a clean exponential.  Sweeps
 * run one propagation per (axis point, equation variant), in parallel when
 * asked, and report each fitted rate together with its drive-off-normalized
 * change.  Results are deterministic: no randomness anywhere, and the worker
 * count never changes the arithmetic of an individual run.
 */

#include <string>
#include <vector>

#include "eme/eme_builder.hpp"
#include "eme/lindblad.hpp"

namespace eme {

struct fit_window {
    double t0 = 0.0;
    double t1 = 0.0;
};

/* <n>(t) is modeled as e^{c0 - 2 kappa t}; kappa_err is the one-sigma slope
 * uncertainty from the residual scatter.  rms_residual is the rms of the
 * log-space residuals and frequency_residual the amplitude of their largest
 * nonzero Fourier component, which measures the oscillatory remainder the
 * exponential model ignores. */
struct rate_fit {
    double kappa = 0.0;
    double kappa_err = 0.0;
    double rms_residual = 0.0;
    double frequency_residual = 0.0;
    fit_window window;
};

/* observable is "nq" or "nc".  Throws config_error if the window holds fewer
 * than four samples or the observable is not strictly positive on it, and
 * non_monotone_data if the log series rises by more than three times the rms
 * residual inside the window. */
rate_fit fit_rate(const trajectory& traj, const std::string& observable,
                  const fit_window& window);

/* Same fit over the whole recorded series. */
rate_fit fit_rate(const trajectory& traj, const std::string& observable);

/* Least-squares slope of ln y versus ln x; the detuning suite checks the
 * near-resonant coefficients against this. */
double power_law_exponent(const std::vector<double>& x,
                          const std::vector<double>& y);

/* Shared propagation settings for the two-mode sweeps.  The cavity ladder is
 * sized for the conditioned displacement the near-resonant channels build up
 * (about four drive photons per qubit excitation), not just for the drive
 * population itself. */
struct sweep_options {
    truncation trunc{4, 14};
    double t_end = 1200.0;
    double dt_out = 2.0;
    integrator_options integ{};
    int workers = 1;
};

struct power_sweep_config {
    circuit_params params;  // drive_amp is overwritten per grid point
    spectral_density bath;  // kappa_flat 0 means: reuse params.kappa_flat
    /* must contain 0: the drive-off rate normalizes every variant */
    std::vector<double> nbar_grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
    sweep_options run;
};

struct detuning_sweep_config {
    circuit_params params;  // drive_freq and drive_amp overwritten per point
    spectral_density bath;  // kappa_flat 0 means: reuse params.kappa_flat
    /* omega_c - omega_d values, all > 0 */
    std::vector<double> detunings;
    double target_nbar = 0.5;  // held fixed by re-solving the drive amplitude
    sweep_options run;
};

struct one_mode_sweep_config {
    one_mode_params params;  // epsilon and drive_amp overwritten per point
    spectral_density bath;  // kappa_flat 0 means: reuse params.kappa_q
    std::vector<double> epsilons{0.0, 0.15, 0.2};
    /* must contain 0, same normalization rule as the power sweep */
    std::vector<double> nbar_grid{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    int dim = 7;
    double t_end = 220.0;
    double dt_out = 1.0;
    integrator_options integ{};
    int workers = 1;
};

struct sweep_point {
    std::string variant;
    double axis_value = 0.0;
    rate_fit fit;
    /* (kappa - kappa_ref) / kappa_ref; the reference is the variant's own
     * axis-zero rate, or the undriven baseline for the detuning sweep */
    double delta_kappa_norm = 0.0;
    bool truncation_leak = false;
    double max_leak = 0.0;
};

struct sweep_result {
    std::vector<sweep_point> points;
    /* detuning sweep only: |a c| and |n_q| collapse amplitudes of the two
     * drive-harmonic bins closest to the cavity line, per detuning */
    std::vector<double> coef_axis;
    std::vector<double> coef_correlated_ac;
    std::vector<double> coef_dephasing_nq;
};

/* Five equation variants per drive power: the full equation, the Kerr
 * control, and the three ablations.  Initial state |1_q 0_c>. */
sweep_result power_sweep(const power_sweep_config& config);

/* Full equation across drive detunings at fixed cavity population, plus one
 * undriven baseline row (axis value 0) that also serves as the rate
 * reference. */
sweep_result detuning_sweep(const detuning_sweep_config& config);

/* One-mode equation per anharmonicity value, plus an analytic row family
 * ("analytic_n1") built from the n=1 state-resolved downward rate. */
sweep_result one_mode_sweep(const one_mode_sweep_config& config);

/* variant,axis_value,kappa,kappa_err,delta_kappa_norm with %.12e numbers */
std::string sweep_csv(const sweep_result& result);

/* axis_value,coef_correlated_ac,coef_dephasing_nq; empty string when the
 * result carries no coefficient series */
std::string coefficient_csv(const sweep_result& result);

}  // namespace eme

#endif
