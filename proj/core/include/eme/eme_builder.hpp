#ifndef EME_EME_BUILDER_HPP
#define EME_EME_BUILDER_HPP

/*
 * Master-equation assembly.  The dressed bath-coupling quadrature is a sum of
 * monomials times harmonics; grouping its terms by total rotation frequency
 * (monomial detuning plus explicit harmonic) yields one collapse operator per
 * transition frequency.  Each group C(omega_j) enters a Lindblad dissipator
 * with rate S(omega_j), the bath spectral density at that frequency.  Three
 * generators are built this way: the full two-mode equation, the one-mode
 * reduction, and a Kerr-only control that keeps the bare linear dissipators.
 */

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eme/circuit.hpp"
#include "eme/displacement.hpp"
#include "eme/generator.hpp"
#include "eme/poly.hpp"

namespace eme {

/* Two distinct transition frequencies closer than this (times the largest
 * base frequency) cannot be binned separately; the build refuses instead of
 * silently merging or splitting near-degenerate dissipators. */
inline constexpr double degeneracy_guard = 1e-9;

/* Bath spectral density S(omega) = 2 kappa(omega).  flat_zero_t is the flat
 * zero-temperature bath: S = 2 kappa_flat for omega > 0, zero otherwise.
 * flat_all drops the positivity cutoff; rate formulas that sample S on both
 * signs can be probed against it. */
enum class spectral_kind { flat_zero_t, flat_all };

struct spectral_density {
    spectral_kind kind = spectral_kind::flat_zero_t;
    double kappa_flat = 0.0;

    double operator()(double omega) const;
};

/* One frequency bin of the dressed coupling: every monomial whose total
 * phase rotates as e^{-i omega t} with omega = freq . (wq, wc, wd).  The
 * operator coefficients are static; the rotation lives in the bin label. */
struct collapse_term {
    freq_tuple freq;
    double omega = 0.0;
    operator_poly op;
    double rate = 0.0;  // S(omega)
};

/* All bins of one coupling operator, sorted by descending frequency.
 * Bins with rate zero are kept: they are needed to reconstruct the original
 * operator and they document the conjugate partners. */
struct collapse_set {
    std::vector<collapse_term> terms;
};

/* Throws accidental_degeneracy if two distinct integer labels land within
 * degeneracy_guard * max base frequency of each other.  Scalar (identity)
 * terms of the input are dropped: they shift no population and never enter
 * a dissipator. */
collapse_set bin_by_frequency(const operator_poly& dressed,
                              const spectral_density& spectral);

/* Sum of C_j e^{-i omega_j t}; equals the binned operator minus its scalar
 * part.  Used to verify that binning lost nothing. */
operator_poly reconstruct(const collapse_set& set, const frequencies& fr);

/* Ablation switches applied to collapse-operator monomials (never to the
 * Hamiltonian).  single_photon_only keeps |m-n| + |p-q| == 1. */
struct term_mask {
    bool drop_correlated = false;     // one ladder operator on each mode
    bool drop_dephasing = false;      // number-conserving monomials
    bool single_photon_only = false;

    bool any() const { return drop_correlated || drop_dephasing || single_photon_only; }
};

bool mask_keeps(const term_mask& mask, const monomial& mono);

enum class me_variant { eme_full, eme_subset, kerr_only, one_mode_eme, one_mode_fock };

std::string variant_name(me_variant v);

/* One Lindblad channel.  Polynomial form for the algebraic generators; the
 * Fock variant instead carries a fixed matrix (matrix.size() > 0 decides). */
struct dissipator {
    operator_poly op;
    Eigen::MatrixXcd matrix;
    double rate = 0.0;
    freq_tuple freq;
    double omega = 0.0;
};

/* A complete right-hand side: rho' = -i [h(t), rho] + sum_k rate_k D[op_k].
 * bins keeps the pre-mask frequency decomposition for auditing (empty for
 * the Kerr and Fock variants, which are not built by binning). */
struct me_generator {
    me_variant variant = me_variant::eme_full;
    term_mask mask;
    double epsilon = 0.0;
    spectral_density spectral;
    operator_poly h;
    std::vector<dissipator> dissipators;
    collapse_set bins;
};

/* Full two-mode effective master equation in the displaced frame.  The
 * Hamiltonian keeps its oscillating Kerr coefficients; dissipators are the
 * positive-rate frequency bins of the dressed cavity charge, after the mask.
 * include_i4 = false drops the frame-micromotion piece of the dressing. */
me_generator assemble_eme(const circuit_params& params, const normal_mode_data& nm,
                          const displacement_data& disp,
                          const spectral_density& spectral,
                          const term_mask& mask = {}, bool include_i4 = true);

/* Kerr-only control: static Kerr Hamiltonian from the undriven expansion,
 * the drive kept as an explicit eps_d sin(wd t) lab-frame term on the cavity
 * charge, and exactly two dissipators D[a], D[c] with the bare linear rates.
 * The drive amplitude never touches the dissipators here. */
me_generator assemble_kerr_me(const circuit_params& params,
                              const normal_mode_data& nm,
                              const spectral_density& spectral);

/* Single driven mode in a waveguide.  Unlike the readout circuit, whose bath
 * couples to the cavity charge quadrature, this problem couples the phase
 * quadrature X to the bath; the distinction matters because the commutator
 * with the generator feeds differently into the two quadratures, changing
 * the sign of the drive-dependent rate renormalization. */
struct one_mode_params {
    double omega_q = 0.0;
    double omega_d = 0.0;
    double kappa_q = 0.0;
    double drive_amp = 0.0;
    double epsilon = 0.0;
};

/* Dissipator families of the one-mode equation, keyed by bin label
 * (j1, 0, j3): |j1| >= 2 is multiphoton, otherwise j3 != 0 is
 * drive-shifted, otherwise the main +-wq bin.  Disabling a family removes
 * its dissipators so their individual effect on the decay rate can be
 * measured. */
struct one_mode_families {
    bool main_bin = true;
    bool drive_shifted = true;
    bool multiphoton = true;

    bool enabled(const freq_tuple& label) const;
};

me_generator assemble_one_mode(const one_mode_params& params,
                               const spectral_density& spectral,
                               const one_mode_families& families = {},
                               bool include_i4 = true);

/* State-resolved rates of the one-mode equation.  down[n] is the n -> n-1
 * rate and samples the bath at the anharmonicity-corrected transition
 * frequency; up[n] is n -> n+1; dephase[n] multiplies D[|n><n|].  Indices
 * run 0..n_max. */
struct fock_rates {
    std::vector<double> down;
    std::vector<double> up;
    std::vector<double> dephase;
};

fock_rates one_mode_fock_rates(const one_mode_params& params,
                               const spectral_density& spectral, int n_max);

/* Rate-equation form of the one-mode equation on a dim-level ladder:
 * number-diagonal secular Hamiltonian plus per-level jump and dephasing
 * projectors carrying the fock_rates. */
me_generator assemble_one_mode_fock(const one_mode_params& params,
                                    const spectral_density& spectral, int dim);

/* Human-readable JSON description of an assembled generator: variant, mask,
 * rates, and per-dissipator operator content. */
std::string generator_report(const me_generator& gen);

}  // namespace eme

#endif
