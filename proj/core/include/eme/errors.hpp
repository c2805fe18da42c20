#ifndef EME_ERRORS_HPP
#define EME_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eme {

/* Base class for everything this library throws on purpose. */
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* operator algebra */
struct degree_cap_exceeded : error { using error::error; };
struct truncation_too_small : error { using error::error; };
struct frequency_mismatch : error { using error::error; };

/* circuit model */
struct non_positive_definite : error { using error::error; };
struct degenerate_detuning : error { using error::error; };

/* displacement */
struct resonance_without_damping : error { using error::error; };

/* generator / binning: an unlucky (omega_q, omega_c, omega_d) combination */
struct resonant_denominator : error { using error::error; };
struct accidental_degeneracy : error { using error::error; };

/* propagation */
struct adaptive_failure : error { using error::error; };
struct dimension_mismatch : error { using error::error; };

/* analysis */
struct non_monotone_data : error { using error::error; };

/* cli / config */
struct config_error : error { using error::error; };

}  // namespace eme

#endif
