#include "eme/generator.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace eme {

namespace {

operator_poly drive_field(const frequencies& fr, cplx eta) {
    operator_poly x(fr);
    x.add_term({}, {0, 0, -1}, eta);
    x.add_term({}, {0, 0, +1}, std::conj(eta));
    return x;
}

operator_poly fourth_power(const operator_poly& b) {
    operator_poly b2 = normal_order_product(b, b);
    return normal_order_product(b2, b2);
}

quartic_expansion finish_expansion(operator_poly h2, const operator_poly& b, double weight,
                                   double epsilon) {
    auto [s4, n4] = split_number_conserving(fourth_power(b));
    quartic_expansion qe;
    qe.h2 = std::move(h2);
    qe.s4_raw = std::move(s4);
    qe.n4_raw = std::move(n4);
    qe.weight = weight;
    qe.epsilon = epsilon;
    return qe;
}

std::string denom_message(const monomial& mono, double value) {
    return "resonant denominator " + std::to_string(value) + " for monomial (" +
           std::to_string(mono.m) + "," + std::to_string(mono.n) + "," + std::to_string(mono.p) +
           "," + std::to_string(mono.q) + ")";
}

}  // namespace

operator_poly quartic_expansion::hamiltonian() const {
    return h2 - cplx(epsilon * weight / 48.0) * (s4_raw + n4_raw);
}

quartic_expansion expand_displaced_hamiltonian(const circuit_params& params,
                                               const normal_mode_data& nm,
                                               const displacement_data& disp) {
    const frequencies fr{nm.omega_q, nm.omega_c, params.drive_freq};
    operator_poly b(fr);
    b.add_static({1, 0, 0, 0}, nm.u_aa);
    b.add_static({0, 1, 0, 0}, nm.u_aa);
    b.add_static({0, 0, 1, 0}, nm.u_ac);
    b.add_static({0, 0, 0, 1}, nm.u_ac);
    b = b + drive_field(fr, disp.eta_x);

    operator_poly h2(fr);
    h2.add_static({1, 1, 0, 0}, nm.omega_q);
    h2.add_static({0, 0, 1, 1}, nm.omega_c);
    h2.add_static({0, 0, 0, 0}, 0.5 * (nm.omega_q + nm.omega_c));

    return finish_expansion(std::move(h2), b, params.omega_a_bar, params.epsilon);
}

quartic_expansion expand_one_mode(double omega_q, double omega_d, cplx eta, double epsilon) {
    const frequencies fr{omega_q, 0.0, omega_d};
    operator_poly b(fr);
    b.add_static({1, 0, 0, 0}, 1.0);
    b.add_static({0, 1, 0, 0}, 1.0);
    b = b + drive_field(fr, eta);

    operator_poly h2(fr);
    h2.add_static({1, 1, 0, 0}, omega_q);
    h2.add_static({0, 0, 0, 0}, 0.5 * omega_q);

    return finish_expansion(std::move(h2), b, omega_q, epsilon);
}

generator_solution solve_generator(const quartic_expansion& qe) {
    const double pref = qe.weight / 48.0;
    const frequencies fr = qe.n4_raw.freq;

    operator_poly g4(fr);
    for (const auto& [mono, h] : qe.n4_raw.terms) {
        const double delta = (mono.m - mono.n) * fr.wq + (mono.p - mono.q) * fr.wc;
        if (std::abs(delta) < resonance_guard)
            throw resonant_denominator(denom_message(mono, delta));
        const freq_tuple hom{mono.n - mono.m, mono.q - mono.p, 0};
        for (const auto& [k, amp] : h.terms) {
            const double den = delta + fr.value(k);
            if (std::abs(den) < resonance_guard)
                throw resonant_denominator(denom_message(mono, den));
            const cplx nk = pref * amp;
            g4.add_term(mono, k, nk / den);
            g4.add_term(mono, hom, nk * (1.0 / delta - 1.0 / den));
        }
    }

    operator_poly i4(fr);
    for (const auto& [mono, h] : qe.s4_raw.terms) {
        for (const auto& [k, amp] : h.terms) {
            if (k.is_zero()) continue;
            const double f = fr.value(k);
            if (std::abs(f) < resonance_guard)
                throw resonant_denominator(denom_message(mono, f));
            const cplx s = pref * amp / f;
            i4.add_term(mono, k, s);
            i4.add_term(mono, {0, 0, 0}, -s);
        }
    }

    return {std::move(g4), std::move(i4)};
}

namespace {

/* static amplitude of one monomial's coefficient, zero when absent */
cplx static_amp(const operator_poly& p, const monomial& mono) {
    auto it = p.terms.find(mono);
    if (it == p.terms.end()) return 0.0;
    auto itk = it->second.terms.find(freq_tuple{});
    return itk == it->second.terms.end() ? cplx(0.0) : itk->second;
}

harmonic_coeff oscillating_part(const operator_poly& p, const monomial& mono, double scale) {
    harmonic_coeff out;
    auto it = p.terms.find(mono);
    if (it == p.terms.end()) return out;
    for (const auto& [k, amp] : it->second.terms)
        if (!k.is_zero()) out.add(k, scale * amp);
    return out;
}

}  // namespace

effective_hamiltonian_data effective_hamiltonian(const quartic_expansion& qe) {
    const double scale = qe.epsilon * qe.weight / 48.0;
    effective_hamiltonian_data out;

    out.alpha_q = scale * static_amp(qe.s4_raw, {2, 2, 0, 0}).real();
    out.alpha_c = scale * static_amp(qe.s4_raw, {0, 0, 2, 2}).real();
    out.chi_ac = scale * static_amp(qe.s4_raw, {1, 1, 1, 1}).real();
    /* the normal-ordered form of nq^2 feeds one unit of nq, so the plain
     * number-shift is what remains after taking alpha out */
    out.lambda_q_static = scale * static_amp(qe.s4_raw, {1, 1, 0, 0}).real() - out.alpha_q;
    out.lambda_c_static = scale * static_amp(qe.s4_raw, {0, 0, 1, 1}).real() - out.alpha_c;
    out.lambda_q_osc = oscillating_part(qe.s4_raw, {1, 1, 0, 0}, scale);
    out.lambda_c_osc = oscillating_part(qe.s4_raw, {0, 0, 1, 1}, scale);

    out.h_eff = qe.h2 - cplx(scale) * qe.s4_raw;
    operator_poly secular(out.h_eff.freq);
    for (const auto& [mono, h] : out.h_eff.terms)
        for (const auto& [k, amp] : h.terms)
            if (k.is_zero()) secular.add_term(mono, k, amp);
    out.h_secular = std::move(secular);
    return out;
}

operator_poly dressed_quadrature(const operator_poly& coupling, const generator_solution& gen,
                                 double epsilon, bool include_i4) {
    const operator_poly total = include_i4 ? gen.g4 + gen.i4 : gen.g4;
    return coupling + cplx(epsilon) * commutator(coupling, total);
}

operator_poly qubit_x(const frequencies& fr) {
    operator_poly p(fr);
    p.add_static({1, 0, 0, 0}, 1.0);
    p.add_static({0, 1, 0, 0}, 1.0);
    return p;
}

operator_poly qubit_y(const frequencies& fr) {
    operator_poly p(fr);
    p.add_static({1, 0, 0, 0}, cplx(0.0, 1.0));
    p.add_static({0, 1, 0, 0}, cplx(0.0, -1.0));
    return p;
}

operator_poly cavity_y(const frequencies& fr) {
    operator_poly p(fr);
    p.add_static({0, 0, 1, 0}, cplx(0.0, 1.0));
    p.add_static({0, 0, 0, 1}, cplx(0.0, -1.0));
    return p;
}

operator_poly bare_cavity_charge(const normal_mode_data& nm, const frequencies& fr) {
    return cplx(nm.v_ca) * qubit_y(fr) + cplx(nm.v_cc) * cavity_y(fr);
}

}  // namespace eme
