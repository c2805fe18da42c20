#include "eme/eme_builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include <json.hpp>

namespace eme {

double spectral_density::operator()(double omega) const {
    if (kind == spectral_kind::flat_zero_t && omega <= 0.0) return 0.0;
    return 2.0 * kappa_flat;
}

namespace {

std::string tuple_text(const freq_tuple& k) {
    return "(" + std::to_string(k.dq) + "," + std::to_string(k.dc) + "," +
           std::to_string(k.dd) + ")";
}

/* mask applied monomial-by-monomial; harmonics travel with their monomial */
operator_poly masked(const operator_poly& op, const term_mask& mask) {
    operator_poly out(op.freq);
    for (const auto& [mono, coeff] : op.terms) {
        if (!mask_keeps(mask, mono)) continue;
        for (const auto& [k, amp] : coeff.terms) out.add_term(mono, k, amp);
    }
    return out;
}

/* positive-rate bins become dissipators; rate-zero bins stay audit-only */
std::vector<dissipator> collect_dissipators(const collapse_set& bins,
                                            const term_mask& mask) {
    std::vector<dissipator> out;
    for (const auto& term : bins.terms) {
        if (term.rate == 0.0) continue;
        operator_poly op = masked(term.op, mask);
        if (op.empty()) continue;
        out.push_back({std::move(op), {}, term.rate, term.freq, term.omega});
    }
    return out;
}

}  // namespace

collapse_set bin_by_frequency(const operator_poly& dressed,
                              const spectral_density& spectral) {
    const operator_poly src = prune(dressed);
    const frequencies fr = src.freq;

    std::map<freq_tuple, operator_poly> groups;
    for (const auto& [mono, coeff] : src.terms) {
        if (mono.is_identity()) continue;
        const freq_tuple shift{mono.m - mono.n, mono.p - mono.q, 0};
        for (const auto& [k, amp] : coeff.terms) {
            const freq_tuple label = -(shift + k);
            auto [it, inserted] = groups.try_emplace(label, fr);
            it->second.add_static(mono, amp);
        }
    }

    std::vector<std::pair<double, freq_tuple>> order;
    order.reserve(groups.size());
    for (const auto& [label, op] : groups) order.emplace_back(fr.value(label), label);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    const double guard = degeneracy_guard *
        std::max({std::abs(fr.wq), std::abs(fr.wc), std::abs(fr.wd)});
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (std::abs(order[i - 1].first - order[i].first) < guard)
            throw accidental_degeneracy(
                "labels " + tuple_text(order[i - 1].second) + " and " +
                tuple_text(order[i].second) + " both land at frequency " +
                std::to_string(order[i].first));
    }

    collapse_set out;
    out.terms.reserve(order.size());
    for (const auto& [omega, label] : order) {
        collapse_term term;
        term.freq = label;
        term.omega = omega;
        term.op = std::move(groups.at(label));
        term.rate = spectral(omega);
        out.terms.push_back(std::move(term));
    }
    return out;
}

operator_poly reconstruct(const collapse_set& set, const frequencies& fr) {
    operator_poly out(fr);
    for (const auto& term : set.terms) {
        for (const auto& [mono, coeff] : term.op.terms) {
            const freq_tuple k{-term.freq.dq - (mono.m - mono.n),
                               -term.freq.dc - (mono.p - mono.q), -term.freq.dd};
            for (const auto& [unused, amp] : coeff.terms) out.add_term(mono, k, amp);
        }
    }
    return out;
}

bool mask_keeps(const term_mask& mask, const monomial& mono) {
    if (mask.single_photon_only &&
        std::abs(mono.m - mono.n) + std::abs(mono.p - mono.q) != 1)
        return false;
    if (mask.drop_dephasing && mono.number_conserving()) return false;
    if (mask.drop_correlated && mono.m + mono.n == 1 && mono.p + mono.q == 1)
        return false;
    return true;
}

std::string variant_name(me_variant v) {
    switch (v) {
        case me_variant::eme_full: return "eme_full";
        case me_variant::eme_subset: return "eme_subset";
        case me_variant::kerr_only: return "kerr_only";
        case me_variant::one_mode_eme: return "one_mode_eme";
        case me_variant::one_mode_fock: return "one_mode_fock";
    }
    std::abort();
}

me_generator assemble_eme(const circuit_params& params, const normal_mode_data& nm,
                          const displacement_data& disp,
                          const spectral_density& spectral,
                          const term_mask& mask, bool include_i4) {
    const quartic_expansion qe = expand_displaced_hamiltonian(params, nm, disp);
    const generator_solution gen = solve_generator(qe);
    const effective_hamiltonian_data eff = effective_hamiltonian(qe);
    const operator_poly channel = bare_cavity_charge(nm, qe.h2.freq);

    me_generator out;
    out.variant = mask.any() ? me_variant::eme_subset : me_variant::eme_full;
    out.mask = mask;
    out.epsilon = params.epsilon;
    out.spectral = spectral;
    out.h = eff.h_eff;
    out.bins = bin_by_frequency(
        dressed_quadrature(channel, gen, params.epsilon, include_i4), spectral);
    out.dissipators = collect_dissipators(out.bins, mask);
    return out;
}

me_generator assemble_kerr_me(const circuit_params& params,
                              const normal_mode_data& nm,
                              const spectral_density& spectral) {
    /* Kerr coefficients come from the undriven expansion; the drive stays an
     * explicit lab-frame term instead of being displaced away. */
    const quartic_expansion qe =
        expand_displaced_hamiltonian(params, nm, displacement_data{});
    const effective_hamiltonian_data eff = effective_hamiltonian(qe);
    const frequencies fr = qe.h2.freq;

    operator_poly h = eff.h_secular;
    for (const auto& [mono, coeff] : bare_cavity_charge(nm, fr).terms) {
        for (const auto& [k, amp] : coeff.terms) {
            const cplx half = params.drive_amp * amp * cplx(0.0, 0.5);
            h.add_term(mono, k + freq_tuple{0, 0, +1}, -half);  // sin(wd t)
            h.add_term(mono, k + freq_tuple{0, 0, -1}, +half);
        }
    }

    me_generator out;
    out.variant = me_variant::kerr_only;
    out.epsilon = params.epsilon;
    out.spectral = spectral;
    out.h = std::move(h);

    operator_poly a_op(fr), c_op(fr);
    a_op.add_static({0, 1, 0, 0}, 1.0);
    c_op.add_static({0, 0, 0, 1}, 1.0);
    out.dissipators.push_back({std::move(a_op), {},
                               spectral(nm.omega_q) * nm.v_ca * nm.v_ca,
                               {1, 0, 0}, nm.omega_q});
    out.dissipators.push_back({std::move(c_op), {},
                               spectral(nm.omega_c) * nm.v_cc * nm.v_cc,
                               {0, 1, 0}, nm.omega_c});
    return out;
}

bool one_mode_families::enabled(const freq_tuple& label) const {
    if (std::abs(label.dq) >= 2) return multiphoton;
    if (label.dd != 0) return drive_shifted;
    return main_bin;
}

me_generator assemble_one_mode(const one_mode_params& params,
                               const spectral_density& spectral,
                               const one_mode_families& families,
                               bool include_i4) {
    const cplx eta = one_mode_displacement(params.omega_q, params.kappa_q,
                                           params.drive_amp, params.omega_d);
    const quartic_expansion qe =
        expand_one_mode(params.omega_q, params.omega_d, eta, params.epsilon);
    const generator_solution gen = solve_generator(qe);
    const effective_hamiltonian_data eff = effective_hamiltonian(qe);

    me_generator out;
    out.variant = me_variant::one_mode_eme;
    out.epsilon = params.epsilon;
    out.spectral = spectral;
    out.h = eff.h_eff;
    out.bins = bin_by_frequency(
        dressed_quadrature(qubit_x(qe.h2.freq), gen, params.epsilon, include_i4),
        spectral);
    for (const auto& term : out.bins.terms) {
        if (term.rate == 0.0) continue;
        if (!families.enabled(term.freq)) continue;
        out.dissipators.push_back({term.op, {}, term.rate, term.freq, term.omega});
    }
    return out;
}

fock_rates one_mode_fock_rates(const one_mode_params& params,
                               const spectral_density& spectral, int n_max) {
    const cplx eta = one_mode_displacement(params.omega_q, params.kappa_q,
                                           params.drive_amp, params.omega_d);
    const double eta2 = std::norm(eta);
    const double wq = params.omega_q;
    const double wd = params.omega_d;
    const double eps = params.epsilon;

    /* raising amplitudes live in the 2wd - wq bin and, through the frame
     * micromotion, in the wq bin itself */
    const double up_unit =
        eps * eps * eta2 * eta2 / 64.0 *
        (spectral(2.0 * wd - wq) * std::pow(wq / (wd - wq), 2) +
         spectral(wq) * std::pow(2.0 * wd * wd / (wd * wd - wq * wq), 2));
    const double dephase_unit =
        eps * eps * eta2 *
        (std::pow(wd, 4) * spectral(wq) + std::pow(wq, 4) * spectral(wd)) /
        std::pow(wd * wd - wq * wq, 2);

    fock_rates out;
    out.down.assign(n_max + 1, 0.0);
    out.up.assign(n_max + 1, 0.0);
    out.dephase.assign(n_max + 1, 0.0);
    for (int n = 0; n <= n_max; ++n) {
        const double bracket = eps / 4.0 * (n + 2.0 * eta2);
        out.down[n] = n * (1.0 + bracket) * spectral((1.0 - bracket) * wq);
        out.up[n] = (n + 1.0) * up_unit;
        out.dephase[n] = double(n) * double(n) * dephase_unit;
    }
    return out;
}

me_generator assemble_one_mode_fock(const one_mode_params& params,
                                    const spectral_density& spectral, int dim) {
    const cplx eta = one_mode_displacement(params.omega_q, params.kappa_q,
                                           params.drive_amp, params.omega_d);
    const quartic_expansion qe =
        expand_one_mode(params.omega_q, params.omega_d, eta, params.epsilon);
    const effective_hamiltonian_data eff = effective_hamiltonian(qe);
    const fock_rates rates = one_mode_fock_rates(params, spectral, dim - 1);

    me_generator out;
    out.variant = me_variant::one_mode_fock;
    out.epsilon = params.epsilon;
    out.spectral = spectral;
    out.h = eff.h_secular;

    const auto jump = [dim](int row, int col) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
        m(row, col) = 1.0;
        return m;
    };
    for (int n = 1; n < dim; ++n) {
        if (rates.down[n] <= 0.0) continue;
        const double bracket = params.epsilon / 4.0 * (n + 2.0 * std::norm(eta));
        out.dissipators.push_back({operator_poly(qe.h2.freq), jump(n - 1, n),
                                   rates.down[n], {1, 0, 0},
                                   (1.0 - bracket) * params.omega_q});
    }
    for (int n = 0; n + 1 < dim; ++n) {
        if (rates.up[n] <= 0.0) continue;
        out.dissipators.push_back({operator_poly(qe.h2.freq), jump(n + 1, n),
                                   rates.up[n], {-1, 0, 2},
                                   2.0 * params.omega_d - params.omega_q});
    }
    for (int n = 1; n < dim; ++n) {
        if (rates.dephase[n] <= 0.0) continue;
        out.dissipators.push_back({operator_poly(qe.h2.freq), jump(n, n),
                                   rates.dephase[n], {0, 0, 0}, 0.0});
    }
    return out;
}

std::string generator_report(const me_generator& gen) {
    nlohmann::json root;
    root["variant"] = variant_name(gen.variant);
    root["epsilon"] = gen.epsilon;
    root["spectral"] = {
        {"kind", gen.spectral.kind == spectral_kind::flat_zero_t ? "flat_zero_t"
                                                                 : "flat_all"},
        {"kappa_flat", gen.spectral.kappa_flat}};
    root["mask"] = {{"drop_correlated", gen.mask.drop_correlated},
                    {"drop_dephasing", gen.mask.drop_dephasing},
                    {"single_photon_only", gen.mask.single_photon_only}};
    root["hamiltonian_terms"] = gen.h.terms.size();

    nlohmann::json list = nlohmann::json::array();
    for (const auto& d : gen.dissipators) {
        nlohmann::json entry;
        entry["label"] = {d.freq.dq, d.freq.dc, d.freq.dd};
        entry["omega"] = d.omega;
        entry["rate"] = d.rate;
        if (d.matrix.size() > 0) {
            entry["matrix_dim"] = d.matrix.rows();
        } else {
            nlohmann::json terms = nlohmann::json::array();
            for (const auto& [mono, coeff] : d.op.terms) {
                for (const auto& [k, amp] : coeff.terms) {
                    terms.push_back({{"mono", {mono.m, mono.n, mono.p, mono.q}},
                                     {"re", amp.real()},
                                     {"im", amp.imag()}});
                }
            }
            entry["terms"] = std::move(terms);
        }
        list.push_back(std::move(entry));
    }
    root["dissipators"] = std::move(list);
    root["audit_bins"] = gen.bins.terms.size();
    return root.dump(2);
}

}  // namespace eme
