#include "eme/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "eme/errors.hpp"

namespace eme {

namespace {

using sparse_op = Eigen::SparseMatrix<cplx>;

/* Move h into the frame corotating with wq n_q + wc n_c: each monomial picks
 * up the harmonic shift (m - n, p - q, 0) and the frame Hamiltonian is
 * subtracted, both exact in the integer-tuple representation.  Scalars are
 * dropped; they never survive the commutator. */
operator_poly rotated_hamiltonian(const operator_poly& h) {
    operator_poly out(h.freq);
    for (const auto& [mono, harm] : h.terms) {
        if (mono.is_identity()) continue;
        const freq_tuple shift{mono.m - mono.n, mono.p - mono.q, 0};
        for (const auto& [k, amp] : harm.terms) out.add_term(mono, k + shift, amp);
    }
    out.add_static({1, 1, 0, 0}, -h.freq.wq);
    out.add_static({0, 0, 1, 1}, -h.freq.wc);
    return out;
}

/* rhs(rho) = A(t) rho + rho A(t)^dag + sum_j L_j rho L_j^dag with
 * A = -i H(t) - (1/2) sum_j L_j^dag L_j.  The collapse matrices of an
 * assembled generator are sums of a few shifted diagonals, so they are
 * applied as sparse factors; the Hamiltonian products stay dense. */
struct liouvillian {
    Eigen::MatrixXcd a_static;
    std::vector<double> nu;               // nonzero harmonic frequencies of H
    std::vector<Eigen::MatrixXcd> h_osc;  // -i H_k per frequency
    std::vector<sparse_op> jumps;
    std::vector<sparse_op> jumps_dag;
    mutable Eigen::MatrixXcd a_t;
    mutable Eigen::MatrixXcd prod;

    void rhs(double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& out) const {
        const Eigen::MatrixXcd* a = &a_static;
        if (!h_osc.empty()) {
            a_t = a_static;
            for (std::size_t g = 0; g < h_osc.size(); ++g)
                a_t.noalias() += std::exp(cplx(0.0, nu[g] * t)) * h_osc[g];
            a = &a_t;
        }
        out.noalias() = (*a) * y;
        out.noalias() += y * a->adjoint();
        for (std::size_t j = 0; j < jumps.size(); ++j) {
            prod.noalias() = jumps[j] * y;
            out.noalias() += prod * jumps_dag[j];
        }
    }
};

liouvillian build_liouvillian(const me_generator& gen, const truncation& tr) {
    liouvillian lv;
    const int dim = tr.total();
    const cplx mi(0.0, -1.0);

    Eigen::MatrixXcd gamma_half = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& d : gen.dissipators) {
        if (d.rate == 0.0) continue;
        const Eigen::MatrixXcd c =
            d.matrix.size() > 0 ? d.matrix : to_matrix(d.op, 0.0, tr);
        if (c.rows() != dim || c.cols() != dim) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "collapse matrix is %ld x %ld, truncation needs %d x %d",
                          static_cast<long>(c.rows()), static_cast<long>(c.cols()),
                          dim, dim);
            throw dimension_mismatch(buf);
        }
        const Eigen::MatrixXcd l = std::sqrt(d.rate) * c;
        const Eigen::MatrixXcd l_dag = l.adjoint();
        gamma_half.noalias() += 0.5 * (l_dag * l);
        lv.jumps.push_back(l.sparseView());
        lv.jumps_dag.push_back(l_dag.sparseView());
        lv.jumps.back().makeCompressed();
        lv.jumps_dag.back().makeCompressed();
    }

    /* group the rotated Hamiltonian by numeric frequency; tuples that
     * evaluate to zero (an undriven base frequency, say) fold into the
     * static part */
    const operator_poly h = rotated_hamiltonian(gen.h);
    std::map<double, operator_poly> groups;
    for (const auto& [mono, harm] : h.terms)
        for (const auto& [k, amp] : harm.terms) {
            auto [it, fresh] = groups.try_emplace(h.freq.value(k), h.freq);
            it->second.add_static(mono, amp);
        }

    lv.a_static = -gamma_half;
    for (const auto& [freq, part] : groups) {
        if (freq == 0.0) {
            lv.a_static.noalias() += mi * to_matrix(part, 0.0, tr);
        } else {
            lv.nu.push_back(freq);
            lv.h_osc.push_back(mi * to_matrix(part, 0.0, tr));
        }
    }
    return lv;
}

double min_eigenvalue(const Eigen::MatrixXcd& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

trajectory propagate(const me_generator& gen, const Eigen::MatrixXcd& rho0,
                     const truncation& tr, double t_end, double dt_out,
                     const integrator_options& opts) {
    const int dim = tr.total();
    if (tr.dim_q < 1 || tr.dim_c < 1 || dim > opts.dim_cap) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "truncation %d x %d exceeds the cap of %d",
                      tr.dim_q, tr.dim_c, opts.dim_cap);
        throw dimension_mismatch(buf);
    }
    if (rho0.rows() != dim || rho0.cols() != dim) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "initial state is %ld x %ld, truncation needs %d x %d",
                      static_cast<long>(rho0.rows()), static_cast<long>(rho0.cols()), dim, dim);
        throw dimension_mismatch(buf);
    }
    if (!(t_end > 0.0) || !(dt_out > 0.0))
        throw config_error("t_end and dt_out must be positive");

    if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw config_error("initial state is not Hermitian");
    Eigen::MatrixXcd y = 0.5 * (rho0 + rho0.adjoint());
    if (std::abs(y.trace() - 1.0) > 1e-8)
        throw config_error("initial state does not have unit trace");
    if (min_eigenvalue(y) < -1e-7)
        throw config_error("initial state is not positive semidefinite");

    trajectory traj;
    traj.trunc = tr;

    std::vector<double> outs;
    for (long i = 1; static_cast<double>(i) * dt_out < t_end * (1.0 - 1e-12); ++i)
        outs.push_back(static_cast<double>(i) * dt_out);
    outs.push_back(t_end);

    auto record = [&](double t, const Eigen::MatrixXcd& r) {
        cplx nq(0.0, 0.0);
        cplx nc(0.0, 0.0);
        for (int iq = 0; iq < tr.dim_q; ++iq)
            for (int ic = 0; ic < tr.dim_c; ++ic) {
                const cplx pop = r(iq * tr.dim_c + ic, iq * tr.dim_c + ic);
                nq += static_cast<double>(iq) * pop;
                nc += static_cast<double>(ic) * pop;
            }
        traj.times.push_back(t);
        traj.n_q.push_back(nq);
        traj.n_c.push_back(nc);
        traj.trace.push_back(r.trace());
        traj.purity.push_back(r.squaredNorm());
        traj.min_eig.push_back(min_eigenvalue(r));

        double leak = 0.0;
        if (tr.dim_q >= 3)
            for (int iq = tr.dim_q - 2; iq < tr.dim_q; ++iq)
                for (int ic = 0; ic < tr.dim_c; ++ic)
                    leak += r(iq * tr.dim_c + ic, iq * tr.dim_c + ic).real();
        double leak_c = 0.0;
        if (tr.dim_c >= 3)
            for (int ic = tr.dim_c - 2; ic < tr.dim_c; ++ic)
                for (int iq = 0; iq < tr.dim_q; ++iq)
                    leak_c += r(iq * tr.dim_c + ic, iq * tr.dim_c + ic).real();
        leak = std::max(leak, leak_c);
        traj.max_leak = std::max(traj.max_leak, leak);
        if (leak > opts.leak_threshold) traj.truncation_leak = true;
    };

    const liouvillian lv = build_liouvillian(gen, tr);
    record(0.0, y);

    double nu_max = 0.0;
    for (double f : lv.nu) nu_max = std::max(nu_max, std::abs(f));

    double h = opts.fixed_step > 0.0 ? opts.fixed_step
             : opts.first_step > 0.0 ? opts.first_step
                                     : std::min({t_end, dt_out, 0.25 / (1.0 + nu_max)});
    const double h_floor = std::max(1e-14, 1e-13 * t_end);

    Eigen::MatrixXcd k1, k2, k3, k4, k5, k6, k7, y5, err, ytmp;
    lv.rhs(0.0, y, k1);

    double t = 0.0;
    int consecutive_rejects = 0;
    std::size_t oi = 0;
    while (oi < outs.size()) {
        const double target = outs[oi];
        const double h_want = h;
        double hs = h;
        bool capped = false;
        if (t + hs >= target) {
            hs = target - t;
            capped = true;
        }

        ytmp.noalias() = y + hs * (0.2 * k1);
        lv.rhs(t + 0.2 * hs, ytmp, k2);
        ytmp.noalias() = y + hs * ((3.0 / 40.0) * k1 + (9.0 / 40.0) * k2);
        lv.rhs(t + 0.3 * hs, ytmp, k3);
        ytmp.noalias() = y + hs * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2 + (32.0 / 9.0) * k3);
        lv.rhs(t + 0.8 * hs, ytmp, k4);
        ytmp.noalias() = y + hs * ((19372.0 / 6561.0) * k1 - (25360.0 / 2187.0) * k2 +
                                   (64448.0 / 6561.0) * k3 - (212.0 / 729.0) * k4);
        lv.rhs(t + (8.0 / 9.0) * hs, ytmp, k5);
        ytmp.noalias() = y + hs * ((9017.0 / 3168.0) * k1 - (355.0 / 33.0) * k2 +
                                   (46732.0 / 5247.0) * k3 + (49.0 / 176.0) * k4 -
                                   (5103.0 / 18656.0) * k5);
        lv.rhs(t + hs, ytmp, k6);
        y5.noalias() = y + hs * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3 +
                                 (125.0 / 192.0) * k4 - (2187.0 / 6784.0) * k5 +
                                 (11.0 / 84.0) * k6);
        lv.rhs(t + hs, y5, k7);

        double enorm = 0.0;
        if (opts.fixed_step <= 0.0) {
            err.noalias() = hs * ((71.0 / 57600.0) * k1 - (71.0 / 16695.0) * k3 +
                                  (71.0 / 1920.0) * k4 - (17253.0 / 339200.0) * k5 +
                                  (22.0 / 525.0) * k6 - (1.0 / 40.0) * k7);
            const Eigen::ArrayXXd scale =
                opts.abs_tol +
                opts.rel_tol * y.cwiseAbs().cwiseMax(y5.cwiseAbs()).array();
            enorm = (err.cwiseAbs().array() / scale).maxCoeff();
        }

        if (opts.fixed_step > 0.0 || enorm <= 1.0) {
            t = capped ? target : t + hs;
            traj.max_herm_drift = std::max(
                traj.max_herm_drift, (y5 - y5.adjoint()).cwiseAbs().maxCoeff());
            y = 0.5 * (y5 + y5.adjoint());
            k1.swap(k7);  // first-same-as-last: k7 doubles as the next k1
            ++traj.steps_accepted;
            consecutive_rejects = 0;
            if (capped) {
                record(t, y);
                ++oi;
            }
            if (opts.fixed_step > 0.0) {
                h = opts.fixed_step;
            } else if (capped) {
                h = h_want;  // the cap says nothing about accuracy
            } else {
                h = hs * std::clamp(0.9 * std::pow(std::max(enorm, 1e-16), -0.2), 0.2, 5.0);
            }
        } else {
            ++traj.steps_rejected;
            ++consecutive_rejects;
            h = hs * std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
            if (h < h_floor || consecutive_rejects > 60) {
                char buf[224];
                std::snprintf(buf, sizeof buf,
                              "step control collapsed at t = %.6e (h = %.3e, error ratio "
                              "%.3e, %ld accepted, %ld rejected)",
                              t, h, enorm, traj.steps_accepted, traj.steps_rejected);
                throw adaptive_failure(buf);
            }
        }
    }

    traj.final_rho = std::move(y);
    return traj;
}

cplx expectation(const Eigen::MatrixXcd& rho, const operator_poly& op, double t,
                 const truncation& tr) {
    const int dim = tr.total();
    if (rho.rows() != dim || rho.cols() != dim) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "density matrix is %ld x %ld, truncation needs %d x %d",
                      static_cast<long>(rho.rows()), static_cast<long>(rho.cols()), dim, dim);
        throw dimension_mismatch(buf);
    }
    const Eigen::MatrixXcd m = to_matrix(op, t, tr);
    return m.transpose().cwiseProduct(rho).sum();  // Tr[rho m]
}

std::string trajectory_csv(const trajectory& traj) {
    std::string out =
        "time,nq_re,nq_im,nc_re,nc_im,trace_re,trace_im,purity,trace_error,min_eig\n";
    char line[352];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(line, sizeof line,
                      "%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n",
                      traj.times[i], traj.n_q[i].real(), traj.n_q[i].imag(),
                      traj.n_c[i].real(), traj.n_c[i].imag(), traj.trace[i].real(),
                      traj.trace[i].imag(), traj.purity[i],
                      std::abs(traj.trace[i] - 1.0), traj.min_eig[i]);
        out += line;
    }
    return out;
}

}  // namespace eme
