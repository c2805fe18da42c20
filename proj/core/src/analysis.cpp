#include "eme/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <thread>

#include "eme/displacement.hpp"
#include "eme/errors.hpp"

namespace eme {

namespace {

std::vector<double> window_series(const trajectory& traj,
                                  const std::string& observable,
                                  const fit_window& win, std::vector<double>& ts) {
    const std::vector<cplx>* src = nullptr;
    if (observable == "nq")
        src = &traj.n_q;
    else if (observable == "nc")
        src = &traj.n_c;
    else
        throw config_error("fit_rate: unknown observable '" + observable +
                           "' (expected nq or nc)");

    const double slack = 1e-9 * std::max(1.0, std::abs(win.t1));
    std::vector<double> values;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t < win.t0 - slack || t > win.t1 + slack) continue;
        ts.push_back(t);
        values.push_back((*src)[i].real());
    }
    return values;
}

/* Amplitude of the largest nonzero-frequency Fourier component of r on its
 * uniform grid.  The series is short (hundreds of samples), so the direct
 * O(N^2) transform is fine. */
double dominant_oscillation(const std::vector<double>& r) {
    const std::size_t n = r.size();
    if (n < 4) return 0.0;
    double best = 0.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        cplx acc = 0.0;
        const double step = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            acc += r[i] * std::polar(1.0, step * static_cast<double>(i));
        best = std::max(best, 2.0 * std::abs(acc) / static_cast<double>(n));
    }
    return best;
}

/* Tasks are independent; results land in caller-owned slots, so the worker
 * count changes scheduling only, never arithmetic.  All jobs run even if one
 * throws; the first failure (in job order) is rethrown after the join. */
void run_jobs(std::vector<std::function<void()>>& jobs, int workers) {
    workers = std::clamp(workers, 1, static_cast<int>(jobs.size()));
    if (workers <= 1) {
        for (auto& job : jobs) job();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(jobs.size());
    auto drain = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                jobs[i]();
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
}

Eigen::MatrixXcd excited_qubit_state(const truncation& tr) {
    if (tr.dim_q < 2)
        throw config_error("sweep truncation cannot hold the initial qubit excitation");
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(tr.total(), tr.total());
    rho(1 * tr.dim_c + 0, 1 * tr.dim_c + 0) = 1.0;
    return rho;
}

std::size_t index_of_zero(const std::vector<double>& grid, const char* what) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] == 0.0) return i;
    throw config_error(std::string(what) +
                       " grid must contain 0 so rates can be normalized");
}

void append_row(std::string& out, const std::string& variant, double axis,
                double kappa, double kappa_err, double delta) {
    char buf[128];
    std::snprintf(buf, sizeof buf, ",%.12e,%.12e,%.12e,%.12e\n", axis, kappa,
                  kappa_err, delta);
    out += variant;
    out += buf;
}

/* Static coefficient magnitude of one monomial in one frequency bin. */
double bin_amplitude(const me_generator& gen, int dq, int dc, int dd,
                     const monomial& mono) {
    for (const auto& term : gen.bins.terms) {
        if (term.freq.dq != dq || term.freq.dc != dc || term.freq.dd != dd) continue;
        const auto it = term.op.terms.find(mono);
        if (it == term.op.terms.end()) return 0.0;
        cplx total = 0.0;
        for (const auto& [k, amp] : it->second.terms) total += amp;
        return std::abs(total);
    }
    return 0.0;
}

}  // namespace

rate_fit fit_rate(const trajectory& traj, const std::string& observable,
                  const fit_window& win) {
    std::vector<double> ts;
    const std::vector<double> values = window_series(traj, observable, win, ts);
    const std::size_t n = values.size();
    if (n < 4) throw config_error("fit_rate: window holds fewer than four samples");

    std::vector<double> logs(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (values[i] <= 0.0)
            throw config_error("fit_rate: observable is not positive over the window");
        logs[i] = std::log(values[i]);
    }

    double t_mean = 0.0, l_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        t_mean += ts[i];
        l_mean += logs[i];
    }
    t_mean /= static_cast<double>(n);
    l_mean /= static_cast<double>(n);

    double s_tt = 0.0, s_tl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s_tt += (ts[i] - t_mean) * (ts[i] - t_mean);
        s_tl += (ts[i] - t_mean) * (logs[i] - l_mean);
    }
    const double slope = s_tl / s_tt;
    const double intercept = l_mean - slope * t_mean;

    std::vector<double> residuals(n);
    double s_rr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        residuals[i] = logs[i] - (intercept + slope * ts[i]);
        s_rr += residuals[i] * residuals[i];
    }
    const double rms = std::sqrt(s_rr / static_cast<double>(n));

    /* largest climb of the raw log series above its running minimum */
    double run_min = logs[0], rise = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        rise = std::max(rise, logs[i] - run_min);
        run_min = std::min(run_min, logs[i]);
    }
    if (rise > std::max(3.0 * rms, 1e-12)) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "fit_rate: log series rises by %.3e against rms residual %.3e "
                      "inside [%g, %g]",
                      rise, rms, win.t0, win.t1);
        throw non_monotone_data(msg);
    }

    rate_fit fit;
    fit.kappa = -0.5 * slope;
    fit.kappa_err =
        0.5 * std::sqrt(s_rr / static_cast<double>(n - 2) / s_tt);
    fit.rms_residual = rms;
    fit.frequency_residual = dominant_oscillation(residuals);
    fit.window = win;
    return fit;
}

rate_fit fit_rate(const trajectory& traj, const std::string& observable) {
    if (traj.times.empty()) throw config_error("fit_rate: empty trajectory");
    return fit_rate(traj, observable, {traj.times.front(), traj.times.back()});
}

double power_law_exponent(const std::vector<double>& x,
                          const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw config_error("power_law_exponent: need two equal-length series");
    const std::size_t n = x.size();
    double lx_mean = 0.0, ly_mean = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0)
            throw config_error("power_law_exponent: series must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        lx_mean += lx[i];
        ly_mean += ly[i];
    }
    lx_mean /= static_cast<double>(n);
    ly_mean /= static_cast<double>(n);
    double s_xx = 0.0, s_xy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s_xx += (lx[i] - lx_mean) * (lx[i] - lx_mean);
        s_xy += (lx[i] - lx_mean) * (ly[i] - ly_mean);
    }
    if (s_xx == 0.0)
        throw config_error("power_law_exponent: axis values are all equal");
    return s_xy / s_xx;
}

namespace {

/* An unset bath strength means "use the circuit's flat coupling". */
spectral_density resolve_bath(const spectral_density& bath, double fallback) {
    spectral_density out = bath;
    if (out.kappa_flat == 0.0) out.kappa_flat = fallback;
    return out;
}

}  // namespace

sweep_result power_sweep(const power_sweep_config& config) {
    const std::size_t zero_at = index_of_zero(config.nbar_grid, "power sweep nbar");
    const spectral_density bath =
        resolve_bath(config.bath, config.params.kappa_flat);
    const normal_mode_data nm = normal_modes(config.params);
    const auto [kappa_q, kappa_c] = linear_rates(nm, config.params.kappa_flat);
    const fit_window win{5.0 / kappa_c, config.run.t_end};

    struct variant_spec {
        const char* name;
        term_mask mask;
        bool kerr;
    };
    const std::vector<variant_spec> variants = {
        {"eme_full", {}, false},
        {"kerr_only", {}, true},
        {"no_correlated_ac", {.drop_correlated = true}, false},
        {"no_dephasing", {.drop_dephasing = true}, false},
        {"single_photon_only", {.single_photon_only = true}, false},
    };

    const std::size_t n_axis = config.nbar_grid.size();
    std::vector<sweep_point> points(variants.size() * n_axis);
    std::vector<std::function<void()>> jobs;
    for (std::size_t v = 0; v < variants.size(); ++v)
        for (std::size_t a = 0; a < n_axis; ++a) {
            jobs.push_back([&, v, a] {
                const double nbar = config.nbar_grid[a];
                circuit_params p = config.params;
                p.drive_amp =
                    drive_amp_for_target_nbar(nbar, nm, p, kappa_q, kappa_c);
                me_generator gen;
                if (variants[v].kerr) {
                    gen = assemble_kerr_me(p, nm, bath);
                } else {
                    const displacement_data disp =
                        steady_state_displacement(nm, p, kappa_q, kappa_c);
                    gen = assemble_eme(p, nm, disp, bath, variants[v].mask);
                }
                const trajectory traj =
                    propagate(gen, excited_qubit_state(config.run.trunc),
                              config.run.trunc, config.run.t_end,
                              config.run.dt_out, config.run.integ);
                sweep_point& pt = points[v * n_axis + a];
                pt.variant = variants[v].name;
                pt.axis_value = nbar;
                pt.fit = fit_rate(traj, "nq", win);
                pt.truncation_leak = traj.truncation_leak;
                pt.max_leak = traj.max_leak;
            });
        }
    run_jobs(jobs, config.run.workers);

    for (std::size_t v = 0; v < variants.size(); ++v) {
        const double kappa0 = points[v * n_axis + zero_at].fit.kappa;
        for (std::size_t a = 0; a < n_axis; ++a) {
            sweep_point& pt = points[v * n_axis + a];
            pt.delta_kappa_norm = (pt.fit.kappa - kappa0) / kappa0;
        }
    }

    sweep_result result;
    result.points = std::move(points);
    return result;
}

sweep_result detuning_sweep(const detuning_sweep_config& config) {
    for (double d : config.detunings)
        if (d <= 0.0)
            throw config_error("detuning sweep: omega_c - omega_d values must be > 0");
    const spectral_density bath =
        resolve_bath(config.bath, config.params.kappa_flat);
    const normal_mode_data nm = normal_modes(config.params);
    const auto [kappa_q, kappa_c] = linear_rates(nm, config.params.kappa_flat);
    const fit_window win{5.0 / kappa_c, config.run.t_end};

    const std::size_t n_axis = config.detunings.size();
    /* slot 0 is the undriven baseline */
    std::vector<sweep_point> points(1 + n_axis);
    std::vector<double> coef_ac(n_axis), coef_nq(n_axis);

    std::vector<std::function<void()>> jobs;
    jobs.push_back([&] {
        circuit_params p = config.params;
        p.drive_amp = 0.0;
        const displacement_data disp =
            steady_state_displacement(nm, p, kappa_q, kappa_c);
        const me_generator gen = assemble_eme(p, nm, disp, bath);
        const trajectory traj =
            propagate(gen, excited_qubit_state(config.run.trunc), config.run.trunc,
                      config.run.t_end, config.run.dt_out, config.run.integ);
        sweep_point& pt = points[0];
        pt.variant = "eme_undriven";
        pt.axis_value = 0.0;
        pt.fit = fit_rate(traj, "nq", win);
        pt.truncation_leak = traj.truncation_leak;
        pt.max_leak = traj.max_leak;
    });
    for (std::size_t a = 0; a < n_axis; ++a) {
        jobs.push_back([&, a] {
            circuit_params p = config.params;
            p.drive_freq = nm.omega_c - config.detunings[a];
            p.drive_amp = drive_amp_for_target_nbar(config.target_nbar, nm, p,
                                                    kappa_q, kappa_c);
            const displacement_data disp =
                steady_state_displacement(nm, p, kappa_q, kappa_c);
            const me_generator gen = assemble_eme(p, nm, disp, bath);
            /* drive-harmonic partners of the qubit and cavity lines */
            coef_ac[a] = bin_amplitude(gen, 1, 1, -1, monomial{0, 1, 0, 1});
            coef_nq[a] = bin_amplitude(gen, 0, 0, 1, monomial{1, 1, 0, 0});
            const trajectory traj =
                propagate(gen, excited_qubit_state(config.run.trunc),
                          config.run.trunc, config.run.t_end, config.run.dt_out,
                          config.run.integ);
            sweep_point& pt = points[1 + a];
            pt.variant = "eme_full";
            pt.axis_value = config.detunings[a];
            pt.fit = fit_rate(traj, "nq", win);
            pt.truncation_leak = traj.truncation_leak;
            pt.max_leak = traj.max_leak;
        });
    }
    run_jobs(jobs, config.run.workers);

    const double kappa_ref = points[0].fit.kappa;
    for (sweep_point& pt : points)
        pt.delta_kappa_norm = (pt.fit.kappa - kappa_ref) / kappa_ref;

    sweep_result result;
    result.points = std::move(points);
    result.coef_axis = config.detunings;
    result.coef_correlated_ac = std::move(coef_ac);
    result.coef_dephasing_nq = std::move(coef_nq);
    return result;
}

sweep_result one_mode_sweep(const one_mode_sweep_config& config) {
    const std::size_t zero_at = index_of_zero(config.nbar_grid, "one-mode nbar");
    const spectral_density bath = resolve_bath(config.bath, config.params.kappa_q);
    /* |eta| is linear in the drive amplitude, so one reference response
     * inverts the population target */
    const double eta_unit =
        std::abs(one_mode_displacement(config.params.omega_q, config.params.kappa_q,
                                       1.0, config.params.omega_d));
    if (eta_unit == 0.0)
        throw config_error("one-mode sweep: drive does not displace the mode");

    const std::size_t n_axis = config.nbar_grid.size();
    const std::size_t n_eps = config.epsilons.size();
    const truncation tr{config.dim, 1};
    std::vector<sweep_point> points(2 * n_eps * n_axis);

    auto variant_label = [](const char* prefix, double eps) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%s_eps_%.2f", prefix, eps);
        return std::string(buf);
    };

    std::vector<std::function<void()>> jobs;
    for (std::size_t e = 0; e < n_eps; ++e)
        for (std::size_t a = 0; a < n_axis; ++a) {
            jobs.push_back([&, e, a] {
                one_mode_params p = config.params;
                p.epsilon = config.epsilons[e];
                p.drive_amp = std::sqrt(config.nbar_grid[a]) / eta_unit;
                const me_generator gen = assemble_one_mode(p, bath);
                const trajectory traj =
                    propagate(gen, excited_qubit_state(tr), tr, config.t_end,
                              config.dt_out, config.integ);
                /* stop the fit above the drive-induced late-time floor */
                double t1 = config.t_end;
                for (std::size_t i = 0; i < traj.times.size(); ++i)
                    if (traj.n_q[i].real() < 0.12) {
                        t1 = traj.times[i];
                        break;
                    }
                sweep_point& pt = points[e * n_axis + a];
                pt.variant = variant_label("eme", config.epsilons[e]);
                pt.axis_value = config.nbar_grid[a];
                pt.fit = fit_rate(traj, "nq", {0.0, t1});
                pt.truncation_leak = traj.truncation_leak;
                pt.max_leak = traj.max_leak;
            });
        }
    run_jobs(jobs, config.workers);

    /* analytic companion rows from the n = 1 state-resolved downward rate */
    for (std::size_t e = 0; e < n_eps; ++e)
        for (std::size_t a = 0; a < n_axis; ++a) {
            one_mode_params p = config.params;
            p.epsilon = config.epsilons[e];
            p.drive_amp = std::sqrt(config.nbar_grid[a]) / eta_unit;
            const fock_rates rates = one_mode_fock_rates(p, bath, 2);
            sweep_point& pt = points[(n_eps + e) * n_axis + a];
            pt.variant = variant_label("analytic_n1", config.epsilons[e]);
            pt.axis_value = config.nbar_grid[a];
            pt.fit.kappa = 0.5 * rates.down[1];
            pt.fit.window = {0.0, 0.0};
        }

    for (std::size_t f = 0; f < 2 * n_eps; ++f) {
        const double kappa0 = points[f * n_axis + zero_at].fit.kappa;
        for (std::size_t a = 0; a < n_axis; ++a) {
            sweep_point& pt = points[f * n_axis + a];
            pt.delta_kappa_norm = (pt.fit.kappa - kappa0) / kappa0;
        }
    }

    sweep_result result;
    result.points = std::move(points);
    return result;
}

std::string sweep_csv(const sweep_result& result) {
    std::string out = "variant,axis_value,kappa,kappa_err,delta_kappa_norm\n";
    for (const sweep_point& pt : result.points)
        append_row(out, pt.variant, pt.axis_value, pt.fit.kappa, pt.fit.kappa_err,
                   pt.delta_kappa_norm);
    return out;
}

std::string coefficient_csv(const sweep_result& result) {
    if (result.coef_axis.empty()) return "";
    std::string out = "axis_value,coef_correlated_ac,coef_dephasing_nq\n";
    for (std::size_t i = 0; i < result.coef_axis.size(); ++i) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", result.coef_axis[i],
                      result.coef_correlated_ac[i], result.coef_dephasing_nq[i]);
        out += buf;
    }
    return out;
}

}  // namespace eme
