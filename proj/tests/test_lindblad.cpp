#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <eme/circuit.hpp>
#include <eme/displacement.hpp>
#include <eme/eme_builder.hpp>
#include <eme/lindblad.hpp>

using namespace eme;

namespace {

const double pi = 3.14159265358979323846;

circuit_params paper_params() {
    circuit_params p;
    p.omega_a_bar = 0.77 * pi;
    p.omega_c_bar = pi;
    p.g = 0.025 * pi;
    p.epsilon = 0.2;
    p.kappa_flat = 3.18467718715487180e-02;
    p.drive_freq = 3.14718670163602576;
    return p;
}

const one_mode_params one_photon_point{1.0, 1.66, 0.005, 1.05761778053243050, 0.2};

Eigen::MatrixXcd random_density(int dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Eigen::MatrixXcd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = cplx(dist(rng), dist(rng));
    Eigen::MatrixXcd rho = a * a.adjoint();
    return rho / rho.trace();
}

Eigen::MatrixXcd fock_state(int level, int dim) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    rho(level, level) = 1.0;
    return rho;
}

/* bare cavity decay D[c] at the given rate, no Hamiltonian */
me_generator decay_generator(double rate) {
    me_generator gen;
    gen.h = operator_poly(frequencies{});
    dissipator d;
    d.op = operator_poly(frequencies{});
    d.op.add_static({0, 0, 0, 1}, 1.0);
    d.rate = rate;
    gen.dissipators.push_back(d);
    return gen;
}

void check_invariants(const trajectory& traj) {
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        INFO("sample ", i, " at t = ", traj.times[i]);
        CHECK(std::abs(traj.trace[i] - 1.0) <= 1e-8);
        CHECK(traj.min_eig[i] >= -1e-7);
        CHECK(traj.purity[i] <= 1.0 + 1e-10);
        CHECK(traj.purity[i] > 0.0);
    }
    CHECK(traj.max_herm_drift <= 1e-10);
}

}  // namespace

TEST_SUITE_BEGIN("lindblad");

TEST_CASE("bare cavity decay matches the exponential") {
    const double rate = 1.0;
    const me_generator gen = decay_generator(rate);
    const truncation tr{1, 5};
    const trajectory traj = propagate(gen, fock_state(2, 5), tr, 3.0, 0.25);

    REQUIRE(traj.times.size() == 13);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == 3.0);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double want = 2.0 * std::exp(-rate * traj.times[i]);
        INFO("t = ", traj.times[i]);
        CHECK(std::abs(traj.n_c[i].real() - want) <= 1e-6);
        CHECK(std::abs(traj.n_c[i].imag()) <= 1e-12);
        CHECK(std::abs(traj.n_q[i]) <= 1e-12);  // single-level qubit
    }
    check_invariants(traj);
    CHECK_FALSE(traj.truncation_leak);
    CHECK(traj.steps_accepted > 0);
}

TEST_CASE("frame shift reproduces the hand-rotated drive") {
    /* the same driven, damped mode written in the lab frame (engine rotates
     * it away) and pre-rotated by hand; the samples must agree */
    const double wc = 2.5, wd = 3.1, amp = 0.3, rate = 0.2;

    me_generator lab;
    lab.h = operator_poly(frequencies{0.0, wc, wd});
    lab.h.add_static({0, 0, 1, 1}, wc);
    lab.h.add_term({0, 0, 1, 0}, {0, 0, -1}, amp);
    lab.h.add_term({0, 0, 0, 1}, {0, 0, 1}, amp);
    dissipator d;
    d.op = operator_poly(lab.h.freq);
    d.op.add_static({0, 0, 0, 1}, 1.0);
    d.rate = rate;
    lab.dissipators.push_back(d);

    me_generator rot;
    rot.h = operator_poly(frequencies{0.0, 0.0, wd - wc});
    rot.h.add_term({0, 0, 1, 0}, {0, 0, -1}, amp);
    rot.h.add_term({0, 0, 0, 1}, {0, 0, 1}, amp);
    d.op = operator_poly(rot.h.freq);
    d.op.add_static({0, 0, 0, 1}, 1.0);
    rot.dissipators.assign(1, d);

    const truncation tr{1, 8};
    const trajectory ta = propagate(lab, fock_state(0, 8), tr, 12.0, 2.0);
    const trajectory tb = propagate(rot, fock_state(0, 8), tr, 12.0, 2.0);
    REQUIRE(ta.times.size() == tb.times.size());
    for (std::size_t i = 0; i < ta.times.size(); ++i) {
        INFO("t = ", ta.times[i]);
        CHECK(std::abs(ta.n_c[i] - tb.n_c[i]) <= 3e-7);
        CHECK(std::abs(ta.purity[i] - tb.purity[i]) <= 3e-7);
    }
    /* and the drive actually populated the mode */
    CHECK(ta.n_c.back().real() > 0.1);
}

TEST_CASE("expectation matches the dense trace") {
    const truncation tr{3, 4};
    const Eigen::MatrixXcd rho = random_density(tr.total(), 7);

    operator_poly op(frequencies{1.3, 0.9, 2.1});
    op.add_static({1, 1, 0, 0}, 0.75);
    op.add_term({1, 0, 0, 1}, {1, -1, 0}, cplx(0.2, -0.4));
    op.add_term({0, 1, 1, 0}, {-1, 1, 0}, cplx(0.2, 0.4));
    op.add_static({0, 0, 1, 1}, -0.3);

    const double t = 0.7;
    const Eigen::MatrixXcd m = to_matrix(op, t, tr);
    const cplx want = (rho * m).trace();
    CHECK(std::abs(expectation(rho, op, t, tr) - want) <= 1e-12);
    CHECK(std::abs(expectation(rho, op, t, tr).imag()) <= 1e-12);  // Hermitian op

    operator_poly ident(frequencies{});
    ident.add_static({0, 0, 0, 0}, 1.0);
    CHECK(std::abs(expectation(rho, ident, 0.0, tr) - 1.0) <= 1e-12);

    operator_poly n_c(frequencies{});
    n_c.add_static({0, 0, 1, 1}, 1.0);
    const Eigen::MatrixXcd two = fock_state(2, tr.total());  // |0_q, 2_c>
    CHECK(std::abs(expectation(two, n_c, 0.0, tr) - 2.0) <= 1e-12);

    CHECK_THROWS_AS(expectation(random_density(5, 1), n_c, 0.0, tr),
                    dimension_mismatch);
}

TEST_CASE("driven linear circuit reaches the predicted cavity population") {
    circuit_params p = paper_params();
    p.epsilon = 0.0;  // linear: the displacement solution is exact
    const normal_mode_data nm = normal_modes(p);
    const auto [kq, kc] = linear_rates(nm, p.kappa_flat);
    const spectral_density bath{spectral_kind::flat_zero_t, p.kappa_flat};

    integrator_options opts;
    opts.rel_tol = 1e-6;  // the target is a 1% population check
    opts.abs_tol = 1e-9;

    const double t_end = 8.0 / kc;
    for (const double target : {0.25, 1.0}) {
        p.drive_amp = drive_amp_for_target_nbar(target, nm, p, kq, kc);
        const displacement_data disp = steady_state_displacement(nm, p, kq, kc);
        REQUIRE(disp.nbar_c == doctest::Approx(target).epsilon(1e-10));

        const me_generator gen = assemble_kerr_me(p, nm, bath);
        const truncation tr{4, target > 0.5 ? 12 : 10};
        const trajectory traj =
            propagate(gen, fock_state(0, tr.total()), tr, t_end, t_end / 16.0, opts);

        INFO("target nbar_c = ", target);
        CHECK(std::abs(traj.n_c.back().real() - target) <= 0.01 * target);
        CHECK_FALSE(traj.truncation_leak);
        CHECK(std::abs(traj.trace.back() - 1.0) <= 1e-8);
    }
}

TEST_CASE("fixed-step errors shrink at the design order") {
    const me_generator gen = decay_generator(1.0);
    const truncation tr{1, 5};
    const double t_end = 2.0;
    const double exact = 2.0 * std::exp(-t_end);

    std::vector<double> errs;
    for (const double h : {0.4, 0.2, 0.1}) {
        integrator_options opts;
        opts.fixed_step = h;
        const trajectory traj =
            propagate(gen, fock_state(2, 5), tr, t_end, t_end, opts);
        errs.push_back(std::abs(traj.n_c.back().real() - exact));
    }
    REQUIRE(errs[0] > 1e-13);  // above round-off, or the order test is vacuous
    REQUIRE(errs[2] > 1e-13);
    const double p1 = std::log2(errs[0] / errs[1]);
    const double p2 = std::log2(errs[1] / errs[2]);
    INFO("orders ", p1, " ", p2);
    CHECK(p1 >= 4.3);
    CHECK(p1 <= 5.9);
    CHECK(p2 >= 4.3);
    CHECK(p2 <= 5.9);
}

TEST_CASE("propagation is linear in the initial state") {
    const spectral_density bath{spectral_kind::flat_all,
                                2.0 * one_photon_point.kappa_q};
    const me_generator gen = assemble_one_mode(one_photon_point, bath);
    const truncation tr{6, 1};
    const double alpha = 0.35;

    const Eigen::MatrixXcd ra = random_density(6, 11);
    const Eigen::MatrixXcd rb = random_density(6, 12);
    const Eigen::MatrixXcd rc = alpha * ra + (1.0 - alpha) * rb;

    const trajectory ta = propagate(gen, ra, tr, 30.0, 5.0);
    const trajectory tb = propagate(gen, rb, tr, 30.0, 5.0);
    const trajectory tc = propagate(gen, rc, tr, 30.0, 5.0);

    for (std::size_t i = 0; i < tc.times.size(); ++i) {
        const cplx mix = alpha * ta.n_q[i] + (1.0 - alpha) * tb.n_q[i];
        INFO("t = ", tc.times[i]);
        CHECK(std::abs(tc.n_q[i] - mix) <= 1e-6);
    }
    const Eigen::MatrixXcd mix_rho =
        alpha * ta.final_rho + (1.0 - alpha) * tb.final_rho;
    CHECK((tc.final_rho - mix_rho).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("cavity settles long before the qubit decays") {
    circuit_params p = paper_params();
    const normal_mode_data nm = normal_modes(p);
    const auto [kq, kc] = linear_rates(nm, p.kappa_flat);
    p.drive_amp = drive_amp_for_target_nbar(0.5, nm, p, kq, kc);
    const spectral_density bath{spectral_kind::flat_zero_t, p.kappa_flat};
    const me_generator gen = assemble_kerr_me(p, nm, bath);

    const truncation tr{5, 8};
    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(tr.total(), tr.total());
    rho0(1 * tr.dim_c + 0, 1 * tr.dim_c + 0) = 1.0;  // qubit excited, cavity empty

    integrator_options opts;
    opts.rel_tol = 1e-6;  // a factor-of-ten timescale ratio needs two digits
    opts.abs_tol = 1e-9;
    const double t_end = 200.0;
    const trajectory traj = propagate(gen, rho0, tr, t_end, 2.0, opts);

    /* cavity 1/e time: first sample whose distance to the final population
     * has dropped below 1/e of the initial distance */
    const double nc_end = traj.n_c.back().real();
    const double gap0 = std::abs(traj.n_c.front().real() - nc_end);
    double t_cav = t_end;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        if (std::abs(traj.n_c[i].real() - nc_end) < gap0 / std::exp(1.0)) {
            t_cav = traj.times[i];
            break;
        }

    /* qubit 1/e time from the log-slope well after the cavity transient */
    std::size_t i1 = 0, i2 = 0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.times[i] <= 40.0) i1 = i;
        i2 = i;
    }
    const double slope = std::log(traj.n_q[i1].real() / traj.n_q[i2].real()) /
                         (traj.times[i2] - traj.times[i1]);
    REQUIRE(slope > 0.0);
    const double t_qubit = 1.0 / slope;

    INFO("t_cav = ", t_cav, "  t_qubit = ", t_qubit);
    CHECK(t_cav < 0.1 * t_qubit);
    /* the qubit slope is the bare linear rate: D[a] at 2 kappa_q */
    CHECK(slope == doctest::Approx(2.0 * kq).epsilon(0.02));
}

TEST_CASE("truncation leak is flagged, not fatal") {
    circuit_params p = paper_params();
    p.epsilon = 0.0;
    const normal_mode_data nm = normal_modes(p);
    const auto [kq, kc] = linear_rates(nm, p.kappa_flat);
    p.drive_amp = drive_amp_for_target_nbar(1.0, nm, p, kq, kc);
    const spectral_density bath{spectral_kind::flat_zero_t, p.kappa_flat};
    const me_generator gen = assemble_kerr_me(p, nm, bath);

    integrator_options opts;
    opts.rel_tol = 1e-6;
    opts.abs_tol = 1e-9;
    const double t_end = 60.0;

    const truncation tight{3, 4};  // one photon cannot fit in four levels
    const trajectory clipped =
        propagate(gen, fock_state(0, tight.total()), tight, t_end, 10.0, opts);
    CHECK(clipped.truncation_leak);
    CHECK(clipped.max_leak > 0.05);
    CHECK(clipped.times.size() == 7);  // flagged runs still deliver every sample

    const truncation roomy{4, 14};
    const trajectory clean =
        propagate(gen, fock_state(0, roomy.total()), roomy, t_end, 10.0, opts);
    CHECK_FALSE(clean.truncation_leak);
    CHECK(clean.max_leak < 1e-6);
}

TEST_CASE("step collapse raises adaptive_failure") {
    const me_generator gen = decay_generator(1e15);
    CHECK_THROWS_AS(propagate(gen, fock_state(2, 4), {1, 4}, 1.0, 1.0),
                    adaptive_failure);
}

TEST_CASE("fock rate equation relaxes at the level rates") {
    const spectral_density bath{spectral_kind::flat_all,
                                2.0 * one_photon_point.kappa_q};
    const int dim = 5;
    const me_generator gen = assemble_one_mode_fock(one_photon_point, bath, dim);
    REQUIRE(!gen.dissipators.empty());
    REQUIRE(gen.dissipators.front().matrix.size() > 0);  // matrix-backed channels

    const fock_rates rates = one_mode_fock_rates(one_photon_point, bath, dim - 1);
    const double down1 = rates.down[1];
    const double t_end = 100.0;
    const trajectory traj =
        propagate(gen, fock_state(1, dim), {dim, 1}, t_end, 10.0);

    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        /* up-conversion feeds higher levels at ~1e-3 of the decay rate, so
         * the single-level exponential holds to about that accuracy */
        const double want = std::exp(-down1 * traj.times[i]);
        INFO("t = ", traj.times[i]);
        CHECK(std::abs(traj.n_q[i].real() - want) <= 0.01);
    }
    check_invariants(traj);
}

TEST_CASE("the full equation keeps trace, positivity, and hermiticity") {
    circuit_params p = paper_params();
    const normal_mode_data nm = normal_modes(p);
    const auto [kq, kc] = linear_rates(nm, p.kappa_flat);
    p.drive_amp = drive_amp_for_target_nbar(0.5, nm, p, kq, kc);
    const displacement_data disp = steady_state_displacement(nm, p, kq, kc);
    const spectral_density bath{spectral_kind::flat_zero_t, p.kappa_flat};
    const me_generator gen = assemble_eme(p, nm, disp, bath);

    /* The excited qubit conditions a cavity displacement of roughly two
     * photons through the near-resonant correlated channels, so the cavity
     * ladder needs headroom well beyond the half-photon drive population. */
    const truncation tr{4, 14};
    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(tr.total(), tr.total());
    rho0(1 * tr.dim_c + 0, 1 * tr.dim_c + 0) = 1.0;

    const trajectory traj = propagate(gen, rho0, tr, 40.0, 4.0);
    REQUIRE(traj.times.size() == 11);
    check_invariants(traj);
    CHECK_FALSE(traj.truncation_leak);
    CHECK(traj.steps_rejected < traj.steps_accepted);

    const std::string csv = trajectory_csv(traj);
    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line ==
          "time,nq_re,nq_im,nc_re,nc_im,trace_re,trace_im,purity,trace_error,min_eig");
    std::size_t rows = 0;
    std::vector<double> third_row;
    while (std::getline(lines, line)) {
        if (rows == 2) {
            std::istringstream fields(line);
            std::string field;
            while (std::getline(fields, field, ','))
                third_row.push_back(std::stod(field));
        }
        ++rows;
    }
    CHECK(rows == traj.times.size());
    REQUIRE(third_row.size() == 10);
    CHECK(third_row[0] == doctest::Approx(traj.times[2]).epsilon(1e-12));
    CHECK(third_row[1] == doctest::Approx(traj.n_q[2].real()).epsilon(1e-12));
    CHECK(third_row[3] == doctest::Approx(traj.n_c[2].real()).epsilon(1e-12));
    CHECK(third_row[7] == doctest::Approx(traj.purity[2]).epsilon(1e-12));
    CHECK(third_row[9] == doctest::Approx(traj.min_eig[2]).epsilon(1e-12));
}

TEST_CASE("propagate validates its inputs") {
    const me_generator gen = decay_generator(1.0);

    CHECK_THROWS_AS(propagate(gen, fock_state(0, 4), {1, 5}, 1.0, 0.5),
                    dimension_mismatch);
    CHECK_THROWS_AS(propagate(gen, fock_state(0, 80), {8, 10}, 1.0, 0.5),
                    dimension_mismatch);  // over the dimension cap
    CHECK_THROWS_AS(propagate(gen, fock_state(0, 5), {1, 5}, -1.0, 0.5),
                    config_error);
    CHECK_THROWS_AS(propagate(gen, fock_state(0, 5), {1, 5}, 1.0, 0.0),
                    config_error);

    Eigen::MatrixXcd bad_trace = 2.0 * fock_state(0, 5);
    CHECK_THROWS_AS(propagate(gen, bad_trace, {1, 5}, 1.0, 0.5), config_error);

    Eigen::MatrixXcd skew = fock_state(0, 5);
    skew(1, 2) = cplx(0.0, 0.3);  // not Hermitian
    CHECK_THROWS_AS(propagate(gen, skew, {1, 5}, 1.0, 0.5), config_error);

    Eigen::MatrixXcd indefinite = fock_state(0, 5);
    indefinite(1, 1) = -0.2;
    indefinite(0, 0) = 1.2;
    CHECK_THROWS_AS(propagate(gen, indefinite, {1, 5}, 1.0, 0.5), config_error);
}

TEST_SUITE_END();
