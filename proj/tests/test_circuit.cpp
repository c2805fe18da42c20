#include <doctest.h>

#include <cmath>

#include <eme/circuit.hpp>
#include <eme/poly.hpp>

using namespace eme;

namespace {

const double pi = 3.14159265358979323846;

circuit_params paper_params() {
    circuit_params p;
    p.omega_a_bar = 0.77 * pi;
    p.omega_c_bar = pi;
    p.g = 0.025 * pi;
    p.epsilon = 0.2;
    return p;
}

/* frozen reference solution of the 2x2 symplectic eigenproblem at the paper
 * parameters, computed by an independent dense-eigensolver script */
struct frozen {
    static constexpr double omega_q = 2.40947072805699181;
    static constexpr double omega_c = 3.14892738263868965;
    static constexpr double u_aa = 0.992405454597316439;
    static constexpr double u_ac = 0.120882978157857895;
    static constexpr double u_ca = -0.0927876163549148786;
    static constexpr double u_cc = 0.995531487234001089;
    static constexpr double v_aa = 0.996341192244253659;
    static constexpr double v_ac = 0.0928630841817143227;
    static constexpr double v_ca = -0.120981297050151912;
    static constexpr double v_cc = 0.993212617081972615;
};

operator_poly quadrature_x(int mode, double ua, double uc) {
    operator_poly p;
    if (mode == 0) {
        p.add_static({1, 0, 0, 0}, ua);
        p.add_static({0, 1, 0, 0}, ua);
        p.add_static({0, 0, 1, 0}, uc);
        p.add_static({0, 0, 0, 1}, uc);
    }
    return p;
}

operator_poly quadrature_y(double vq, double vc) {
    const cplx I(0.0, 1.0);
    operator_poly p;
    p.add_static({1, 0, 0, 0}, I * vq);
    p.add_static({0, 1, 0, 0}, -I * vq);
    p.add_static({0, 0, 1, 0}, I * vc);
    p.add_static({0, 0, 0, 1}, -I * vc);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("circuit");

TEST_CASE("decoupled limit is the identity transformation") {
    circuit_params p = paper_params();
    p.g = 0.0;
    normal_mode_data nm = normal_modes(p);
    CHECK(nm.omega_q == doctest::Approx(p.omega_a_bar).epsilon(1e-14));
    CHECK(nm.omega_c == doctest::Approx(p.omega_c_bar).epsilon(1e-14));
    CHECK(nm.u_aa == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(nm.u_cc == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(nm.u_ac) < 1e-13);
    CHECK(std::abs(nm.u_ca) < 1e-13);
    CHECK(nm.v_aa == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(nm.v_cc == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("paper parameters reproduce the frozen hybridization blocks") {
    normal_mode_data nm = normal_modes(paper_params());
    CHECK(nm.omega_q == doctest::Approx(frozen::omega_q).epsilon(1e-12));
    CHECK(nm.omega_c == doctest::Approx(frozen::omega_c).epsilon(1e-12));
    CHECK(nm.u_aa == doctest::Approx(frozen::u_aa).epsilon(1e-12));
    CHECK(nm.u_ac == doctest::Approx(frozen::u_ac).epsilon(1e-12));
    CHECK(nm.u_ca == doctest::Approx(frozen::u_ca).epsilon(1e-12));
    CHECK(nm.u_cc == doctest::Approx(frozen::u_cc).epsilon(1e-12));
    CHECK(nm.v_aa == doctest::Approx(frozen::v_aa).epsilon(1e-12));
    CHECK(nm.v_ac == doctest::Approx(frozen::v_ac).epsilon(1e-12));
    CHECK(nm.v_ca == doctest::Approx(frozen::v_ca).epsilon(1e-12));
    CHECK(nm.v_cc == doctest::Approx(frozen::v_cc).epsilon(1e-12));
    CHECK_FALSE(nm.dispersive_warning);
}

TEST_CASE("quadratic form becomes diagonal in the normal basis") {
    circuit_params p = paper_params();
    normal_mode_data nm = normal_modes(p);

    /* bare quadratures in terms of normal-mode ones via the u, v rows */
    operator_poly xa = quadrature_x(0, nm.u_aa, nm.u_ac);
    operator_poly xc;
    xc.add_static({1, 0, 0, 0}, nm.u_ca);
    xc.add_static({0, 1, 0, 0}, nm.u_ca);
    xc.add_static({0, 0, 1, 0}, nm.u_cc);
    xc.add_static({0, 0, 0, 1}, nm.u_cc);
    operator_poly ya = quadrature_y(nm.v_aa, nm.v_ac);
    operator_poly yc = quadrature_y(nm.v_ca, nm.v_cc);

    operator_poly h2 = 0.25 * p.omega_a_bar * normal_order_product(xa, xa);
    h2 = h2 + 0.25 * p.omega_a_bar * normal_order_product(ya, ya);
    h2 = h2 + 0.25 * p.omega_c_bar * normal_order_product(xc, xc);
    h2 = h2 + 0.25 * p.omega_c_bar * normal_order_product(yc, yc);
    h2 = h2 + cplx(p.g) * normal_order_product(ya, yc);

    operator_poly target;
    target.add_static({1, 1, 0, 0}, nm.omega_q);
    target.add_static({0, 0, 1, 1}, nm.omega_c);
    target.add_static({0, 0, 0, 0}, 0.5 * (nm.omega_q + nm.omega_c));

    CHECK(poly_distance(prune(h2, 1e-12), target) < 1e-10);
}

TEST_CASE("bare commutators survive the transformation") {
    normal_mode_data nm = normal_modes(paper_params());
    operator_poly xa = quadrature_x(0, nm.u_aa, nm.u_ac);
    operator_poly ya = quadrature_y(nm.v_aa, nm.v_ac);
    operator_poly yc = quadrature_y(nm.v_ca, nm.v_cc);

    operator_poly same = prune(commutator(xa, ya), 1e-12);
    CHECK(same.terms.size() == 1);
    CHECK(std::abs(same.terms.begin()->second.eval({}, 0.0) - cplx(0.0, 2.0)) < 1e-13);

    /* u v^T = 1 only holds to machine precision, so the cross commutator is
     * round-off dust rather than an exactly empty poly */
    CHECK(commutator(xa, yc).max_abs_amp() < 1e-13);
}

TEST_CASE("hybridization grows linearly at small coupling") {
    circuit_params p = paper_params();
    p.g = 1e-3;
    double u1 = normal_modes(p).u_ac;
    p.g = 2e-3;
    double u2 = normal_modes(p).u_ac;
    CHECK(u2 / u1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("critical photon number") {
    circuit_params p = paper_params();
    double ncrit = critical_photon_number(p);
    CHECK(ncrit == doctest::Approx(21.16).epsilon(1e-10));
    CHECK(ncrit > 20.0);
    CHECK(ncrit < 22.0);

    p.g = (p.omega_c_bar - p.omega_a_bar) / 2.0;
    CHECK(critical_photon_number(p) == doctest::Approx(1.0).epsilon(1e-12));

    circuit_params q = paper_params();
    q.g = (q.omega_c_bar - q.omega_a_bar) / (2.0 * 5.0);
    CHECK(critical_photon_number(q) == doctest::Approx(25.0).epsilon(1e-12));

    circuit_params d = paper_params();
    d.omega_c_bar = d.omega_a_bar;
    CHECK_THROWS_AS(critical_photon_number(d), degenerate_detuning);
}

TEST_CASE("guards") {
    circuit_params p = paper_params();
    p.g = 2.0;  /* strong enough to push an eigenvalue negative */
    CHECK_THROWS_AS(normal_modes(p), non_positive_definite);

    circuit_params warn = paper_params();
    warn.g = 0.4 * (warn.omega_c_bar - warn.omega_a_bar);
    CHECK(normal_modes(warn).dispersive_warning);

    circuit_params bad = paper_params();
    bad.epsilon = -0.1;
    CHECK_THROWS_AS(normal_modes(bad), config_error);
}

TEST_SUITE_END();
