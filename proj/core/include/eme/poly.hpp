#ifndef EME_POLY_HPP
#define EME_POLY_HPP

/*
 * Normal-ordered two-mode bosonic polynomials whose coefficients are finite
 * sums of oscillatory terms amp * exp(i*f*t).  Frequencies f are stored as
 * exact integer combinations of the three base frequencies (w_q, w_c, w_d),
 * so that grouping by frequency is integer comparison and never depends on
 * floating-point round-off.  One-mode problems simply keep p = q = 0 and an
 * unused w_c.
 */

#include <complex>
#include <map>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "eme/errors.hpp"

namespace eme {

using cplx = std::complex<double>;

/* Hard cap: quartic potential times one commutator.  Exceeding it means the
 * computation left the order the theory works at. */
inline constexpr int degree_cap = 6;

struct freq_tuple {
    int dq = 0;
    int dc = 0;
    int dd = 0;

    friend auto operator<=>(const freq_tuple&, const freq_tuple&) = default;
    freq_tuple operator+(const freq_tuple& o) const { return {dq + o.dq, dc + o.dc, dd + o.dd}; }
    freq_tuple operator-() const { return {-dq, -dc, -dd}; }
    bool is_zero() const { return dq == 0 && dc == 0 && dd == 0; }
};

/* Numeric values of the base frequencies; every poly carries one so that
 * to_matrix(P, t, ...) can evaluate its coefficients. */
struct frequencies {
    double wq = 0.0;
    double wc = 0.0;
    double wd = 0.0;

    double value(const freq_tuple& k) const { return k.dq * wq + k.dc * wc + k.dd * wd; }
    friend bool operator==(const frequencies&, const frequencies&) = default;
};

/* Finite harmonic sum sum_k amp_k * exp(i * f_k * t), merged by exact tuple. */
struct harmonic_coeff {
    std::map<freq_tuple, cplx> terms;

    void add(const freq_tuple& k, cplx amp);
    cplx eval(const frequencies& fr, double t) const;
    harmonic_coeff conjugated() const;  // amp -> conj(amp), tuple -> -tuple
    bool empty() const { return terms.empty(); }
};

harmonic_coeff operator*(const harmonic_coeff& a, const harmonic_coeff& b);

/* a^dag^m a^n c^dag^p c^q, already in normal order. */
struct monomial {
    int m = 0;
    int n = 0;
    int p = 0;
    int q = 0;

    friend auto operator<=>(const monomial&, const monomial&) = default;
    int degree() const { return m + n + p + q; }
    bool number_conserving() const { return m == n && p == q; }
    bool is_identity() const { return degree() == 0; }
    monomial dagger() const { return {n, m, q, p}; }
};

struct truncation {
    int dim_q = 1;
    int dim_c = 1;  // one-mode problems use dim_c = 1

    int total() const { return dim_q * dim_c; }
};

class operator_poly {
  public:
    std::map<monomial, harmonic_coeff> terms;
    frequencies freq;

    operator_poly() = default;
    explicit operator_poly(frequencies fr) : freq(fr) {}

    /* accumulate amp * e^{i k.w t} * mono; merges and drops exact zeros */
    void add_term(const monomial& mono, const freq_tuple& k, cplx amp);
    void add_static(const monomial& mono, cplx amp) { add_term(mono, {}, amp); }

    bool is_static() const;        // no nonzero frequency tuple present
    int max_degree() const;
    double max_abs_amp() const;
    bool empty() const { return terms.empty(); }
};

operator_poly operator+(const operator_poly& a, const operator_poly& b);
operator_poly operator-(const operator_poly& a, const operator_poly& b);
operator_poly operator*(cplx s, const operator_poly& p);

/* Exact operator product brought back to normal order via
 * a^n a^dag^M = sum_k k! C(n,k) C(M,k) a^dag^(M-k) a^(n-k) per mode.
 * Throws degree_cap_exceeded if any term pair has combined degree > degree_cap. */
operator_poly normal_order_product(const operator_poly& a, const operator_poly& b);

operator_poly commutator(const operator_poly& a, const operator_poly& b);

operator_poly dagger(const operator_poly& p);

/* (S, N): S keeps the m=n, p=q monomials, N the rest; S + N = P. */
std::pair<operator_poly, operator_poly> split_number_conserving(const operator_poly& p);

/* d/dt: multiplies each harmonic term by i*f (numeric). */
operator_poly time_derivative(const operator_poly& p);

/* Drop terms with |amp| < rel_eps * max |amp| (numerical dust from exact
 * cancellations); stages call this at their boundaries, never mid-algebra. */
operator_poly prune(const operator_poly& p, double rel_eps = 1e-14);

/* Dense matrix on the truncated product basis |n_q> (x) |n_c>, index
 * n_q * dim_c + n_c.  Matrix elements that would leave the truncated space
 * are clipped (standard Fock truncation); a monomial exponent >= dim is an
 * error instead of a silent zero. */
Eigen::MatrixXcd to_matrix(const operator_poly& p, double t, const truncation& tr);

/* max_ij |A_ij - B_ij| over coefficient maps, relative to the larger poly;
 * used by tests and the golden comparisons */
double poly_distance(const operator_poly& a, const operator_poly& b);

bool is_hermitian(const operator_poly& p, double rel_tol = 1e-12);

/* Stable sorted plain-text form and its inverse (golden files). */
std::string serialize(const operator_poly& p);
operator_poly parse_poly(const std::string& text);

}  // namespace eme

#endif
