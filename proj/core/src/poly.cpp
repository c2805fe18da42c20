#include "eme/poly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace eme {

namespace {

/* exact zeros are dropped eagerly; near-zero dust is left to prune() */
inline bool is_exact_zero(cplx z) { return z.real() == 0.0 && z.imag() == 0.0; }

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

double binomial(int n, int k) {
    double b = 1.0;
    for (int j = 0; j < k; ++j) b = b * (n - j) / (j + 1);
    return b;
}

/* coefficient amplitude of a^dag^m a^n acting on |nu>:
 *   a^dag^m a^n |nu> = sqrt(nu!/(nu-n)!) * sqrt((nu-n+m)!/(nu-n)!) |nu-n+m> */
double ladder_amp(int nu, int n, int m) {
    double s = 1.0;
    for (int j = 0; j < n; ++j) s *= (nu - j);
    for (int j = 1; j <= m; ++j) s *= (nu - n + j);
    return std::sqrt(s);
}

frequencies merged_freq(const operator_poly& a, const operator_poly& b) {
    if (a.freq == b.freq) return a.freq;
    if (a.is_static()) return b.freq;
    if (b.is_static()) return a.freq;
    throw frequency_mismatch("cannot combine polynomials with different base frequencies");
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

void harmonic_coeff::add(const freq_tuple& k, cplx amp) {
    auto it = terms.find(k);
    if (it == terms.end()) {
        if (!is_exact_zero(amp)) terms.emplace(k, amp);
        return;
    }
    it->second += amp;
    if (is_exact_zero(it->second)) terms.erase(it);
}

cplx harmonic_coeff::eval(const frequencies& fr, double t) const {
    cplx v = 0.0;
    for (const auto& [k, amp] : terms) v += amp * std::polar(1.0, fr.value(k) * t);
    return v;
}

harmonic_coeff harmonic_coeff::conjugated() const {
    harmonic_coeff out;
    for (const auto& [k, amp] : terms) out.terms.emplace(-k, std::conj(amp));
    return out;
}

harmonic_coeff operator*(const harmonic_coeff& a, const harmonic_coeff& b) {
    harmonic_coeff out;
    for (const auto& [ka, va] : a.terms)
        for (const auto& [kb, vb] : b.terms) out.add(ka + kb, va * vb);
    return out;
}

void operator_poly::add_term(const monomial& mono, const freq_tuple& k, cplx amp) {
    if (mono.degree() > degree_cap)
        throw degree_cap_exceeded("monomial degree exceeds cap");
    auto& h = terms[mono];
    h.add(k, amp);
    if (h.empty()) terms.erase(mono);
}

bool operator_poly::is_static() const {
    for (const auto& [mono, h] : terms)
        for (const auto& [k, amp] : h.terms)
            if (!k.is_zero()) return false;
    return true;
}

int operator_poly::max_degree() const {
    int d = 0;
    for (const auto& [mono, h] : terms) d = std::max(d, mono.degree());
    return d;
}

double operator_poly::max_abs_amp() const {
    double a = 0.0;
    for (const auto& [mono, h] : terms)
        for (const auto& [k, amp] : h.terms) a = std::max(a, std::abs(amp));
    return a;
}

operator_poly operator+(const operator_poly& a, const operator_poly& b) {
    operator_poly out(merged_freq(a, b));
    out.terms = a.terms;
    for (const auto& [mono, h] : b.terms)
        for (const auto& [k, amp] : h.terms) out.add_term(mono, k, amp);
    return out;
}

operator_poly operator-(const operator_poly& a, const operator_poly& b) {
    operator_poly out(merged_freq(a, b));
    out.terms = a.terms;
    for (const auto& [mono, h] : b.terms)
        for (const auto& [k, amp] : h.terms) out.add_term(mono, k, -amp);
    return out;
}

operator_poly operator*(cplx s, const operator_poly& p) {
    operator_poly out(p.freq);
    if (is_exact_zero(s)) return out;
    for (const auto& [mono, h] : p.terms)
        for (const auto& [k, amp] : h.terms) out.add_term(mono, k, s * amp);
    return out;
}

namespace {

using term_map = std::map<monomial, harmonic_coeff>;

void accumulate(term_map& out, const monomial& mono, const freq_tuple& k, cplx amp, double sign) {
    auto& h = out[mono];
    h.add(k, sign * amp);
    if (h.empty()) out.erase(mono);
}

/* product without the degree cap; the cap is applied by the callers, which
 * lets commutators cancel their above-cap top terms before the check */
void accumulate_product(const operator_poly& a, const operator_poly& b, term_map& out,
                        double sign) {
    for (const auto& [ma, ha] : a.terms) {
        for (const auto& [mb, hb] : b.terms) {
            harmonic_coeff hp = ha * hb;
            /* a^n a^dag^M = sum_k k! C(n,k) C(M,k) a^dag^(M-k) a^(n-k), per mode */
            for (int k = 0; k <= std::min(ma.n, mb.m); ++k) {
                double wa = factorial(k) * binomial(ma.n, k) * binomial(mb.m, k);
                for (int l = 0; l <= std::min(ma.q, mb.p); ++l) {
                    double wc = factorial(l) * binomial(ma.q, l) * binomial(mb.p, l);
                    monomial mono{ma.m + mb.m - k, ma.n + mb.n - k,
                                  ma.p + mb.p - l, ma.q + mb.q - l};
                    for (const auto& [kt, amp] : hp.terms)
                        accumulate(out, mono, kt, amp * (wa * wc), sign);
                }
            }
        }
    }
}

operator_poly collect_with_cap(term_map&& raw, frequencies fr, double cancel_scale) {
    operator_poly out(fr);
    for (auto& [mono, h] : raw) {
        if (mono.degree() > degree_cap) {
            /* exact cancellations can leave round-off dust above the cap;
             * anything of real size up there is a genuine scope violation */
            double worst = 0.0;
            for (const auto& [k, amp] : h.terms) worst = std::max(worst, std::abs(amp));
            if (worst <= 1e-12 * cancel_scale) continue;
            throw degree_cap_exceeded("result exceeds degree cap");
        }
        for (const auto& [k, amp] : h.terms) out.add_term(mono, k, amp);
    }
    return out;
}

double product_scale(const operator_poly& a, const operator_poly& b) {
    return std::max(a.max_abs_amp() * b.max_abs_amp(), 1e-300);
}

}  // namespace

operator_poly normal_order_product(const operator_poly& a, const operator_poly& b) {
    frequencies fr = merged_freq(a, b);
    term_map raw;
    accumulate_product(a, b, raw, 1.0);
    return collect_with_cap(std::move(raw), fr, 0.0);
}

operator_poly commutator(const operator_poly& a, const operator_poly& b) {
    frequencies fr = merged_freq(a, b);
    term_map raw;
    accumulate_product(a, b, raw, 1.0);
    accumulate_product(b, a, raw, -1.0);
    return collect_with_cap(std::move(raw), fr, product_scale(a, b));
}

operator_poly dagger(const operator_poly& p) {
    operator_poly out(p.freq);
    for (const auto& [mono, h] : p.terms)
        for (const auto& [k, amp] : h.terms) out.add_term(mono.dagger(), -k, std::conj(amp));
    return out;
}

std::pair<operator_poly, operator_poly> split_number_conserving(const operator_poly& p) {
    operator_poly s(p.freq), n(p.freq);
    for (const auto& [mono, h] : p.terms) {
        (mono.number_conserving() ? s : n).terms.emplace(mono, h);
    }
    return {s, n};
}

operator_poly time_derivative(const operator_poly& p) {
    operator_poly out(p.freq);
    for (const auto& [mono, h] : p.terms)
        for (const auto& [k, amp] : h.terms)
            out.add_term(mono, k, amp * cplx(0.0, p.freq.value(k)));
    return out;
}

operator_poly prune(const operator_poly& p, double rel_eps) {
    double cut = rel_eps * p.max_abs_amp();
    operator_poly out(p.freq);
    for (const auto& [mono, h] : p.terms)
        for (const auto& [k, amp] : h.terms)
            if (std::abs(amp) > cut) out.add_term(mono, k, amp);
    return out;
}

Eigen::MatrixXcd to_matrix(const operator_poly& p, double t, const truncation& tr) {
    if (tr.dim_q < 1 || tr.dim_c < 1) throw truncation_too_small("dims must be >= 1");
    const int dim = tr.total();
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [mono, h] : p.terms) {
        if (mono.m >= tr.dim_q || mono.n >= tr.dim_q || mono.p >= tr.dim_c || mono.q >= tr.dim_c)
            throw truncation_too_small("monomial exponent at or above truncation dimension");
        const cplx c = h.eval(p.freq, t);
        if (is_exact_zero(c)) continue;
        for (int vq = mono.n; vq < tr.dim_q; ++vq) {
            const int rq = vq - mono.n + mono.m;
            if (rq >= tr.dim_q) continue;
            const double aq = ladder_amp(vq, mono.n, mono.m);
            for (int vc = mono.q; vc < tr.dim_c; ++vc) {
                const int rc = vc - mono.q + mono.p;
                if (rc >= tr.dim_c) continue;
                const double ac = ladder_amp(vc, mono.q, mono.p);
                mat(rq * tr.dim_c + rc, vq * tr.dim_c + vc) += c * (aq * ac);
            }
        }
    }
    return mat;
}

double poly_distance(const operator_poly& a, const operator_poly& b) {
    double scale = std::max(a.max_abs_amp(), b.max_abs_amp());
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    auto scan = [&](const operator_poly& x, const operator_poly& y) {
        for (const auto& [mono, h] : x.terms) {
            auto ity = y.terms.find(mono);
            for (const auto& [k, amp] : h.terms) {
                cplx other = 0.0;
                if (ity != y.terms.end()) {
                    auto itk = ity->second.terms.find(k);
                    if (itk != ity->second.terms.end()) other = itk->second;
                }
                worst = std::max(worst, std::abs(amp - other));
            }
        }
    };
    scan(a, b);
    scan(b, a);
    return worst / scale;
}

bool is_hermitian(const operator_poly& p, double rel_tol) {
    return poly_distance(p, dagger(p)) <= rel_tol;
}

std::string serialize(const operator_poly& p) {
    std::string out = "operator_poly v1\n";
    out += "freq ";
    format_double(out, p.freq.wq);
    out += " ";
    format_double(out, p.freq.wc);
    out += " ";
    format_double(out, p.freq.wd);
    out += "\n";
    for (const auto& [mono, h] : p.terms) {
        out += "mono " + std::to_string(mono.m) + " " + std::to_string(mono.n) + " " +
               std::to_string(mono.p) + " " + std::to_string(mono.q) + "\n";
        for (const auto& [k, amp] : h.terms) {
            out += "  " + std::to_string(k.dq) + " " + std::to_string(k.dc) + " " +
                   std::to_string(k.dd) + " ";
            format_double(out, amp.real());
            out += " ";
            format_double(out, amp.imag());
            out += "\n";
        }
    }
    out += "end\n";
    return out;
}

operator_poly parse_poly(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "operator_poly v1")
        throw error("parse_poly: bad header");
    operator_poly out;
    monomial cur{};
    bool have_mono = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "freq") {
            if (!(ls >> out.freq.wq >> out.freq.wc >> out.freq.wd))
                throw error("parse_poly: bad freq line");
        } else if (tag == "mono") {
            if (!(ls >> cur.m >> cur.n >> cur.p >> cur.q))
                throw error("parse_poly: bad mono line");
            have_mono = true;
        } else if (tag == "end") {
            return out;
        } else {
            if (!have_mono) throw error("parse_poly: term before mono");
            freq_tuple k;
            double re = 0.0, im = 0.0;
            k.dq = std::stoi(tag);
            if (!(ls >> k.dc >> k.dd >> re >> im)) throw error("parse_poly: bad term line");
            out.add_term(cur, k, cplx(re, im));
        }
    }
    throw error("parse_poly: missing end");
}

}  // namespace eme
