#pragma once

#include "angle.hpp"

#include <algorithm>
#include <optional>

namespace lamina {

// Counterclockwise arc from start to end.
struct Arc {
    Angle start, end;

    mpq_class length() const { return frac(end.value() - start.value()); }
    // closed membership
    bool contains(const Angle& t) const
    {
        mpq_class d = frac(t.value() - start.value());
        return d <= length();
    }
    std::string str() const { return "[" + start.str() + ", " + end.str() + ")"; }
};

struct AtomicMeasure {
    struct Atom {
        Angle angle;
        mpq_class weight;
        long depth;
    };
    std::vector<Atom> atoms;  // sorted by angle
    Angle generator;
    long cap;

    mpq_class mass() const
    {
        mpq_class s(0);
        for (auto& a : atoms) s += a.weight;
        return s;
    }
};

inline mpq_class atom_weight(long m)
{
    mpq_class w(1, 2);
    mpq_div_2exp(w.get_mpq_t(), w.get_mpq_t(), 2 * m);
    return w;
}

inline std::vector<Angle> preimages_of_angle(const Angle& t0, long n)
{
    std::vector<Angle> out;
    mpz_class N(1);
    mpz_mul_2exp(N.get_mpz_t(), N.get_mpz_t(), n);
    out.reserve(N.get_ui());
    mpq_class step = 1 / mpq_class(N);
    mpq_class base = t0.value() / mpq_class(N);
    for (mpz_class k = 0; k < N; ++k) out.emplace_back(base + step * mpq_class(k));
    return out;  // already increasing since t0 is in [0,1)
}

inline mpq_class mu_weight(const Angle& z, const Angle& t0, long M)
{
    mpq_class w(0);
    mpq_class x = z.value();
    for (long m = 0; m <= M; ++m) {
        if (frac(x) == t0.value()) w += atom_weight(m);
        x *= 2;
    }
    return w;
}

inline AtomicMeasure atomic_measure(const Angle& t0, long M)
{
    AtomicMeasure mu{{}, t0, M};
    for (long m = 0; m <= M; ++m)
        for (auto& a : preimages_of_angle(t0, m)) mu.atoms.push_back({a, atom_weight(m), m});
    std::sort(mu.atoms.begin(), mu.atoms.end(),
              [](auto& a, auto& b) { return a.angle < b.angle; });
    // coincident atoms (periodic generator) are merged
    std::vector<AtomicMeasure::Atom> merged;
    for (auto& a : mu.atoms) {
        if (!merged.empty() && merged.back().angle == a.angle) {
            merged.back().weight += a.weight;
            merged.back().depth = std::min(merged.back().depth, a.depth);
        } else {
            merged.push_back(a);
        }
    }
    mu.atoms = std::move(merged);
    return mu;
}

inline void require_nonperiodic(const Angle& t0)
{
    if (is_periodic(t0)) throw domain_error("generator " + t0.str() + " is periodic under doubling");
}

inline Arc sigma0_arc(const Angle& t0)
{
    require_nonperiodic(t0);
    Angle x = x0_digits(t0);
    return {x, x + mpq_class(1, 2)};
}

inline std::vector<mpq_class> sigma_lengths_periodic(long p)
{
    if (p < 1) throw domain_error("period must be positive");
    mpz_class four_p;
    mpz_ui_pow_ui(four_p.get_mpz_t(), 4, p);
    mpq_class den(2 * (four_p - 1));
    std::vector<mpq_class> out;
    mpq_class f(1);
    for (long i = 1; i <= p; ++i) {
        f *= 4;
        out.push_back(f / den);
    }
    return out;
}

// #{k in [0,2^m) : (t0+k)/2^m < t}
inline mpz_class count_below(const Angle& t, const Angle& t0, long m)
{
    mpq_class x = t.value();
    mpq_mul_2exp(x.get_mpq_t(), x.get_mpq_t(), m);
    x -= t0.value();
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return c;
}

// mu_M([0,t)) for the depth-M truncation
inline mpq_class mass_below_trunc(const Angle& t, const Angle& t0, long M)
{
    mpq_class s(0);
    for (long m = 0; m <= M; ++m) {
        mpq_class c(count_below(t, t0, m));
        mpq_div_2exp(c.get_mpq_t(), c.get_mpq_t(), 2 * m + 1);
        s += c;
    }
    return s;
}

// Exact mu([0,t)) as a bit sequence: bit 2m+1 is [frac(2^m t) > t0], bit 2m is t[m].
inline BitSeq mass_below_bits(const Angle& t, const Angle& t0)
{
    require_nonperiodic(t0);
    mpz_class q = t.den();
    long k = (long)detail::twos(q);
    mpz_class r = q >> k;
    long T = r == 1 ? 1 : (long)detail::order2(r);
    BitSeq digits = digit_stream(t);
    // frac(2^m t) > t0  <=>  (p 2^m mod q) * den0 > num0 * q
    mpz_class P = t.num(), n0 = t0.num(), d0 = t0.den();
    mpz_class x = P;
    auto above = [&](const mpz_class& xm) { return xm * d0 > n0 * q; };
    std::string pre, per;
    pre.push_back(above(x) ? '1' : '0');
    for (long m = 1; m <= k + T; ++m) {
        x *= 2;
        if (x >= q) x -= q;
        std::string& dst = m <= k ? pre : per;
        dst.push_back('0' + digits.bit(m));
        dst.push_back(above(x) ? '1' : '0');
    }
    return make_bits(pre, per);
}

inline mpq_class mass_below(const Angle& t, const Angle& t0) { return mass_below_bits(t, t0).value(); }

struct ArcEnclosure {
    RationalInterval start;  // end = start + length
    mpq_class length;

    RationalInterval end() const { return {start.lo + length, start.hi + length}; }
};

// h-preimage of the point z from the depth-M truncation. h(0) = 0 because 0 is
// never an atom of a non-periodic generator.
inline ArcEnclosure h_arc(const Angle& z, const Angle& t0, long M)
{
    require_nonperiodic(t0);
    mpq_class lo = mass_below_trunc(z, t0, M);
    return {{lo, lo + pow2q(-(M + 1))}, mu_weight(z, t0, M)};
}

// exact h-preimage; the weight is exact for any cap beyond the atom's depth
inline Arc h_arc_exact(const Angle& z, const Angle& t0)
{
    require_nonperiodic(t0);
    mpq_class lo = mass_below(z, t0);
    // z is an atom iff some 2^m z == t0; the depth is bounded by z's preperiod
    auto ot = orbit_type(z);
    mpq_class w = mu_weight(z, t0, ot.preperiod + ot.period + 1);
    return {Angle(lo), Angle(lo + w)};
}

// ---- semiconjugacy h(4u) = 2 h(u), checked through the truncated measure ----

namespace detail {

// F(t) = mu_M([0,t)) + 2^-(M+1) t : the truncation with its tail spread uniformly,
// a probability distribution whose inverse approximates h.
inline mpq_class cdf_tail(const Angle& t, const Angle& t0, long M)
{
    return mass_below_trunc(t, t0, M) + pow2q(-(M + 1)) * t.value();
}

inline long atom_depth(const Angle& t, const Angle& t0, long M)
{
    mpq_class x = t.value();
    for (long m = 0; m <= M; ++m) {
        if (frac(x) == t0.value()) return m;
        x *= 2;
    }
    return -1;
}

}  // namespace detail

struct HPoint {
    Angle t;                 // approximate h(u)
    RationalInterval fiber;  // u-interval mapped to t by the approximation
};

inline HPoint h_approx(const mpq_class& u, const Angle& t0, long M)
{
    using detail::cdf_tail;
    // bisection over dyadic cells [a, a + 2^-D)
    long D = M + 12;
    mpq_class a(0);
    for (long d = 1; d <= D; ++d) {
        Angle mid(a + pow2q(-d));
        if (cdf_tail(mid, t0, M) <= u) a = mid.value();
    }
    mpq_class b = a + pow2q(-D);
    // atoms inside the final cell
    std::vector<std::pair<mpq_class, long>> at;
    for (long m = 0; m <= M; ++m) {
        mpq_class x = a, y = b;
        mpq_mul_2exp(x.get_mpq_t(), x.get_mpq_t(), m);
        mpq_mul_2exp(y.get_mpq_t(), y.get_mpq_t(), m);
        mpz_class k0, k1;
        mpq_class xs = x - t0.value(), ys = y - t0.value();
        mpz_cdiv_q(k0.get_mpz_t(), xs.get_num_mpz_t(), xs.get_den_mpz_t());
        mpz_cdiv_q(k1.get_mpz_t(), ys.get_num_mpz_t(), ys.get_den_mpz_t());
        for (mpz_class k = k0; k < k1; ++k) {
            mpq_class s = (t0.value() + mpq_class(k)) / pow2q(m);
            at.push_back({s, m});
        }
    }
    std::sort(at.begin(), at.end());
    for (auto& [s, m] : at) {
        Angle sa(s);
        mpq_class f = cdf_tail(sa, t0, M);
        mpq_class w = mu_weight(sa, t0, M);
        if (u < f) break;
        if (u <= f + w) return {sa, {f, f + w}};
    }
    mpq_class fa = cdf_tail(Angle(a), t0, M);
    return {Angle(a), {fa, fa}};
}

struct SemiconjugacyReport {
    mpq_class max_defect;
    std::vector<std::pair<mpq_class, mpq_class>> samples;  // (u, defect)
    bool skipped_shadow_interior = false;
};

inline mpq_class circle_dist(const mpq_class& x, const RationalInterval& I)
{
    if (frac(x - I.lo) <= I.hi - I.lo) return 0;
    return std::min(frac(I.lo - x), frac(x - I.hi));
}

// For each u, 4u must lie in the fiber over 2h(u). Defect is measured in u-space.
inline SemiconjugacyReport semiconjugacy_check(const Angle& t0, const std::vector<Angle>& samples, long M)
{
    require_nonperiodic(t0);
    SemiconjugacyReport rep;
    rep.max_defect = 0;
    Arc s0 = sigma0_arc(t0);
    for (auto& u : samples) {
        if (s0.contains(u) && !(u == s0.start) && !(u == s0.end)) {
            rep.skipped_shadow_interior = true;
            continue;
        }
        HPoint p = h_approx(u.value(), t0, M);
        Angle img = doubled(p.t);
        mpq_class f = detail::cdf_tail(img, t0, M);
        mpq_class d = circle_dist(frac(4 * u.value()), {f, f + mu_weight(img, t0, M)});
        rep.samples.push_back({u.value(), d});
        if (d > rep.max_defect) rep.max_defect = d;
    }
    return rep;
}

}  // namespace lamina
