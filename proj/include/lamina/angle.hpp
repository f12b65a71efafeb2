#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lamina {

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A point of R/Z kept as an exact reduced fraction in [0,1).
class Angle {
public:
    Angle() : q_(0) {}
    explicit Angle(const mpq_class& x) : q_(x) { reduce(); }
    Angle(long p, long q) : q_(p, q) { reduce(); }

    static Angle parse(const std::string& s)
    {
        auto slash = s.find('/');
        mpq_class v;
        try {
            if (slash == std::string::npos) {
                v = mpq_class(mpz_class(s));
            } else {
                mpz_class p(s.substr(0, slash)), q(s.substr(slash + 1));
                if (q == 0) throw domain_error("zero denominator in angle '" + s + "'");
                v = mpq_class(p, q);
            }
        } catch (const std::invalid_argument&) {
            throw domain_error("cannot parse angle '" + s + "'");
        }
        return Angle(v);
    }

    const mpq_class& value() const { return q_; }
    mpz_class num() const { return q_.get_num(); }
    mpz_class den() const { return q_.get_den(); }
    double to_double() const { return q_.get_d(); }

    std::string str() const
    {
        return q_.get_num().get_str() + "/" + q_.get_den().get_str();
    }

    friend bool operator==(const Angle& a, const Angle& b) { return a.q_ == b.q_; }
    friend bool operator<(const Angle& a, const Angle& b) { return a.q_ < b.q_; }
    friend bool operator<=(const Angle& a, const Angle& b) { return a.q_ <= b.q_; }
    friend bool operator>(const Angle& a, const Angle& b) { return a.q_ > b.q_; }
    friend Angle operator+(const Angle& a, const mpq_class& d) { return Angle(a.q_ + d); }
    friend Angle operator-(const Angle& a, const mpq_class& d) { return Angle(a.q_ - d); }
    Angle operator-() const { return Angle(-q_); }
    Angle times(long k) const { return Angle(q_ * k); }

private:
    void reduce()
    {
        q_.canonicalize();
        mpz_class fl;
        mpz_fdiv_q(fl.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
        q_ -= fl;
    }
    mpq_class q_;
};

// frac of an arbitrary rational
inline mpq_class frac(const mpq_class& x)
{
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return x - fl;
}

inline mpz_class floor_q(const mpq_class& x)
{
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return fl;
}

inline mpq_class pow2q(long e)
{
    mpq_class r(1);
    if (e >= 0) mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), e);
    else mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), -e);
    return r;
}

inline Angle doubled(const Angle& t) { return Angle(t.value() * 2); }

inline int binary_digit(const Angle& t, long m)
{
    if (m < 1) throw domain_error("digit index must be >= 1");
    mpz_class n = t.num();
    mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), m);
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), n.get_mpz_t(), t.den().get_mpz_t());
    return mpz_tstbit(fl.get_mpz_t(), 0);
}

// Eventually periodic bit sequence b1 b2 ... = pre (per)^inf.
// canonical(): period primitive, preperiod as short as possible.
struct BitSeq {
    std::string pre;
    std::string per = "0";

    int bit(long m) const  // 1-based
    {
        if (m <= (long)pre.size()) return pre[m - 1] - '0';
        long k = (m - 1 - (long)pre.size()) % (long)per.size();
        return per[k] - '0';
    }

    BitSeq& canonical()
    {
        if (per.empty()) throw domain_error("empty period");
        size_t n = per.size();
        for (size_t d = 1; d <= n; ++d) {
            if (n % d) continue;
            bool ok = true;
            for (size_t i = d; i < n && ok; ++i) ok = per[i] == per[i - d];
            if (ok) { per.resize(d); break; }
        }
        while (!pre.empty() && pre.back() == per.back()) {
            pre.pop_back();
            per = per.back() + per.substr(0, per.size() - 1);
        }
        return *this;
    }

    BitSeq shifted(long k = 1) const
    {
        BitSeq r = *this;
        while (k > 0) {
            if (!r.pre.empty()) {
                long d = std::min<long>(k, (long)r.pre.size());
                r.pre.erase(0, d);
                k -= d;
            } else {
                long d = k % (long)r.per.size();
                r.per = r.per.substr(d) + r.per.substr(0, d);
                k = 0;
            }
        }
        return r.canonical();
    }

    mpq_class value() const
    {
        mpz_class a(0), b(0);
        if (!pre.empty()) a.set_str(pre, 2);
        b.set_str(per, 2);
        mpz_class den(1);
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), per.size());
        den -= 1;
        mpq_class v = mpq_class(a) + mpq_class(b, den);
        v.canonicalize();
        mpq_div_2exp(v.get_mpq_t(), v.get_mpq_t(), pre.size());
        return v;
    }

    std::string str() const { return pre + "(" + per + ")"; }

    friend bool operator==(const BitSeq& x, const BitSeq& y)
    {
        return x.pre == y.pre && x.per == y.per;
    }
    friend bool operator<(const BitSeq& x, const BitSeq& y)
    {
        return std::pair(x.pre, x.per) < std::pair(y.pre, y.per);
    }
};

inline BitSeq make_bits(std::string pre, std::string per)
{
    BitSeq b{std::move(pre), std::move(per)};
    return b.canonical();
}

// The (1) tail is rewritten as a carry so each rational has exactly one stream.
inline BitSeq to_digit_stream(BitSeq b)
{
    b.canonical();
    if (b.per != "1") return b;
    auto k = b.pre.find_last_of('0');
    if (k == std::string::npos) return BitSeq{"", "0"};
    std::string p = b.pre.substr(0, k) + "1";
    return make_bits(p, "0");
}

namespace detail {

inline unsigned long twos(const mpz_class& q) { return mpz_scan1(q.get_mpz_t(), 0); }

inline bool fits_u62(const mpz_class& q) { return mpz_sizeinbase(q.get_mpz_t(), 2) <= 62; }

// multiplicative order of 2 modulo odd r > 1
inline unsigned long order2(const mpz_class& r)
{
    if (fits_u62(r)) {
        uint64_t m = r.get_ui(), x = 2 % m;
        unsigned long k = 1;
        while (x != 1) {
            x = (uint64_t)(((unsigned __int128)x * 2) % m);
            ++k;
        }
        return k;
    }
    mpz_class x(2);
    x %= r;
    unsigned long k = 1;
    while (x != 1) {
        x *= 2;
        if (x >= r) x -= r;
        ++k;
    }
    return k;
}

inline std::string padded_bits(const mpz_class& v, size_t width)
{
    std::string s = v == 0 ? std::string() : v.get_str(2);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

}  // namespace detail

inline BitSeq digit_stream(const Angle& t)
{
    mpz_class q = t.den();
    unsigned long k = detail::twos(q);
    mpz_class r = q >> k;
    mpz_class p = t.num();
    // integer part of 2^k t is the preperiod, the odd part gives the period
    mpz_class hi = p / r;      // floor(2^k t)
    mpz_class lo = p % r;      // frac(2^k t) = lo / r
    std::string pre = detail::padded_bits(hi, k);
    if (r == 1) return make_bits(pre, "0");
    unsigned long T = detail::order2(r);
    mpz_class full(1);
    mpz_mul_2exp(full.get_mpz_t(), full.get_mpz_t(), T);
    full -= 1;
    mpz_class word = lo * (full / r);
    return make_bits(pre, detail::padded_bits(word, T));
}

enum class OrbitTag { dyadic, periodic, preperiodic };

struct OrbitType {
    OrbitTag tag;
    long preperiod;
    long period;
};

inline const char* tag_name(OrbitTag t)
{
    switch (t) {
    case OrbitTag::dyadic: return "dyadic";
    case OrbitTag::periodic: return "periodic";
    default: return "preperiodic";
    }
}

// 0 counts as periodic (a fixed point), not dyadic.
inline OrbitType orbit_type(const Angle& t)
{
    BitSeq d = digit_stream(t);
    mpz_class q = t.den();
    if (q == 1) return {OrbitTag::periodic, 0, 1};
    if (mpz_popcount(q.get_mpz_t()) == 1) return {OrbitTag::dyadic, (long)d.pre.size(), 1};
    if (mpz_odd_p(q.get_mpz_t())) return {OrbitTag::periodic, 0, (long)d.per.size()};
    return {OrbitTag::preperiodic, (long)d.pre.size(), (long)d.per.size()};
}

inline bool is_periodic(const Angle& t) { return mpz_odd_p(t.den().get_mpz_t()); }

// 1 iff frac(2^m t) >= t
inline int nu(const Angle& t, long m)
{
    mpq_class y = t.value();
    mpq_mul_2exp(y.get_mpq_t(), y.get_mpq_t(), m);
    return frac(y) >= t.value() ? 1 : 0;
}

struct RationalInterval {
    mpq_class lo, hi;
    bool contains(const mpq_class& x) const { return lo <= x && x <= hi; }
};

inline RationalInterval x0_series(const Angle& t0, long M)
{
    if (t0.value() == 0) throw domain_error("x0 needs theta0 in (0,1)");
    mpq_class s(0);
    for (long m = 1; m <= M; ++m) {
        mpq_class c = t0.value() * (pow2q(m) - 1);
        mpq_class term(floor_q(c) + 1);
        mpq_div_2exp(term.get_mpq_t(), term.get_mpq_t(), 2 * m + 1);
        s += term;
    }
    return {s, s + pow2q(-(M + 1))};
}

namespace detail {

// Orbit data of theta0 = p / (2^k r): preperiod k, period T (1 if r == 1), the digit
// stream and the nu bits for m = 1 .. k+T.
struct OrbitBits {
    BitSeq digits;
    long k = 0, T = 1;
    std::string nu;  // nu[m-1] for m = 1..k+T
};

inline OrbitBits orbit_bits(const Angle& t0)
{
    OrbitBits ob;
    ob.digits = digit_stream(t0);
    mpz_class q = t0.den();
    ob.k = (long)twos(q);
    mpz_class r = q >> ob.k;
    ob.T = r == 1 ? 1 : (long)order2(r);
    long n = ob.k + ob.T;
    ob.nu.resize(n);
    if (fits_u62(q)) {
        uint64_t Q = q.get_ui(), P = t0.num().get_ui(), x = P;
        for (long m = 1; m <= n; ++m) {
            x = (uint64_t)(((unsigned __int128)x * 2) % Q);
            ob.nu[m - 1] = x >= P ? '1' : '0';
        }
    } else {
        mpz_class P = t0.num(), x = P;
        for (long m = 1; m <= n; ++m) {
            x *= 2;
            if (x >= q) x -= q;
            ob.nu[m - 1] = x >= P ? '1' : '0';
        }
    }
    return ob;
}

}  // namespace detail

// x0 from its digits: bit 1 is 0, then (theta0[m], nu_m) for m >= 1.
inline BitSeq x0_bits(const Angle& t0)
{
    if (t0.value() == 0 || is_periodic(t0))
        throw domain_error("x0 is defined here only for non-periodic theta0 in (0,1)");
    auto ob = detail::orbit_bits(t0);
    std::string pre = "0", per;
    pre.reserve(2 * ob.k + 1);
    per.reserve(2 * ob.T);
    for (long m = 1; m <= ob.k + ob.T; ++m) {
        std::string& dst = m <= ob.k ? pre : per;
        dst.push_back('0' + ob.digits.bit(m));
        dst.push_back(ob.nu[m - 1]);
    }
    return make_bits(pre, per);
}

inline Angle x0_digits(const Angle& t0) { return Angle(x0_bits(t0).value()); }

// y0 = 1/3 + sum theta0[m] / 4^m
inline Angle y0_from_theta(const Angle& t0)
{
    BitSeq d = digit_stream(t0);
    BitSeq spread;
    for (char c : d.pre) { spread.pre += '0'; spread.pre += c; }
    spread.per.clear();
    for (char c : d.per) { spread.per += '0'; spread.per += c; }
    spread.canonical();
    return Angle(mpq_class(1, 3) + spread.value());
}

}  // namespace lamina
