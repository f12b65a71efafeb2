#pragma once

#include "lamination.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace lamina {

// Binary address e1 e2 e3 ... of a point of the Julia set. The leading bit is
// split off for printing ("1|10(01)"); a bare body (no leading bit) is used for
// the critical tail.
struct Address {
    std::optional<int> leading;
    BitSeq body;

    static Address from_seq(const BitSeq& s)
    {
        BitSeq c = s;
        c.canonical();
        return {c.bit(1), c.shifted(1)};
    }

    BitSeq seq() const
    {
        if (!leading) return body;
        BitSeq s = body;
        s.pre.insert(s.pre.begin(), char('0' + *leading));
        return s.canonical();
    }
    int bit(long k) const { return seq().bit(k); }

    std::string str() const
    {
        if (!leading) return body.str();
        return std::string(1, char('0' + *leading)) + "|" + body.str();
    }

    // "b|pre(per)", or a full sequence "pre(per)"
    static Address parse(const std::string& text)
    {
        std::string t = text;
        std::optional<int> lead;
        auto bar = t.find('|');
        if (bar != std::string::npos) {
            if (bar != 1 || (t[0] != '0' && t[0] != '1')) throw domain_error("bad address: " + text);
            lead = t[0] - '0';
            t = t.substr(2);
        }
        auto l = t.find('('), r = t.find(')');
        std::string pre, per;
        if (l == std::string::npos) {
            pre = t;
            per = "0";
        } else {
            if (r != t.size() - 1 || r <= l + 1) throw domain_error("bad address: " + text);
            pre = t.substr(0, l);
            per = t.substr(l + 1, r - l - 1);
        }
        for (char c : pre + per)
            if (c != '0' && c != '1') throw domain_error("bad address: " + text);
        BitSeq b = make_bits(pre, per);
        if (lead) return {lead, b};
        return from_seq(b);
    }

    friend bool operator==(const Address& x, const Address& y) { return x.seq() == y.seq(); }
    friend bool operator!=(const Address& x, const Address& y) { return !(x == y); }
};

inline Address shift(const Address& x) { return Address::from_seq(x.seq().shifted(1)); }

// Body d of the critical addresses: d_{2m-1} = theta0[m], d_{2m} = 1 - nu_m(theta0).
inline BitSeq critical_body(const Angle& t0)
{
    if (is_periodic(t0)) throw domain_error("generator " + t0.str() + " is periodic under doubling");
    auto ob = detail::orbit_bits(t0);
    // digits and nu_m both repeat with period T after the first k terms
    std::string pre, per;
    for (long m = 1; m <= ob.k + ob.T; ++m) {
        std::string& dst = m <= ob.k ? pre : per;
        dst.push_back(char('0' + ob.digits.bit(m)));
        dst.push_back(ob.nu[m - 1] == '1' ? '0' : '1');
    }
    return make_bits(pre, per);
}

// Same digits with the indexing of the published statement: e_{2m} = theta0[m],
// e_{2m+1} = 1 - nu_m, m >= 0. Kept for comparison only.
inline BitSeq critical_body_alt(const Angle& t0)
{
    BitSeq d = critical_body(t0);
    d.pre.insert(d.pre.begin(), char('0' + 1 - nu(t0, 0)));
    return d.canonical();
}

inline std::pair<Address, Address> critical_address(const Angle& t0)
{
    BitSeq d = critical_body(t0);
    return {Address{0, d}, Address{1, d}};
}

// flip every odd position: theta in binary <-> address
inline BitSeq flip_odd(const BitSeq& s)
{
    long P = (long)s.pre.size(), T = (long)s.per.size();
    P += P % 2;
    if (T % 2) T *= 2;
    std::string pre, per;
    for (long k = 1; k <= P + T; ++k) {
        int b = s.bit(k) ^ (k % 2);
        (k <= P ? pre : per).push_back(char('0' + b));
    }
    return make_bits(pre, per);
}

inline Address angle_to_address(const Angle& t) { return Address::from_seq(flip_odd(digit_stream(t))); }

inline Angle address_to_angle(const Address& a) { return Angle(flip_odd(a.seq()).value()); }

// ---- the equivalence relation ----

namespace detail {

inline const BitSeq& alt01()
{
    static const BitSeq s = make_bits("", "01");
    return s;
}
inline const BitSeq& alt10()
{
    static const BitSeq s = make_bits("", "10");
    return s;
}

inline BitSeq prefix_then(const BitSeq& x, long p, int b, const BitSeq& tail)
{
    BitSeq r = tail;
    std::string w;
    for (long k = 1; k <= p; ++k) w.push_back(char('0' + x.bit(k)));
    w.push_back(char('0' + b));
    r.pre = w + r.pre;
    return r.canonical();
}

// direct neighbours of x under the three rules; crit may be null (circle rules only)
inline std::vector<BitSeq> neighbours(const BitSeq& x, const BitSeq* crit)
{
    std::vector<BitSeq> out;
    if (x == alt01()) out.push_back(alt10());
    if (x == alt10()) out.push_back(alt01());
    long span = (long)x.pre.size() + 2 * (long)x.per.size() + 4;
    for (long p = 0; p <= span; ++p) {
        int b = x.bit(p + 1);
        BitSeq tail = x.shifted(p + 1);
        if (b == 0 && tail == alt01()) out.push_back(prefix_then(x, p, 1, alt10()));
        if (b == 1 && tail == alt10()) out.push_back(prefix_then(x, p, 0, alt01()));
        if (crit && tail == *crit) out.push_back(prefix_then(x, p, 1 - b, *crit));
    }
    return out;
}

inline std::set<BitSeq> closure(const BitSeq& x, const BitSeq* crit, size_t cap = 256)
{
    std::set<BitSeq> seen{x};
    std::deque<BitSeq> q{x};
    while (!q.empty()) {
        BitSeq c = q.front();
        q.pop_front();
        for (auto& n : neighbours(c, crit)) {
            if (seen.insert(n).second) {
                if (seen.size() > cap) throw numeric_failure("equivalence class exceeds " + std::to_string(cap));
                q.push_back(n);
            }
        }
    }
    return seen;
}

}  // namespace detail

// x ~ y under the rules generated by theta0, closed transitively. Classes are
// finite, so the search is exact on eventually periodic input.
inline bool addr_equivalent(const Address& x, const Address& y, const Angle& t0)
{
    BitSeq a = x.seq(), b = y.seq();
    if (a == b) return true;
    BitSeq d = critical_body(t0);
    return detail::closure(a, &d).count(b) > 0;
}

// only the two circle-representation rules
inline bool circle_equivalent(const Address& x, const Address& y)
{
    BitSeq a = x.seq(), b = y.seq();
    if (a == b) return true;
    return detail::closure(a, nullptr).count(b) > 0;
}

inline std::vector<Address> equivalence_class(const Address& x, const Angle& t0)
{
    BitSeq d = critical_body(t0);
    std::vector<Address> out;
    for (auto& s : detail::closure(x.seq(), &d)) out.push_back(Address::from_seq(s));
    return out;
}

// ---- cross-check against the two-sided lamination ----

struct LeafMatchReport {
    long leaves_checked = 0;
    long pairs_checked = 0;
    std::vector<std::string> mismatches;
    bool ok() const { return mismatches.empty(); }
};

inline LeafMatchReport leaf_addresses_match(const Angle& t0, long depth)
{
    LeafMatchReport rep;
    if (depth < 0) return rep;
    BitSeq d = critical_body(t0);
    Lamination L = build_2L(t0, depth);

    for (auto& l : L.leaves()) {
        ++rep.leaves_checked;
        BitSeq A = angle_to_address(l.a).seq(), B = angle_to_address(l.b).seq();
        long k = 0;
        while (A.bit(k + 1) == B.bit(k + 1) && k < depth + 2) ++k;
        bool direct = A.bit(k + 1) != B.bit(k + 1) && A.shifted(k + 1) == d && B.shifted(k + 1) == d;
        if (direct && k != l.depth)
            rep.mismatches.push_back(l.str() + ": critical pair at shift " + std::to_string(k) + ", depth " +
                                     std::to_string(l.depth));
        else if (!direct && !detail::closure(A, &d).count(B))
            rep.mismatches.push_back(l.str() + ": endpoints not equivalent");
    }

    // every pair w0d / w1d with |w| <= depth is a leaf of matching side and depth
    for (long n = 0; n <= depth; ++n) {
        Side s = n % 2 == 0 ? Side::inside : Side::outside;
        for (unsigned long w = 0; w < (1UL << n); ++w) {
            ++rep.pairs_checked;
            std::string word;
            for (long i = n - 1; i >= 0; --i) word.push_back(char('0' + ((w >> i) & 1)));
            BitSeq X = d, Y = d;
            X.pre = word + "0" + X.pre;
            Y.pre = word + "1" + Y.pre;
            Angle x = Angle(flip_odd(X.canonical()).value()), y = Angle(flip_odd(Y.canonical()).value());
            if (x == y) continue;  // same point of the circle
            const Leaf* f = L.find(s, x, y);
            if (!f)
                rep.mismatches.push_back("missing leaf for w=" + word + ": " + x.str() + " " + y.str());
            else if (f->depth != n)
                rep.mismatches.push_back("depth of leaf for w=" + word + " is " + std::to_string(f->depth));
        }
    }
    return rep;
}

inline std::vector<std::string> cells_at_depth(long n)
{
    if (n < 0 || n > 24) throw domain_error("cell depth must be in [0,24]");
    std::vector<std::string> out;
    out.reserve(size_t(1) << n);
    for (unsigned long w = 0; w < (1UL << n); ++w) {
        std::string s;
        for (long i = n - 1; i >= 0; --i) s.push_back(char('0' + ((w >> i) & 1)));
        out.push_back(std::move(s));
    }
    return out;
}

// ---- regulated rays ----

enum class RayBase { zero, infinity };

struct RegulatedRaySymbol {
    RayBase base = RayBase::zero;
    std::vector<Angle> angles;  // finite part r1, r2, ...
    std::vector<Angle> cycle;   // optional periodic tail
    bool segment = false;       // the image also contains the segment from 0 to infinity

    bool empty() const { return angles.empty() && cycle.empty(); }
    Angle first() const { return angles.empty() ? cycle.front() : angles.front(); }

    // shortest cycle, and no finite angle that could be folded into it
    RegulatedRaySymbol& normalize()
    {
        size_t n = cycle.size();
        for (size_t d = 1; d < n; ++d) {
            if (n % d) continue;
            bool ok = true;
            for (size_t i = d; i < n && ok; ++i) ok = cycle[i] == cycle[i - d];
            if (ok) { cycle.resize(d); break; }
        }
        while (!cycle.empty() && !angles.empty() && angles.back() == cycle.back()) {
            angles.pop_back();
            std::rotate(cycle.rbegin(), cycle.rbegin() + 1, cycle.rend());
        }
        return *this;
    }

    RegulatedRaySymbol tail() const
    {
        RegulatedRaySymbol r = *this;
        if (!r.angles.empty())
            r.angles.erase(r.angles.begin());
        else
            std::rotate(r.cycle.begin(), r.cycle.begin() + 1, r.cycle.end());
        return r.normalize();
    }

    RegulatedRaySymbol with_first(const Angle& a) const
    {
        RegulatedRaySymbol r = *this;
        r.angles.insert(r.angles.begin(), a);
        return r.normalize();
    }

    void validate() const
    {
        for (auto* v : {&angles, &cycle})
            for (auto& a : *v) {
                if (a.value() == 0) throw domain_error("regulated ray angles must be nonzero");
                if (mpz_popcount(a.den().get_mpz_t()) != 1) throw domain_error("regulated ray angle " + a.str() + " is not dyadic");
            }
    }

    std::string str() const
    {
        std::string s = base == RayBase::zero ? "G(0;" : "G(inf;";
        for (size_t i = 0; i < angles.size(); ++i) s += (i ? "," : "") + angles[i].str();
        if (!cycle.empty()) {
            s += angles.empty() ? "[" : ",[";
            for (size_t i = 0; i < cycle.size(); ++i) s += (i ? "," : "") + cycle[i].str();
            s += "]";
        }
        s += ")";
        if (segment) s += "+seg";
        return s;
    }

    // "G(inf;1/2,1/4)", "G(0;1/4,[1/2])", optional "+seg"
    static RegulatedRaySymbol parse(const std::string& text)
    {
        RegulatedRaySymbol g;
        std::string t = text;
        if (t.size() > 4 && t.substr(t.size() - 4) == "+seg") {
            g.segment = true;
            t.resize(t.size() - 4);
        }
        if (t.rfind("G(0;", 0) == 0) {
            g.base = RayBase::zero;
            t = t.substr(4);
        } else if (t.rfind("G(inf;", 0) == 0) {
            g.base = RayBase::infinity;
            t = t.substr(6);
        } else {
            throw domain_error("bad regulated ray: " + text);
        }
        if (t.empty() || t.back() != ')') throw domain_error("bad regulated ray: " + text);
        t.pop_back();
        bool in_cycle = false;
        size_t i = 0;
        while (i < t.size()) {
            if (t[i] == '[') { in_cycle = true; ++i; }
            size_t j = t.find_first_of(",]", i);
            std::string tok = t.substr(i, j == std::string::npos ? std::string::npos : j - i);
            if (!tok.empty()) (in_cycle ? g.cycle : g.angles).push_back(Angle::parse(tok));
            if (j == std::string::npos) break;
            if (t[j] == ']') {
                in_cycle = false;
                ++j;
            }
            i = j + 1;
        }
        g.validate();
        return g.normalize();
    }

    friend bool operator==(const RegulatedRaySymbol& x, const RegulatedRaySymbol& y)
    {
        return x.base == y.base && x.angles == y.angles && x.cycle == y.cycle && x.segment == y.segment;
    }
};

inline RegulatedRaySymbol regulated_ray_image(const RegulatedRaySymbol& g)
{
    if (g.empty()) throw domain_error("regulated ray without angles");
    g.validate();
    if (g.base == RayBase::zero) {
        RegulatedRaySymbol r = g;
        r.base = RayBase::infinity;
        return r;
    }
    Angle r1 = g.first();
    if (r1 == Angle(1, 2)) {
        RegulatedRaySymbol r = g.tail();
        r.segment = true;
        return r;
    }
    RegulatedRaySymbol r = g.tail().with_first(doubled(r1));
    r.base = RayBase::zero;
    return r;
}

inline std::pair<RegulatedRaySymbol, RegulatedRaySymbol> regulated_ray_preimage(const RegulatedRaySymbol& g)
{
    if (g.base != RayBase::zero) throw domain_error("preimage is defined for rays starting at 0");
    if (g.empty()) throw domain_error("regulated ray without angles");
    if (g.segment) throw domain_error("preimage of a symbol carrying the segment marker");
    g.validate();
    Angle r1 = g.first();
    RegulatedRaySymbol t = g.tail();
    t.base = RayBase::infinity;
    return {t.with_first(Angle(r1.value() / 2)), t.with_first(Angle((r1.value() + 1) / 2))};
}

}  // namespace lamina
