#pragma once

#include "measure.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace lamina {

enum class Side { inside, outside };

inline char side_char(Side s) { return s == Side::inside ? 'I' : 'O'; }
inline Side flip(Side s) { return s == Side::inside ? Side::outside : Side::inside; }

struct Leaf {
    Angle a, b;  // a < b
    Side side = Side::inside;
    long depth = 0;

    Leaf() = default;
    Leaf(Angle x, Angle y, Side s = Side::inside, long d = 0) : side(s), depth(d)
    {
        if (x == y) throw domain_error("degenerate leaf at " + x.str());
        if (y < x) std::swap(x, y);
        a = std::move(x);
        b = std::move(y);
    }

    std::string str() const { return std::string(1, side_char(side)) + " " + a.str() + " " + b.str(); }
};

struct LeafKey {
    Side side;
    mpq_class a, b;
    friend bool operator<(const LeafKey& x, const LeafKey& y)
    {
        if (x.side != y.side) return x.side < y.side;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    }
};

inline LeafKey key_of(const Leaf& l) { return {l.side, l.a.value(), l.b.value()}; }

inline LeafKey key_of(Side s, const Angle& x, const Angle& y)
{
    return x < y ? LeafKey{s, x.value(), y.value()} : LeafKey{s, y.value(), x.value()};
}

enum class LamKind { L0, L, twoSided, quadratic, basilica, mating, other };

inline const char* kind_name(LamKind k)
{
    switch (k) {
    case LamKind::L0: return "L0";
    case LamKind::L: return "L";
    case LamKind::twoSided: return "two-sided";
    case LamKind::quadratic: return "quadratic";
    case LamKind::basilica: return "basilica";
    case LamKind::mating: return "mating";
    default: return "other";
    }
}

class Lamination {
public:
    LamKind kind = LamKind::other;
    std::string generator;  // theta0 or y0 as text
    long depth = 0;

    // Adds a leaf; a leaf seen before keeps the smaller depth. Returns true if new.
    bool add(const Leaf& l)
    {
        auto k = key_of(l);
        auto it = index_.find(k);
        if (it != index_.end()) {
            auto& old = leaves_[it->second];
            old.depth = std::min(old.depth, l.depth);
            return false;
        }
        index_.emplace(std::move(k), leaves_.size());
        leaves_.push_back(l);
        return true;
    }

    bool contains(Side s, const Angle& x, const Angle& y) const
    {
        if (x == y) return false;
        return index_.count(key_of(s, x, y)) > 0;
    }
    const Leaf* find(Side s, const Angle& x, const Angle& y) const
    {
        if (x == y) return nullptr;
        auto it = index_.find(key_of(s, x, y));
        return it == index_.end() ? nullptr : &leaves_[it->second];
    }

    const std::vector<Leaf>& leaves() const { return leaves_; }
    size_t size() const { return leaves_.size(); }
    size_t count(Side s) const
    {
        size_t n = 0;
        for (auto& l : leaves_) n += l.side == s;
        return n;
    }
    std::vector<Leaf> side(Side s) const
    {
        std::vector<Leaf> out;
        for (auto& l : leaves_)
            if (l.side == s) out.push_back(l);
        return out;
    }

    // canonical ordering, used for text output and comparisons
    std::vector<Leaf> sorted() const
    {
        std::vector<Leaf> v = leaves_;
        std::sort(v.begin(), v.end(), [](const Leaf& x, const Leaf& y) { return key_of(x) < key_of(y); });
        return v;
    }

    std::string to_text() const
    {
        std::string s;
        for (auto& l : sorted()) s += l.str() + "\n";
        return s;
    }

private:
    std::vector<Leaf> leaves_;
    std::map<LeafKey, size_t> index_;
};

inline bool same_leaf_sets(const Lamination& x, const Lamination& y)
{
    if (x.size() != y.size()) return false;
    for (auto& l : x.leaves())
        if (!y.contains(l.side, l.a, l.b)) return false;
    return true;
}

// strict interleaving of endpoints; shared endpoints do not count
inline bool leaves_cross(const Leaf& p, const Leaf& q)
{
    auto inside = [](const mpq_class& x, const mpq_class& lo, const mpq_class& hi) { return lo < x && x < hi; };
    const auto &a = p.a.value(), &b = p.b.value(), &c = q.a.value(), &d = q.b.value();
    if (a == c || a == d || b == c || b == d) return false;
    return inside(c, a, b) != inside(d, a, b);
}

// Parenthesis sweep over same-side leaves; returns a crossing pair if one exists.
inline std::optional<std::pair<Leaf, Leaf>> find_crossing(std::vector<Leaf> v)
{
    std::sort(v.begin(), v.end(), [](const Leaf& x, const Leaf& y) {
        if (x.a.value() != y.a.value()) return x.a.value() < y.a.value();
        return x.b.value() > y.b.value();
    });
    v.erase(std::unique(v.begin(), v.end(),
                        [](const Leaf& x, const Leaf& y) { return x.a == y.a && x.b == y.b; }),
            v.end());
    std::vector<const Leaf*> open;
    for (auto& c : v) {
        while (!open.empty() && open.back()->b.value() <= c.a.value()) open.pop_back();
        if (!open.empty()) {
            const Leaf* t = open.back();
            if (t->b.value() < c.b.value() && t->a.value() != c.a.value()) return std::pair(*t, c);
        }
        open.push_back(&c);
    }
    return std::nullopt;
}

inline std::optional<std::pair<Leaf, Leaf>> find_crossing(const Lamination& L)
{
    for (Side s : {Side::inside, Side::outside}) {
        auto r = find_crossing(L.side(s));
        if (r) return r;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- builders

inline void require_generator(const Angle& t0)
{
    if (t0.value() == 0 || is_periodic(t0))
        throw domain_error("generator " + t0.str() + " must be non-periodic under doubling");
}

inline Lamination build_L0(const Angle& t0, long depth, long M = 30)
{
    require_generator(t0);
    Lamination L;
    L.kind = LamKind::L0;
    L.generator = t0.str();
    L.depth = depth;
    for (long m = 0; m <= depth; ++m) {
        for (auto& z : preimages_of_angle(t0, m)) {
            Arc arc = h_arc_exact(z, t0);
            // the truncated enclosure must agree with the exact endpoints
            auto enc = h_arc(z, t0, std::max(M, m));
            if (!enc.start.contains(arc.start.value()))
                throw numeric_failure("h enclosure misses exact endpoint");
            L.add(Leaf(arc.start, arc.end, Side::inside, m));
        }
    }
    return L;
}

namespace detail {

struct RawArc {
    mpq_class start, len;
};

inline Leaf bridge(const RawArc& r, Side s, long depth)
{
    return Leaf(Angle(r.start), Angle(r.start + r.len), s, depth);
}

}  // namespace detail

inline Lamination build_L(const Angle& t0, long depth)
{
    require_generator(t0);
    Lamination L;
    L.kind = LamKind::L;
    L.generator = t0.str();
    L.depth = depth;
    Angle x = x0_digits(t0);
    std::vector<detail::RawArc> level{{x.value(), mpq_class(1, 2)}};
    for (long n = 0; n <= depth; ++n) {
        std::vector<detail::RawArc> next;
        for (auto& r : level) {
            L.add(detail::bridge(r, Side::inside, n));
            if (n == depth) continue;
            for (int k = 0; k < 4; ++k) next.push_back({(r.start + k) / 4, r.len / 4});
        }
        level = std::move(next);
    }
    return L;
}

// pullbacks of sigma0 under t -> -2t, alternating sides
inline Lamination build_2L(const Angle& t0, long depth)
{
    require_generator(t0);
    Lamination L;
    L.kind = LamKind::twoSided;
    L.generator = t0.str();
    L.depth = depth;
    Angle x = x0_digits(t0);
    std::vector<detail::RawArc> level{{x.value(), mpq_class(1, 2)}};
    for (long n = 0; n <= depth; ++n) {
        Side s = n % 2 == 0 ? Side::inside : Side::outside;
        std::vector<detail::RawArc> next;
        for (auto& r : level) {
            L.add(detail::bridge(r, s, n));
            if (n == depth) continue;
            mpq_class st = frac(-(r.start + r.len) / 2);
            next.push_back({st, r.len / 2});
            next.push_back({frac(st + mpq_class(1, 2)), r.len / 2});
        }
        level = std::move(next);
    }
    return L;
}

inline Angle neg2(const Angle& t) { return Angle(-2 * t.value()); }

// Leaves {a,b} -> {-2a,-2b} on the outside. A depth-j input leaf lands at two-sided
// depth 2j-1, which is how build_2L counts.
inline Lamination mirror_outside(const Lamination& in)
{
    Lamination out;
    out.kind = LamKind::twoSided;
    out.generator = in.generator;
    out.depth = in.depth;
    for (auto& l : in.leaves()) {
        if (l.side != Side::inside) throw domain_error("mirror_outside expects inside leaves");
        Angle p = neg2(l.a), q = neg2(l.b);
        if (p == q) continue;
        out.add(Leaf(p, q, Side::outside, std::max(0L, 2 * l.depth - 1)));
    }
    return out;
}

inline Lamination merge(const Lamination& x, const Lamination& y, LamKind kind)
{
    Lamination out = x;
    out.kind = kind;
    for (auto& l : y.leaves()) out.add(l);
    return out;
}

struct InvarianceReport {
    size_t checked = 0;
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Invariance under z -> 1/z^2 (angle map t -> -2t) for a two-sided lamination.
// Backward condition: if the image chord {-2a,-2b} of a preimage pair is a leaf on
// one side, one of the two pairings {a,b}, {a,b+1/2} is a leaf on the other side.
inline InvarianceReport check_two_sided_invariance(const Lamination& L, long depth)
{
    InvarianceReport rep;
    const mpq_class half(1, 2);
    for (auto& l : L.leaves()) {
        if (l.depth > depth) continue;
        ++rep.checked;
        Angle p = neg2(l.a), q = neg2(l.b);
        if (!(p == q) && !L.contains(flip(l.side), p, q))
            rep.violations.push_back("forward: " + l.str() + " -> " + p.str() + " " + q.str());
        if (!L.contains(l.side, l.a + half, l.b + half))
            rep.violations.push_back("antipodal: " + l.str());
        Angle u = Angle(-l.a.value() / 2), v = Angle(-l.b.value() / 2);
        if (!L.contains(flip(l.side), u, v) && !L.contains(flip(l.side), u, v + half))
            rep.violations.push_back("backward: " + l.str());
    }
    return rep;
}

// -------------------------------------------------------- quadratic laminations

namespace detail {

// angles with a common denominator N, doubling done on numerators
struct FixedDen {
    uint64_t N;
    uint64_t of(const Angle& t) const
    {
        mpq_class v = t.value() * N;
        if (v.get_den() != 1) throw domain_error("angle not on the common grid");
        return v.get_num().get_ui();
    }
    Angle angle(uint64_t n) const { return Angle(mpq_class(mpz_class(n), mpz_class(N))); }
};

inline bool cross_u(uint64_t a, uint64_t b, uint64_t c, uint64_t d)
{
    if (a > b) std::swap(a, b);
    if (a == c || a == d || b == c || b == d) return false;
    bool ci = a < c && c < b, di = a < d && d < b;
    return ci != di;
}

// true if no forward image of {a,b} crosses {c,d}
inline bool orbit_clear(uint64_t a, uint64_t b, uint64_t c, uint64_t d, uint64_t N)
{
    std::set<std::pair<uint64_t, uint64_t>> seen;
    for (;;) {
        if (a == b) return true;
        auto k = std::minmax(a, b);
        if (!seen.insert(k).second) return true;
        if (cross_u(a, b, c, d)) return false;
        a = (a * 2) % N;
        b = (b * 2) % N;
    }
}

}  // namespace detail

inline bool leaf_in_quadratic_lamination(const Angle& y0, const Leaf& leaf)
{
    mpz_class N = lcm(lcm(leaf.a.den(), leaf.b.den()), 2 * y0.den());
    if (mpz_sizeinbase(N.get_mpz_t(), 2) > 62) throw domain_error("denominators too large");
    detail::FixedDen g{N.get_ui()};
    Angle c(y0.value() / 2), d(y0.value() / 2 + mpq_class(1, 2));
    return detail::orbit_clear(g.of(leaf.a), g.of(leaf.b), g.of(c), g.of(d), g.N);
}

// Candidate endpoints: doubling-preimages (up to depth) of the endpoints of
// l0 = {y0/2, y0/2 + 1/2}; all pairs are filtered by the orbit-crossing test.
inline Lamination build_quadratic_lamination(const Angle& y0, long depth)
{
    if (depth < 0) throw domain_error("negative depth");
    Lamination L;
    L.kind = LamKind::quadratic;
    L.generator = y0.str();
    L.depth = depth;
    mpz_class Nz = y0.den() * 2;
    mpz_mul_2exp(Nz.get_mpz_t(), Nz.get_mpz_t(), depth);
    if (mpz_sizeinbase(Nz.get_mpz_t(), 2) > 62) throw domain_error("depth too large for the grid");
    detail::FixedDen g{Nz.get_ui()};
    const uint64_t N = g.N;
    uint64_t c = g.of(Angle(y0.value() / 2)), d = (c + N / 2) % N;
    std::map<uint64_t, long> pdepth{{c, 0}, {d, 0}};
    std::vector<uint64_t> frontier{c, d};
    for (long k = 1; k <= depth; ++k) {
        std::vector<uint64_t> next;
        for (auto p : frontier) {
            // p/N has preimages p/(2N) and p/(2N)+1/2; on the grid they exist when p is even
            for (uint64_t q : {p / 2, p / 2 + N / 2}) {
                if (p % 2) break;
                if (pdepth.emplace(q, k).second) next.push_back(q);
            }
        }
        frontier = std::move(next);
    }
    std::vector<std::pair<uint64_t, long>> pts(pdepth.begin(), pdepth.end());
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            if (detail::orbit_clear(pts[i].first, pts[j].first, c, d, N))
                L.add(Leaf(g.angle(pts[i].first), g.angle(pts[j].first), Side::inside,
                           std::max(pts[i].second, pts[j].second)));
    return L;
}

// Pullback of {1/3, 2/3}: the leaf is its own image, so its preimages are itself and
// {1/6, 5/6}. Other leaves take the pairing whose chords each sit in one closed arc
// cut out by 1/6, 1/3, 2/3, 5/6.
inline Lamination build_basilica(long depth)
{
    Lamination L;
    L.kind = LamKind::basilica;
    L.generator = "1/3";
    L.depth = depth;
    const mpq_class cuts[5] = {mpq_class(1, 6), mpq_class(1, 3), mpq_class(2, 3), mpq_class(5, 6), mpq_class(7, 6)};
    auto in_one_arc = [&](mpq_class x, mpq_class y) {
        for (int i = 0; i < 4; ++i) {
            mpq_class lo = cuts[i], len = cuts[i + 1] - cuts[i];
            if (frac(x - lo) <= len && frac(y - lo) <= len) return true;
        }
        return false;
    };
    Leaf minor(Angle(1, 3), Angle(2, 3), Side::inside, 0);
    L.add(minor);
    std::vector<Leaf> frontier{minor};
    for (long n = 1; n <= depth; ++n) {
        std::vector<Leaf> next;
        for (auto& l : frontier) {
            mpq_class a = l.a.value() / 2, b = l.b.value() / 2, h(1, 2);
            std::vector<Leaf> pre;
            if (l.a == Angle(1, 3) && l.b == Angle(2, 3)) {
                pre = {Leaf(Angle(1, 6), Angle(5, 6), Side::inside, n)};
            } else if (in_one_arc(a, b) && in_one_arc(a + h, b + h)) {
                pre = {Leaf(Angle(a), Angle(b), Side::inside, n), Leaf(Angle(a + h), Angle(b + h), Side::inside, n)};
            } else if (in_one_arc(a, b + h) && in_one_arc(a + h, b)) {
                pre = {Leaf(Angle(a), Angle(b + h), Side::inside, n), Leaf(Angle(a + h), Angle(b), Side::inside, n)};
            } else {
                throw numeric_failure("no admissible basilica pullback for " + l.str());
            }
            for (auto& p : pre)
                if (L.add(p)) next.push_back(p);
        }
        frontier = std::move(next);
    }
    return L;
}

inline Lamination mate(const Lamination& L1, const Lamination& L2)
{
    Lamination out;
    out.kind = LamKind::mating;
    out.generator = L1.generator + "|" + L2.generator;
    out.depth = std::max(L1.depth, L2.depth);
    for (auto& l : L1.leaves()) {
        if (l.side != Side::inside) throw domain_error("mate expects inside laminations");
        out.add(l);
    }
    for (auto& l : L2.leaves()) {
        if (l.side != Side::inside) throw domain_error("mate expects inside laminations");
        out.add(Leaf(-l.a, -l.b, Side::outside, l.depth));
    }
    return out;
}

// ------------------------------------------------------ complementary regions

struct BoundaryPiece {
    bool chord;  // otherwise a counterclockwise circle arc
    Angle from, to;
};
using Region = std::vector<BoundaryPiece>;

inline std::vector<Region> complementary_regions(const std::vector<Leaf>& leaves)
{
    if (find_crossing(leaves)) throw domain_error("leaves cross; regions undefined");
    if (leaves.empty()) return {Region{}};
    std::vector<mpq_class> verts;
    for (auto& l : leaves) {
        verts.push_back(l.a.value());
        verts.push_back(l.b.value());
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    size_t V = verts.size();
    auto vid = [&](const mpq_class& x) {
        return (size_t)(std::lower_bound(verts.begin(), verts.end(), x) - verts.begin());
    };
    // chords at each vertex ordered by counterclockwise offset to the far end
    std::vector<std::vector<std::pair<mpq_class, size_t>>> around(V);
    std::set<std::pair<size_t, size_t>> chords;
    for (auto& l : leaves) {
        size_t i = vid(l.a.value()), j = vid(l.b.value());
        if (!chords.insert(std::minmax(i, j)).second) continue;
        around[i].push_back({frac(verts[j] - verts[i]), j});
        around[j].push_back({frac(verts[i] - verts[j]), i});
    }
    for (auto& v : around) std::sort(v.begin(), v.end());

    // half-edges: (u, v, is_chord); arcs only run counterclockwise
    std::set<std::tuple<size_t, size_t, bool>> unused;
    for (size_t i = 0; i < V; ++i) unused.insert({i, (i + 1) % V, false});
    for (auto& [i, j] : chords) {
        unused.insert({i, j, true});
        unused.insert({j, i, true});
    }
    auto next_edge = [&](size_t u, size_t v, bool chord) -> std::tuple<size_t, size_t, bool> {
        // offset of the incoming direction, seen from v
        mpq_class in = chord ? frac(verts[u] - verts[v]) : mpq_class(1);
        const auto& ch = around[v];
        auto it = std::lower_bound(ch.begin(), ch.end(), std::pair<mpq_class, size_t>(in, 0));
        if (it == ch.begin()) return {v, (v + 1) % V, false};
        --it;
        return {v, it->second, true};
    };
    std::vector<Region> out;
    while (!unused.empty()) {
        auto start = *unused.begin();
        auto e = start;
        Region r;
        do {
            unused.erase(e);
            auto [u, v, c] = e;
            r.push_back({c, Angle(verts[u]), Angle(verts[v])});
            e = next_edge(u, v, c);
        } while (e != start);
        out.push_back(std::move(r));
    }
    return out;
}

// --------------------------------------------------------------------- SVG

struct SvgOptions {
    double radius = 300.0;
    double stroke = 1.0;
    bool color_by_depth = false;
};

namespace detail {

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    std::string s(buf);
    if (s == "-0.0000") s = "0.0000";
    return s;
}

inline std::string depth_color(long d, bool on, Side s)
{
    if (!on) return s == Side::inside ? "#1f3a93" : "#a8322d";
    static const char* pal[] = {"#000000", "#1f3a93", "#2e8b57", "#b8860b", "#a8322d", "#6a3d9a", "#008b8b", "#8b4513"};
    return pal[d % 8];
}

}  // namespace detail

inline std::string render_svg(const Lamination& lam, const SvgOptions& opt = {})
{
    using detail::fmt;
    const double R = opt.radius, pi = std::acos(-1.0);
    const double half = 1.6 * R;
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(2 * half) << "\" height=\""
       << fmt(2 * half) << "\" viewBox=\"" << fmt(-half) << " " << fmt(-half) << " " << fmt(2 * half) << " "
       << fmt(2 * half) << "\">\n";
    os << "<title>" << kind_name(lam.kind) << " " << lam.generator << " depth " << lam.depth << "</title>\n";
    os << "<circle cx=\"0.0000\" cy=\"0.0000\" r=\"" << fmt(R) << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\""
       << fmt(opt.stroke) << "\"/>\n";
    auto pt = [&](const Angle& t) {
        double th = 2 * pi * t.to_double();
        return std::pair(R * std::cos(th), -R * std::sin(th));  // screen y points down
    };
    for (Side s : {Side::inside, Side::outside}) {
        auto leaves = lam.side(s);
        std::sort(leaves.begin(), leaves.end(), [](const Leaf& x, const Leaf& y) { return key_of(x) < key_of(y); });
        os << "<g id=\"" << (s == Side::inside ? "inside" : "outside") << "\" fill=\"none\" stroke-width=\""
           << fmt(opt.stroke) << "\">\n";
        for (auto& l : leaves) {
            auto [x1, y1] = pt(l.a);
            auto [x2, y2] = pt(l.b);
            std::string col = detail::depth_color(l.depth, opt.color_by_depth, s);
            double delta = mpq_class(l.b.value() - l.a.value()).get_d();
            double span = std::min(delta, 1 - delta);
            if (l.b.value() - l.a.value() == mpq_class(1, 2)) {
                if (s == Side::inside) {
                    os << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\""
                       << fmt(y2) << "\" stroke=\"" << col << "\"/>\n";
                } else {
                    // the diameter's outer half: two rays to the frame
                    double k = half * 1.5 / R;
                    os << "<path d=\"M " << fmt(x1) << " " << fmt(y1) << " L " << fmt(k * x1) << " " << fmt(k * y1)
                       << " M " << fmt(x2) << " " << fmt(y2) << " L " << fmt(k * x2) << " " << fmt(k * y2)
                       << "\" stroke=\"" << col << "\"/>\n";
                }
                continue;
            }
            // circle orthogonal to the unit circle through both endpoints
            double r = R * std::tan(pi * span);
            double mid = 2 * pi * (l.a.to_double() + delta / 2);
            if (delta > 0.5) mid += pi;
            double dist = R / std::cos(pi * span);
            double cx = dist * std::cos(mid), cy = -dist * std::sin(mid);
            double cross = (x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1);
            int large = s == Side::inside ? 0 : 1;
            int sweep = (cross > 0) != (large == 1) ? 1 : 0;
            os << "<path d=\"M " << fmt(x1) << " " << fmt(y1) << " A " << fmt(r) << " " << fmt(r) << " 0 " << large
               << " " << sweep << " " << fmt(x2) << " " << fmt(y2) << "\" stroke=\"" << col << "\"/>\n";
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline Lamination parse_leaves(const std::string& text)
{
    Lamination L;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string s, p, q;
        if (!(ls >> s >> p >> q) || (s != "I" && s != "O")) throw domain_error("bad leaf line: " + line);
        L.add(Leaf(Angle::parse(p), Angle::parse(q), s == "I" ? Side::inside : Side::outside, 0));
    }
    return L;
}

}  // namespace lamina
