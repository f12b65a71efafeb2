#pragma once

#include "measure.hpp"
#include "rays.hpp"
#include "symbolic.hpp"

#include <chrono>
#include <functional>
#include <random>
#include <sstream>

namespace lamina {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
    double budget = 0;  // seconds
};

struct CheckOptions {
    std::vector<Angle> thetas = {Angle(1, 2), Angle(1, 6), Angle(5, 12)};
    long depth = 8;
    uint64_t seed = 20240601;
    int threads = 0;
};

namespace checks {

using Clock = std::chrono::steady_clock;

inline std::string join(const std::vector<Angle>& v)
{
    std::string s;
    for (auto& t : v) s += (s.empty() ? "" : ",") + t.str();
    return s;
}

// 1. digit formula against the series
inline CheckResult digits(const CheckOptions& o)
{
    CheckResult r{1, "x0 digits inside the series enclosure", true, "", 0, 5};
    std::mt19937_64 rng(o.seed);
    int n = 0;
    while (n < 200) {
        long q = std::uniform_int_distribution<long>(2, 1L << 20)(rng);
        long p = std::uniform_int_distribution<long>(1, q - 1)(rng);
        Angle t(p, q);
        if (is_periodic(t)) continue;
        ++n;
        if (!x0_series(t, 40).contains(x0_digits(t).value())) {
            r.pass = false;
            r.detail = "outside enclosure at " + t.str();
            return r;
        }
    }
    if (!(x0_digits(Angle(1, 2)) == Angle(1, 4)) || !(x0_digits(Angle(1, 6)) == Angle(11, 60))) {
        r.pass = false;
        r.detail = "exact values x0(1/2), x0(1/6) wrong";
        return r;
    }
    r.detail = "200 random generators, x0(1/2)=1/4, x0(1/6)=11/60";
    return r;
}

// 2. the arc over theta0 runs from x0 to x0 + 1/2
inline CheckResult blowup(const CheckOptions&)
{
    CheckResult r{2, "h-arc endpoints are x0 and x0+1/2", true, "", 0, 5};
    for (auto t : {Angle(1, 2), Angle(1, 6), Angle(5, 12), Angle(3, 10)}) {
        auto e = h_arc(t, t, 30);
        mpq_class x = x0_digits(t).value();
        auto end = e.end();
        mpq_class opp = x + mpq_class(1, 2);
        bool ok = e.start.contains(x) && (end.contains(opp) || end.contains(opp - 1) || end.contains(opp + 1));
        ok = ok && e.start.hi - e.start.lo <= pow2q(-31);
        if (!ok) {
            r.pass = false;
            r.detail = "endpoint mismatch at " + t.str();
            return r;
        }
    }
    r.detail = "1/2, 1/6, 5/12, 3/10 at M=30";
    return r;
}

// 3. mass of the truncated measure, periodic arc lengths
inline CheckResult mass(const CheckOptions&)
{
    CheckResult r{3, "measure mass and periodic arcs", true, "", 0, 1};
    // total mass through the distribution function for every M, and by
    // summing the atoms explicitly where that stays cheap
    Angle top(mpq_class(1) - pow2q(-200));
    for (auto t : {Angle(1, 2), Angle(1, 6), Angle(5, 12), Angle(3, 10)})
        for (long M = 0; M <= 20; ++M) {
            mpq_class want = 1 - pow2q(-(M + 1));
            bool ok = mass_below_trunc(top, t, M) == want;
            if (M <= 10) ok = ok && atomic_measure(t, M).mass() == want;
            if (!ok) {
                r.pass = false;
                r.detail = "mass off at " + t.str() + " M=" + std::to_string(M);
                return r;
            }
        }
    if (sigma_lengths_periodic(1) != std::vector<mpq_class>{mpq_class(2, 3)} ||
        sigma_lengths_periodic(2) != std::vector<mpq_class>{mpq_class(2, 15), mpq_class(8, 15)}) {
        r.pass = false;
        r.detail = "periodic arc lengths wrong";
        return r;
    }
    r.detail = "M = 0..20 for 1/2, 1/6, 5/12, 3/10; p=1 [2/3], p=2 [2/15,8/15]";
    return r;
}

// 4. no same-side crossings
inline CheckResult bridges(const CheckOptions& o)
{
    CheckResult r{4, "no crossings in L and 2L", true, "", 0, 10};
    size_t pairs = 0;
    for (auto& t : o.thetas) {
        for (auto L : {build_L(t, o.depth), build_2L(t, o.depth)}) {
            for (Side s : {Side::inside, Side::outside}) {
                size_t n = L.count(s);
                pairs += n * (n - 1) / 2;
            }
            if (auto c = find_crossing(L)) {
                r.pass = false;
                r.detail = "crossing " + c->first.str() + " x " + c->second.str() + " for " + t.str();
                return r;
            }
        }
    }
    r.pass = pairs >= 10000;
    r.detail = std::to_string(pairs) + " same-side pairs, depth " + std::to_string(o.depth) + ", " + join(o.thetas);
    return r;
}

// 5. forward and backward invariance of the two-sided lamination
inline CheckResult invariance(const CheckOptions& o)
{
    CheckResult r{5, "two-sided invariance", true, "", 0, 5};
    size_t checked = 0;
    for (auto& t : o.thetas) {
        auto rep = check_two_sided_invariance(build_2L(t, 6), 5);
        checked += rep.checked;
        if (!rep.ok()) {
            r.pass = false;
            r.detail = t.str() + ": " + rep.violations.front();
            return r;
        }
    }
    r.detail = std::to_string(checked) + " leaves checked at depth 5 of 6";
    return r;
}

// 6. two-sided pullback equals L merged with its outside mirror
inline CheckResult construction(const CheckOptions& o)
{
    CheckResult r{6, "2L equals L with its outside mirror", true, "", 0, 5};
    long top = std::min<long>(o.depth, 8);
    for (auto& t : o.thetas)
        for (long d = 0; d <= top; ++d) {
            auto lhs = build_2L(t, d);
            auto rhs = merge(build_L(t, d / 2), mirror_outside(build_L(t, (d + 1) / 2)), LamKind::twoSided);
            bool ok = same_leaf_sets(lhs, rhs);
            for (auto& l : rhs.leaves()) {
                if (!ok) break;
                auto* m = lhs.find(l.side, l.a, l.b);
                ok = m && m->depth == (l.side == Side::inside ? 2 * l.depth : l.depth);
            }
            if (!ok) {
                r.pass = false;
                r.detail = t.str() + " depth " + std::to_string(d);
                return r;
            }
        }
    r.detail = "depths 0.." + std::to_string(top) + ", " + join(o.thetas);
    return r;
}

// 7. leaves against the address equivalence
inline CheckResult symbolic_leaves(const CheckOptions&)
{
    CheckResult r{7, "address model matches the leaves", true, "", 0, 5};
    long leaves = 0;
    for (auto t : {Angle(1, 2), Angle(1, 6)}) {
        auto rep = leaf_addresses_match(t, 8);
        leaves += rep.leaves_checked;
        auto [c0, c1] = critical_address(t);
        Angle x = x0_digits(t);
        bool crit = angle_to_address(x) == c1 && angle_to_address(x + mpq_class(1, 2)) == c0;
        if (!rep.ok() || !crit) {
            r.pass = false;
            r.detail = t.str() + ": " + (crit ? rep.mismatches.front() : "critical leaf endpoints");
            return r;
        }
    }
    r.detail = std::to_string(leaves) + " leaves at depth 8 for 1/2, 1/6";
    return r;
}

// 8. regulated ray rewrite rules, exhaustively
inline CheckResult regulated_rays(const CheckOptions&)
{
    CheckResult r{8, "regulated ray image and preimage", true, "", 0, 1};
    std::vector<Angle> pool;
    for (long q = 2; q <= 16; q *= 2)
        for (long p = 1; p < q; p += 2) pool.push_back(Angle(p, q));
    long count = 0, absorbed = 0;
    std::vector<Angle> cur;
    std::function<bool(size_t)> rec = [&](size_t len) -> bool {
        if (len > 0) {
            for (RayBase base : {RayBase::zero, RayBase::infinity}) {
                RegulatedRaySymbol g;
                g.base = base;
                g.angles = cur;
                ++count;
                RegulatedRaySymbol img = regulated_ray_image(g);
                // expected image, written out directly
                RegulatedRaySymbol want;
                if (base == RayBase::zero) {
                    want = g;
                    want.base = RayBase::infinity;
                } else if (cur[0] == Angle(1, 2)) {
                    ++absorbed;
                    want.base = RayBase::infinity;
                    want.angles.assign(cur.begin() + 1, cur.end());
                    want.segment = true;
                } else {
                    want.base = RayBase::zero;
                    want.angles = cur;
                    want.angles[0] = doubled(cur[0]);
                }
                if (!(img == want)) {
                    r.detail = "image of " + g.str();
                    return false;
                }
                if (base == RayBase::zero) {
                    auto [p1, p2] = regulated_ray_preimage(g);
                    if (!(regulated_ray_image(p1) == g) || !(regulated_ray_image(p2) == g) || p1 == p2) {
                        r.detail = "preimage of " + g.str();
                        return false;
                    }
                }
            }
        }
        if (len == 4) return true;
        for (auto& a : pool) {
            cur.push_back(a);
            bool ok = rec(len + 1);
            cur.pop_back();
            if (!ok) return false;
        }
        return true;
    };
    r.pass = rec(0);
    if (r.pass)
        r.detail = std::to_string(count) + " symbols, " + std::to_string(absorbed) + " absorbing r1 = 1/2";
    return r;
}

// 9. numeric sanity of the family
inline CheckResult dynamics_sanity(const CheckOptions&)
{
    CheckResult r{9, "fixed points, Green and Boettcher", true, "", 0, 5};
    std::ostringstream why;
    cd one(1, 0);
    double best = INFINITY;
    for (cd z : fixed_points(one)) best = std::min(best, std::abs(multiplier(one, z) - cd(1 - std::sqrt(5.0), 0)));
    if (!(best < 1e-9)) why << "multiplier " << best << "; ";
    for (cd a : {cd(1, 0), cd(0.3, 0.1), cd(-7, 2), cd(40, -3), cd(1e-3, 2e-3)}) {
        auto z = fixed_points(a);
        double s = std::abs(z[0] + z[1] + z[2] + 2.0);
        double e2 = std::abs(z[0] * z[1] + z[1] * z[2] + z[0] * z[2]);
        double p = std::abs(z[0] * z[1] * z[2] - a);
        if (!(std::max({s, e2, p}) < 1e-10 * std::max(1.0, std::abs(a)))) why << "Vieta at " << a << "; ";
    }
    double g = green_value(one, SpherePoint::finite(1e6));
    if (!(std::abs(g - (std::log(1e6) - std::log(2.0))) < 1e-3)) why << "Green " << g << "; ";
    for (cd a : {cd(1, 0), cd(-20, 5), cd(0.01, 0.3)})
        for (cd w : {cd(2e3, 1e3), cd(-5e4, 3), cd(0, 1e6)}) {
            cd phi = boettcher_infty(a, w);
            cd phi2 = boettcher_infty(a, f_eval(a, f_eval(a, w)));
            if (!(std::abs(phi2 / (phi * phi) - 1.0) < 1e-9)) why << "Boettcher at " << a << "; ";
        }
    r.detail = why.str();
    r.pass = r.detail.empty();
    if (r.pass) r.detail = "multiplier 1-sqrt5, Vieta, G(1e6)=" + std::to_string(g) + ", phi(f^2)=phi^2";
    return r;
}

// 10. the parameter raster
inline CheckResult m2(const CheckOptions& o)
{
    CheckResult r{10, "M2 raster membership and symmetry", true, "", 0, 60};
    bool one = !attracted_to_supercycle(cd(1, 0), SpherePoint::finite(-1), 512).attracted;
    bool hundred = attracted_to_supercycle(cd(100, 0), SpherePoint::finite(-1), 512).attracted;
    auto R = m2_raster(Bounds{-6, 6, -6, 6}, 400, 400, 512, o.threads);
    // pixel centres of a = 1 and a = 100 via 1x1 rasters
    bool px1 = m2_raster(Bounds{0.99, 1.01, -0.01, 0.01}, 1, 1, 512).values[0] == kMember;
    bool px100 = m2_raster(Bounds{99.99, 100.01, -0.01, 0.01}, 1, 1, 512).values[0] != kMember;
    long asym = 0;
    for (int j = 0; j < 400; ++j)
        for (int i = 0; i < 400; ++i) asym += R.at(i, j) != R.at(i, 399 - j);
    long members = std::count(R.values.begin(), R.values.end(), kMember);
    r.pass = one && hundred && px1 && px100 && asym == 0;
    r.detail = "a=1 " + std::string(one && px1 ? "member" : "NOT member") + ", a=100 " +
               (hundred && px100 ? "non-member" : "MEMBER") + ", " + std::to_string(asym) +
               " asymmetric pixels, " + std::to_string(members) + " members of 160000";
    return r;
}

// 11. parameter ray self-consistency
inline CheckResult parameter_ray(const CheckOptions&)
{
    CheckResult r{11, "parameter ray angle and reality", true, "", 0, 60};
    auto P = trace_parameter_ray(Angle(1, 6), 8.0, 0.05, 400);
    if (!P.path.complete) {
        r.pass = false;
        r.detail = "trace incomplete: " + P.path.message;
        return r;
    }
    double hint = 1.0 / 6, worst = 0, worst_res = 0;
    for (auto& p : P.path.points) {
        hint = critical_value_angle(p.z, hint);
        worst = std::max(worst, circle_gap(hint, 1.0 / 6));
        worst_res = std::max(worst_res, p.residual);
    }
    auto Z = trace_parameter_ray(Angle(0), 8.0, 0.05, 400);
    double imag = 0;
    for (auto& p : Z.path.points) imag = std::max(imag, std::abs(p.z.imag()));
    r.pass = worst < 1e-6 && Z.path.complete && imag < 1e-10;
    std::ostringstream d;
    d << P.path.points.size() << " points, worst angle error " << worst << ", worst residual " << worst_res
      << ", theta0=0 max |Im a| " << imag;
    r.detail = d.str();
    return r;
}

// 12. leaves of the exterior lamination from rays
inline CheckResult ray_leaves(const CheckOptions&)
{
    CheckResult r{12, "ray leaves match 2L(x0(1/6)) to depth 3", true, "", 0, 120};
    Angle t0(1, 6);
    double s = 0.25;
    auto P = trace_parameter_ray(t0, 8.0, s, 300);
    if (!P.path.complete) {
        r.pass = false;
        r.detail = "parameter ray incomplete: " + P.path.message;
        return r;
    }
    std::vector<cd> path;
    for (auto& p : P.path.points) path.push_back(p.z);
    auto J = track_julia_circle(path);
    auto got = ray_leaf_endpoints(J.a, t0, 3, J);
    auto cmp = compare_ray_leaves(got, build_2L(t0, 3), 1e-2);
    r.pass = cmp.ok(0.2);
    std::ostringstream d;
    d << "a=" << J.a.real() << (J.a.imag() < 0 ? "" : "+") << J.a.imag() << "i at potential " << s << ": "
      << cmp.matched << "/" << cmp.total << " matched, " << cmp.total - cmp.resolved << " unresolved";
    if (!cmp.misses.empty()) d << "; " << cmp.misses.front();
    r.detail = d.str();
    return r;
}

}  // namespace checks

inline std::vector<int> check_group(const std::string& g)
{
    if (g == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    if (g == "angle") return {1, 2, 3};
    if (g == "lam") return {4, 5, 6};
    if (g == "sym") return {7, 8};
    if (g == "dyn") return {9, 10, 11, 12};
    throw domain_error("unknown check group '" + g + "'");
}

inline CheckResult run_check(int id, const CheckOptions& o)
{
    using Fn = CheckResult (*)(const CheckOptions&);
    static const Fn table[] = {checks::digits,         checks::blowup,          checks::mass,
                               checks::bridges,        checks::invariance,      checks::construction,
                               checks::symbolic_leaves, checks::regulated_rays, checks::dynamics_sanity,
                               checks::m2,             checks::parameter_ray,   checks::ray_leaves};
    if (id < 1 || id > 12) throw domain_error("no check " + std::to_string(id));
    auto t = checks::Clock::now();
    CheckResult r;
    try {
        r = table[id - 1](o);
    } catch (const std::exception& e) {
        r.id = id;
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(checks::Clock::now() - t).count();
    if (r.budget > 0 && r.seconds > r.budget) {
        r.pass = false;
        r.detail += " (over the " + std::to_string((int)r.budget) + " s budget)";
    }
    return r;
}

inline std::string format_check(const CheckResult& r)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s %2d  %-42s %7.2fs  ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
    return buf + r.detail;
}

}  // namespace lamina
