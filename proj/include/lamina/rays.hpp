#pragma once

#include "dynamics.hpp"
#include "lamination.hpp"

#include <optional>

namespace lamina {

// Rays of f^2 in the two basins. A point of R_inf(t) at potential s has
// phi = exp(s - 2 pi i t); a point of R_0(t) at potential s maps by f onto
// R_inf(t) at potential s. The map f sends R_inf(t) to R_0(2t).
enum class Basin { zero, infinity };

struct RayPoint {
    double s;
    cd z;
    double residual;
};

struct RayPath {
    std::vector<RayPoint> points;  // potentials strictly decreasing
    bool complete = false;
    bool crashed = false;
    cd crash_point{0, 0};
    double crash_potential = 0;
    int crash_order = 0;  // f^k(crash_point) = -1
    std::string message;
};

namespace detail {

// frac(2^n t) for n = 0..limit, computed exactly
inline std::vector<double> doubling_orbit(const Angle& t, int limit = 90)
{
    std::vector<double> out;
    mpq_class x = t.value();
    for (int n = 0; n <= limit; ++n) {
        out.push_back(x.get_d());
        x *= 2;
        if (x >= 1) x -= 1;
    }
    return out;
}

// potential above which the Boettcher series and its inverse are trusted
inline double deep_potential(cd a) { return std::log(1e8 * (2.0 + std::sqrt(std::abs(a)))); }

// w with log phi(w) = L; L must be deep
inline cd phi_inverse_log(cd a, cd L)
{
    cd w = 2.0 * std::exp(L);
    for (int it = 0; it < 60; ++it) {
        cd e = log_phi_series(a, w) - L;
        e = cd(e.real(), std::remainder(e.imag(), 2 * M_PI));
        cd nw = w * std::exp(-e);
        bool done = std::abs(nw - w) <= 1e-16 * std::abs(w);
        w = nw;
        if (done) break;
    }
    return w;
}

struct OrbitData {
    cd u;                  // f^m(z)
    cd dlog;               // d log f^m / dz
    double dcrit;          // distance to the nearest precritical point, linearized
    int kcrit;
    bool ok;
};

inline OrbitData orbit(cd a, cd z, int m)
{
    OrbitData d{z, 1.0 / z, std::abs(z + 1.0), 0, true};
    cd u = z, L = 1.0 / z;
    for (int k = 0; k < m; ++k) {
        if (k > 0) {
            // chordal distance of f^k(z) to -1 pulled back by the spherical derivative
            double m = std::abs(u);
            double dc = std::abs(u + 1.0) * std::sqrt(0.5 * (1.0 + m * m)) / (m * std::abs(L));
            if (dc < d.dcrit) d.dcrit = dc, d.kcrit = k;
        }
        cd nL = -(2.0 * u + 2.0) / (u + 2.0) * L;
        u = f_eval(a, u);
        L = nL;
        if (!finite(u) || !finite(L) || u == cd(0, 0)) {
            d.ok = false;
            return d;
        }
    }
    d.u = u;
    d.dlog = L;
    return d;
}

}  // namespace detail

// Solves f^pre(z) in R_base(t) at potential s by Newton in log coordinates.
class RaySolver {
public:
    RaySolver(cd a, Basin base, const Angle& t, int pre = 0)
        : a_(a), base_(base), pre_(pre), orbit_(detail::doubling_orbit(t)), deep_(detail::deep_potential(a))
    {
        require_param(a);
    }

    int level(double s) const
    {
        int n = 0;
        while (std::ldexp(s, n) < deep_) ++n;
        if (n + 1 >= (int)orbit_.size()) throw numeric_failure("potential too small to resolve");
        return n;
    }

    int iterations(double s) const { return pre_ + 2 * level(s) + (base_ == Basin::zero ? 1 : 0); }

    struct Result {
        cd z;
        double residual;
    };

    std::optional<Result> solve(double s, cd guess, double tol = 1e-9) const
    {
        int n = level(s);
        int m = iterations(s);
        cd logW = std::log(detail::phi_inverse_log(a_, cd(std::ldexp(s, n), -2 * M_PI * orbit_[n])));
        double scale = std::ldexp(1.0, n);
        cd z = guess;
        double best = INFINITY;
        cd best_z = z;
        for (int it = 0; it < 40; ++it) {
            auto o = detail::orbit(a_, z, m);
            if (!o.ok) break;
            cd F = std::log(o.u) - logW;
            F = cd(F.real(), std::remainder(F.imag(), 2 * M_PI));
            double r = std::abs(F) / scale;
            if (r < best) best = r, best_z = z;
            if (r < 1e-14) break;
            cd step = F / o.dlog;
            if (!finite(step)) break;
            double cap = 0.5 * (1.0 + std::abs(z));
            if (std::abs(step) > cap) step *= cap / std::abs(step);
            z -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(z)) && r < tol) break;
        }
        if (!(best < tol)) return std::nullopt;
        return Result{best_z, best};
    }

    double dcrit(cd z, double s) const { return detail::orbit(a_, z, iterations(s)).dcrit; }
    // dcrit over |dz / d log s|; bounded as the ray lands on J, tends to 0 at a crash
    double crash_ratio(cd z, double s) const
    {
        auto o = detail::orbit(a_, z, iterations(s));
        return o.dcrit * std::abs(o.dlog) / std::ldexp(s, level(s));
    }
    int kcrit(cd z, double s) const { return detail::orbit(a_, z, iterations(s)).kcrit; }

private:
    cd a_;
    Basin base_;
    int pre_;
    std::vector<double> orbit_;
    double deep_;
};

// point of R_base(t) at a deep potential, no guess needed
inline cd deep_ray_point(cd a, Basin base, const Angle& t, double s)
{
    cd W = detail::phi_inverse_log(a, cd(s, -2 * M_PI * t.to_double()));
    if (base == Basin::infinity) return W;
    return -1.0 + std::sqrt(1.0 + a / W);  // the preimage near 0
}

// z near c with f^k(z) = -1
inline cd refine_precritical(cd a, cd z, int k)
{
    for (int it = 0; it < 60; ++it) {
        cd u = z, d = 1.0;
        for (int j = 0; j < k; ++j) {
            if (u == cd(0, 0) || u == cd(-2, 0)) return z;
            d *= multiplier(a, u);
            u = f_eval(a, u);
        }
        if (k == 0 || d == cd(0, 0)) return k == 0 ? cd(-1, 0) : z;
        cd step = (u + 1.0) / d;
        if (!finite(step)) return z;
        z -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
    }
    return z;
}

// Continuation in potential from s_from down to s_to. Steps are geometric with
// at most log(s_from/s_to)/steps per step, shrunk when Newton fails or when the
// move would exceed a quarter of the distance to the nearest precritical point.
inline RayPath trace_dynamical_ray(cd a, Basin base, const Angle& t, double s_from, double s_to, int steps = 200,
                                   double crash_tol = 1e-6)
{
    require_param(a);
    if (!(s_from > s_to && s_to > 0)) throw domain_error("need s_from > s_to > 0");
    RaySolver solver(a, base, t);
    RayPath path;
    double deep = detail::deep_potential(a);
    double s = std::max(s_from, deep);
    auto first = solver.solve(s, deep_ray_point(a, base, t, s));
    if (!first) {
        path.message = "no convergence at the start";
        return path;
    }
    cd z = first->z;
    if (s == s_from) path.points.push_back({s, z, first->residual});
    double max_step = std::log(s_from / s_to) / std::max(1, steps);
    double ls = std::log(s), lt = std::log(s_to), lf = std::log(s_from);
    double step = max_step;
    while (ls > lt) {
        // land exactly on s_from before recording
        double goal = ls > lf ? lf : lt;
        double ln = std::max(goal, ls - step);
        double sn = std::exp(ln);
        double dc = solver.dcrit(z, sn);
        auto r = solver.solve(sn, z);
        if (!r || std::abs(r->z - z) > 0.25 * dc + 1e-300) {
            step *= 0.5;
            if (step < 1e-13) {
                path.message = "step size underflow at potential " + std::to_string(std::exp(ls));
                return path;
            }
            continue;
        }
        z = r->z;
        ls = ln;
        if (ls <= lf + 1e-15) path.points.push_back({sn, z, r->residual});
        step = std::min(max_step, step * 1.5);
        if (solver.crash_ratio(z, sn) < crash_tol) {
            int k = solver.kcrit(z, sn);
            path.crashed = true;
            path.crash_order = k;
            path.crash_point = refine_precritical(a, z, k);
            path.crash_potential = std::abs(green_value(a, SpherePoint::finite(path.crash_point), 40));
            path.message = "crashed into a precritical point";
            return path;
        }
    }
    path.complete = true;
    return path;
}

inline RayPath trace_dynamical_ray(cd a, Basin base, double t, double s_from, double s_to, int steps = 200)
{
    return trace_dynamical_ray(a, base, Angle(mpq_class(t)), s_from, s_to, steps);
}

// angle of the ray through z, using the branch nearest to hint
inline double ray_angle_at(cd a, Basin base, cd z, double hint)
{
    double s = std::abs(green_value(a, SpherePoint::finite(z), 40));
    double deep = detail::deep_potential(a);
    int n = 0;
    while (std::ldexp(s, n) < deep) ++n;
    int m = 2 * n + (base == Basin::zero ? 1 : 0);
    cd u = z;
    for (int k = 0; k < m; ++k) u = f_eval(a, u);
    double deep_angle = -detail::log_phi_series(a, u).imag() / (2 * M_PI);
    deep_angle -= std::floor(deep_angle);
    double q = std::ldexp(1.0, n);
    double j = std::round(hint * q - deep_angle);
    double t = (deep_angle + j) / q;
    return t - std::floor(t);
}

// ---- parameter rays ----

struct ParamRay {
    RayPath path;  // z holds the parameter a
    cd landing{0, 0};
    double error_bar = INFINITY;
};

namespace detail {

// the critical value -a sits at potential s and angle t0: Newton in a
inline std::optional<std::pair<cd, double>> solve_parameter(const std::vector<double>& orb, double s, cd guess,
                                                            double tol = 1e-9)
{
    cd a = guess;
    double best = INFINITY;
    cd best_a = a;
    for (int it = 0; it < 40; ++it) {
        if (!finite(a) || a == cd(0, 0)) break;
        double deep = deep_potential(a);
        int n = 0;
        while (std::ldexp(s, n) < deep) ++n;
        if (n + 1 >= (int)orb.size()) break;
        cd logW = std::log(phi_inverse_log(a, cd(std::ldexp(s, n), -2 * M_PI * orb[n])));
        cd u = -a, L = 1.0 / a;
        bool ok = true;
        for (int k = 0; k < 2 * n; ++k) {
            cd nL = 1.0 / a - (2.0 * u + 2.0) / (u + 2.0) * L;
            u = f_eval(a, u);
            L = nL;
            if (!finite(u) || !finite(L) || u == cd(0, 0)) {
                ok = false;
                break;
            }
        }
        if (!ok) break;
        cd F = std::log(u) - logW;
        F = cd(F.real(), std::remainder(F.imag(), 2 * M_PI));
        double r = std::abs(F) / std::ldexp(1.0, n);
        if (r < best) best = r, best_a = a;
        if (r < 1e-14) break;
        cd step = F / L;
        if (!finite(step)) break;
        double cap = 0.25 * std::abs(a);
        if (std::abs(step) > cap) step *= cap / std::abs(step);
        a -= step;
        if (std::abs(step) < 1e-15 * std::abs(a) && r < tol) break;
    }
    if (!(best < tol)) return std::nullopt;
    return std::make_pair(best_a, best);
}

}  // namespace detail

inline ParamRay trace_parameter_ray(const Angle& t0, double s_from, double s_to, int steps = 200)
{
    if (!(s_from > s_to && s_to > 0)) throw domain_error("need s_from > s_to > 0");
    auto orb = detail::doubling_orbit(t0);
    ParamRay out;
    cd a = -2.0 * std::exp(cd(s_from, -2 * M_PI * t0.to_double()));
    auto first = detail::solve_parameter(orb, s_from, a);
    if (!first) {
        out.path.message = "no convergence at the start";
        return out;
    }
    a = first->first;
    out.path.points.push_back({s_from, a, first->second});
    double max_step = std::log(s_from / s_to) / std::max(1, steps);
    double ls = std::log(s_from), lt = std::log(s_to), step = max_step;
    while (ls > lt) {
        double ln = std::max(lt, ls - step);
        double sn = std::exp(ln);
        auto r = detail::solve_parameter(orb, sn, a);
        if (!r || std::abs(r->first - a) > 0.1 * std::abs(a)) {
            step *= 0.5;
            if (step < 1e-13) {
                out.path.message = "step size underflow at potential " + std::to_string(std::exp(ls));
                break;
            }
            continue;
        }
        a = r->first;
        ls = ln;
        out.path.points.push_back({sn, a, r->second});
        step = std::min(max_step, step * 1.5);
    }
    out.path.complete = ls <= lt;
    auto& P = out.path.points;
    out.landing = P.back().z;
    if (P.size() >= 2) out.error_bar = std::abs(P.back().z - P[P.size() - 2].z);
    return out;
}

// angle at infinity of the critical value -a, branch followed from hint
inline double critical_value_angle(cd a, double hint) { return ray_angle_at(a, Basin::infinity, -a, hint); }

// ---- the Julia set as a circle ----

// P(k/M) for the conjugacy P of x -> -2x to f on J, with P(0) the common
// landing point of R_0(0) and R_inf(0), followed along a path of parameters.
// M should be odd: then no sample other than P(0) has a dyadic angle and the
// itinerary of a sample never collapses onto 0.
struct JuliaCircle {
    cd a{0, 0};
    int M = 0;
    std::vector<cd> P;
    double last_update = INFINITY;

    size_t nearest(cd z) const
    {
        size_t best = 0;
        double bd = INFINITY;
        for (size_t k = 0; k < P.size(); ++k) {
            double d = std::norm(P[k] - z);
            if (d < bd) bd = d, best = k;
        }
        return best;
    }

    // circle coordinate of a point on or near J
    double coord(cd z, int K = 12) const
    {
        std::vector<int> bits;
        cd u = z;
        for (int j = 0; j < K; ++j) {
            bits.push_back(2 * nearest(u) >= P.size());
            u = f_eval(a, u);
        }
        double t = double(nearest(u)) / M;
        for (int j = K - 1; j >= 0; --j) {
            if (bits[j] == 0) t = t == 0 ? 0 : (1.0 - t) / 2.0;
            else t = t == 0 ? 0.5 : 1.0 - t / 2.0;
        }
        return t - std::floor(t);
    }
};

namespace detail {

inline double refine_circle(JuliaCircle& J, int sweeps, double stop = 1e-13)
{
    std::vector<cd> next(J.P.size());
    double moved = INFINITY;
    for (int s = 0; s < sweeps && moved > stop; ++s) {
        moved = 0;
        for (int k = 0; k < J.M; ++k) {
            cd v = J.P[(size_t)((2L * (J.M - k)) % J.M)];
            cd r = std::sqrt(1.0 + J.a / v);
            cd z1 = -1.0 + r, z2 = -1.0 - r;
            next[k] = std::norm(z1 - J.P[k]) <= std::norm(z2 - J.P[k]) ? z1 : z2;
            moved = std::max(moved, std::abs(next[k] - J.P[k]));
        }
        J.P.swap(next);
    }
    J.last_update = moved;
    return moved;
}

}  // namespace detail

inline JuliaCircle track_julia_circle(const std::vector<cd>& a_path, int M = 4097, int final_sweeps = 400)
{
    if (a_path.empty()) throw domain_error("empty parameter path");
    JuliaCircle J;
    J.M = M;
    J.a = a_path.front();
    require_param(J.a);
    // omega: the fixed point where R_inf(0) lands
    auto ray = trace_dynamical_ray(J.a, Basin::infinity, Angle(0), detail::deep_potential(J.a), 1e-5, 400);
    if (ray.points.empty()) throw numeric_failure("cannot trace R_inf(0)");
    cd end = ray.points.back().z;
    auto fp = fixed_points(J.a);
    cd omega = *std::min_element(fp.begin(), fp.end(), [&](cd x, cd y) { return std::abs(x - end) < std::abs(y - end); });
    J.P.resize(M);
    for (int k = 0; k < M; ++k) J.P[k] = omega * std::polar(1.0, 2 * M_PI * k / M);
    detail::refine_circle(J, 200);
    for (size_t i = 1; i < a_path.size(); ++i) {
        J.a = a_path[i];
        detail::refine_circle(J, 6);
    }
    detail::refine_circle(J, final_sweeps);
    return J;
}

// ---- leaves of the exterior lamination from rays ----

struct RayLeaf {
    int depth = 0;
    bool inside = true;
    cd center{0, 0};
    std::array<std::vector<cd>, 2> halves;  // from the center outward to J
    std::array<double, 2> t{0, 0};
    bool resolved = false;
};

// Leaf(-1) is the closure of the two preimages under f^2 of R_0(2 t0) that meet
// at -1; deeper leaves are its pullbacks by f. Inside leaves have even depth.
inline std::vector<RayLeaf> ray_leaf_endpoints(cd a, const Angle& t0, int depth, const JuliaCircle& J,
                                               double eps = 1e-6)
{
    require_param(a);
    if (depth < 0) return {};
    double sa = std::abs(green_value(a, SpherePoint::finite(-1.0), 40));
    if (!(sa > 0) || !std::isfinite(sa)) throw domain_error("-1 does not escape to the cycle");

    std::vector<double> pots;
    for (double d = 1e-3; d < 0.1; d *= 1.5) pots.push_back(sa * (1 - d));
    while (pots.back() > eps * sa) pots.push_back(pots.back() * std::pow(2.0, -1.0 / 8));

    Angle t1 = doubled(t0);
    RaySolver on_image(a, Basin::zero, t1);
    RaySolver on_leaf(a, Basin::zero, t1, 2);
    cd w_c = f_eval(a, f_eval(a, cd(-1, 0)));
    // f^2(-1 + h) ~ w_c + c2 h^2
    cd c2 = -a * multiplier(a, -a);

    RayLeaf root;
    root.depth = 0;
    root.center = -1.0;
    auto w1 = on_image.solve(2 * pots[0], w_c);
    if (!w1) throw numeric_failure("cannot place the image ray near f^2(-1)");
    cd h = std::sqrt((w1->z - w_c) / c2);
    for (int side = 0; side < 2; ++side) {
        cd z = -1.0 + (side ? -h : h);
        for (double s : pots) {
            auto r = on_leaf.solve(2 * s, z);
            if (!r) break;
            z = r->z;
            root.halves[side].push_back(z);
        }
    }
    std::vector<RayLeaf> all{root};
    std::vector<RayLeaf> layer{root};
    for (int d = 1; d <= depth; ++d) {
        std::vector<RayLeaf> next;
        for (auto& L : layer) {
            cd r = std::sqrt(1.0 + a / L.center);
            for (cd c : {-1.0 + r, -1.0 - r}) {
                RayLeaf K;
                K.depth = d;
                K.inside = d % 2 == 0;
                K.center = c;
                for (int side = 0; side < 2; ++side) {
                    cd prev = c;
                    for (cd w : L.halves[side]) {
                        cd q = std::sqrt(1.0 + a / w);
                        cd p1 = -1.0 + q, p2 = -1.0 - q;
                        prev = std::norm(p1 - prev) <= std::norm(p2 - prev) ? p1 : p2;
                        K.halves[side].push_back(prev);
                    }
                }
                next.push_back(K);
            }
        }
        all.insert(all.end(), next.begin(), next.end());
        layer.swap(next);
    }
    // landing: smallest potential, checked against a point 16x higher
    for (auto& L : all) {
        L.resolved = true;
        for (int side = 0; side < 2; ++side) {
            auto& H = L.halves[side];
            if (H.size() < 40) {
                L.resolved = false;
                continue;
            }
            double t_end = J.coord(H.back());
            double t_up = J.coord(H[H.size() - 33]);
            L.t[side] = t_end;
            double gap = std::abs(t_end - t_up);
            gap = std::min(gap, 1 - gap);
            if (gap > 2e-3) L.resolved = false;
        }
    }
    return all;
}

inline double circle_gap(double x, double y)
{
    double d = std::fabs(x - y);
    d -= std::floor(d);
    return std::min(d, 1 - d);
}

struct LeafComparison {
    size_t total = 0, resolved = 0, matched = 0, expected = 0;
    std::vector<std::string> misses;
    double unresolved_fraction() const { return total ? double(total - resolved) / total : 0.0; }
    bool ok(double max_unresolved = 0.2) const
    {
        return misses.empty() && total == expected && unresolved_fraction() < max_unresolved;
    }
};

// every resolved ray leaf must sit within tol of a leaf of L with the same side and depth
inline LeafComparison compare_ray_leaves(const std::vector<RayLeaf>& got, const Lamination& L, double tol = 1e-2)
{
    LeafComparison c;
    c.total = got.size();
    c.expected = L.size();
    for (auto& g : got) {
        if (!g.resolved) continue;
        ++c.resolved;
        Side side = g.inside ? Side::inside : Side::outside;
        bool hit = false;
        for (auto& l : L.leaves()) {
            if (l.side != side || l.depth != g.depth) continue;
            double x = l.a.to_double(), y = l.b.to_double();
            double d1 = std::max(circle_gap(g.t[0], x), circle_gap(g.t[1], y));
            double d2 = std::max(circle_gap(g.t[0], y), circle_gap(g.t[1], x));
            if (std::min(d1, d2) <= tol) {
                hit = true;
                break;
            }
        }
        if (hit) {
            ++c.matched;
        } else {
            char buf[160];
            std::snprintf(buf, sizeof buf, "depth %d %s leaf at %.6f %.6f has no partner", g.depth,
                          g.inside ? "inside" : "outside", g.t[0], g.t[1]);
            c.misses.push_back(buf);
        }
    }
    return c;
}

}  // namespace lamina
