#pragma once

#include "angle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

namespace lamina {

using cd = std::complex<double>;

// f_a(z) = a / (z^2 + 2z); f(0) = f(-2) = inf, f(inf) = 0
struct SpherePoint {
    cd z{0, 0};
    bool inf = false;

    static SpherePoint infinity() { return {cd(0, 0), true}; }
    static SpherePoint finite(cd z) { return {z, false}; }
};

inline void require_param(cd a)
{
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw domain_error("parameter is not finite");
    if (a == cd(0, 0)) throw domain_error("a = 0 is not in the family");
}

inline bool finite(cd z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline SpherePoint apply_f(cd a, const SpherePoint& p)
{
    if (p.inf) return SpherePoint::finite(0);
    cd z = p.z;
    if (z == cd(0, 0) || z == cd(-2, 0)) return SpherePoint::infinity();
    cd w = std::abs(z) > 1e150 ? a / z / (z + 2.0) : a / (z * (z + 2.0));
    if (!finite(w)) return SpherePoint::infinity();
    return SpherePoint::finite(w);
}

inline cd f_eval(cd a, cd z) { return a / (z * (z + 2.0)); }

inline cd multiplier(cd a, cd z)
{
    if (z == cd(0, 0) || z == cd(-2, 0)) throw domain_error("multiplier at a pole");
    cd p = z * z + 2.0 * z;
    return -a * (2.0 * z + 2.0) / (p * p);
}

// roots of z^3 + 2z^2 - a, sorted by real then imaginary part
inline std::array<cd, 3> fixed_points(cd a)
{
    require_param(a);
    auto p = [&](cd z) { return (z + 2.0) * z * z - a; };
    auto dp = [&](cd z) { return (3.0 * z + 4.0) * z; };
    double r = std::cbrt(std::abs(a)) + 1.0;
    std::array<cd, 3> z;
    for (int k = 0; k < 3; ++k) z[k] = std::polar(r, 0.4 + 2.0 * M_PI * k / 3.0);
    // Aberth iteration
    for (int it = 0; it < 500; ++it) {
        double moved = 0;
        for (int k = 0; k < 3; ++k) {
            cd ratio = p(z[k]) / dp(z[k]);
            cd sum = 0;
            for (int j = 0; j < 3; ++j)
                if (j != k) sum += 1.0 / (z[k] - z[j]);
            cd w = ratio / (1.0 - ratio * sum);
            if (!finite(w)) continue;
            z[k] -= w;
            moved = std::max(moved, std::abs(w) / (1.0 + std::abs(z[k])));
        }
        if (moved < 1e-16) break;
    }
    for (auto& x : z)
        for (int it = 0; it < 3; ++it) {
            cd d = dp(x);
            if (d == cd(0, 0)) break;
            cd nx = x - p(x) / d;
            if (std::abs(p(nx)) >= std::abs(p(x))) break;
            x = nx;
        }
    double tol = 1e-10 * std::max(1.0, std::abs(a));
    for (auto& x : z)
        if (!(std::abs(p(x)) < tol)) throw numeric_failure("fixed point residual above tolerance");
    std::sort(z.begin(), z.end(), [](cd x, cd y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return z;
}

// ---- the supercycle trap ----

// |z| > R_out sends z into |w| < r_in, and |w| < r_in sends w beyond R_out.
struct Trap {
    double R_out, r_in;
};

inline Trap trap_radii(double abs_a)
{
    double R = std::max(5.0, 4.0 * abs_a);
    return {R, abs_a / (R * (R - 2.0))};
}

// numeric sweep over |a| in [1e-8, 1e8] and the trap boundaries
inline bool certify_trap()
{
    for (int e = -80; e <= 80; ++e) {
        double m = std::pow(10.0, e / 10.0);
        Trap t = trap_radii(m);
        for (int ph = 0; ph < 24; ++ph) {
            cd a = std::polar(m, 2 * M_PI * ph / 24 + 0.1);
            for (int k = 0; k < 48; ++k) {
                double ang = 2 * M_PI * k / 48;
                for (double g : {1.0 + 1e-9, 1.5, 10.0}) {
                    cd z = std::polar(t.R_out * g, ang);
                    if (!(std::abs(f_eval(a, z)) < t.r_in)) return false;
                    cd u = std::polar(t.r_in / g, ang);
                    if (!(std::abs(f_eval(a, u)) > t.R_out)) return false;
                }
            }
        }
    }
    return true;
}

inline void require_certified_trap()
{
    static const bool ok = certify_trap();
    if (!ok) throw numeric_failure("supercycle trap failed its certification sweep");
}

struct Escape {
    bool attracted = false;
    int iter = 0;
    bool inner = false;  // entered through |z| < r_in
    // which basin of f^2: 0 for the side of 0, 1 for the side of infinity
    int basin() const { return (iter + (inner ? 1 : 0)) % 2 == 0 ? 1 : 0; }
};

namespace detail {

// conjugation-exact step: conj inputs give bitwise conj outputs
inline bool step_f(double ar, double ai, double& zr, double& zi)
{
    double p = zr + 2.0;
    double dr = zr * p - zi * zi;
    double di = zr * zi + zi * p;
    double n = dr * dr + di * di;
    if (!(n > 0) || !std::isfinite(n)) return false;
    double wr = (ar * dr + ai * di) / n;
    double wi = (ai * dr - ar * di) / n;
    if (!std::isfinite(wr) || !std::isfinite(wi)) return false;
    zr = wr;
    zi = wi;
    return true;
}

inline Escape escape_from(double ar, double ai, double zr, double zi, int nmax, const Trap& t)
{
    double R2 = t.R_out * t.R_out, r2 = t.r_in * t.r_in;
    for (int k = 0; k <= nmax; ++k) {
        double m = zr * zr + zi * zi;
        if (m > R2) return {true, k, false};
        if (m < r2) return {true, k, true};
        if (k == nmax) break;
        if (!step_f(ar, ai, zr, zi)) return {true, k + 1, false};
    }
    return {false, nmax, false};
}

}  // namespace detail

inline Escape attracted_to_supercycle(cd a, const SpherePoint& z, int n_max)
{
    require_param(a);
    require_certified_trap();
    if (z.inf) return {true, 0, false};
    return detail::escape_from(a.real(), a.imag(), z.z.real(), z.z.imag(), n_max, trap_radii(std::abs(a)));
}

// ---- rasters ----

struct Bounds {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    bool empty() const { return !(x1 > x0) || !(y1 > y0); }
};

struct Raster {
    std::string kind;
    int width = 0, height = 0;
    Bounds bounds;
    int n_max = 0;
    cd a{0, 0};
    std::vector<int32_t> values;  // row 0 is the top
    std::vector<int8_t> basin;    // escape Julia rasters only; -1 where undecided

    int32_t at(int i, int j) const { return values[size_t(j) * width + i]; }
};

// Pixel centres mirror exactly about the centre line, so a grid centred on the
// real axis holds conjugate pairs bit for bit.
inline cd pixel_center(const Bounds& b, int W, int H, int i, int j)
{
    double cx = 0.5 * (b.x0 + b.x1), cy = 0.5 * (b.y0 + b.y1);
    double sx = (b.x1 - b.x0) / (2.0 * W), sy = (b.y1 - b.y0) / (2.0 * H);
    return {cx + (2 * i + 1 - W) * sx, cy + (H - 1 - 2 * j) * sy};
}

template <class Fn>
void parallel_rows(int H, int threads, Fn fn)
{
    if (threads <= 0) threads = (int)std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max(1, H));
    if (threads == 1) {
        for (int j = 0; j < H; ++j) fn(j);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int j = t; j < H; j += threads) fn(j);
        });
    for (auto& th : pool) th.join();
}

constexpr int32_t kMember = -1;
constexpr int32_t kPuncture = -2;

inline Raster m2_raster(const Bounds& b, int W, int H, int n_max, int threads = 0)
{
    require_certified_trap();
    Raster r;
    r.kind = "m2";
    r.bounds = b;
    r.n_max = n_max;
    if (b.empty() || W <= 0 || H <= 0) return r;
    r.width = W;
    r.height = H;
    r.values.assign(size_t(W) * H, 0);
    double half = 0.5 * std::max((b.x1 - b.x0) / W, (b.y1 - b.y0) / H);
    parallel_rows(H, threads, [&](int j) {
        for (int i = 0; i < W; ++i) {
            cd a = pixel_center(b, W, H, i, j);
            int32_t& v = r.values[size_t(j) * W + i];
            if (std::abs(a) <= half) {
                v = kPuncture;
                continue;
            }
            Escape e = detail::escape_from(a.real(), a.imag(), -1.0, 0.0, n_max, trap_radii(std::abs(a)));
            v = e.attracted ? e.iter : kMember;
        }
    });
    return r;
}

inline Raster julia_raster_escape(cd a, const Bounds& b, int W, int H, int n_max, int threads = 0)
{
    require_param(a);
    require_certified_trap();
    Raster r;
    r.kind = "julia-escape";
    r.bounds = b;
    r.n_max = n_max;
    r.a = a;
    if (b.empty() || W <= 0 || H <= 0) return r;
    r.width = W;
    r.height = H;
    r.values.assign(size_t(W) * H, 0);
    r.basin.assign(size_t(W) * H, -1);
    Trap t = trap_radii(std::abs(a));
    parallel_rows(H, threads, [&](int j) {
        for (int i = 0; i < W; ++i) {
            cd z = pixel_center(b, W, H, i, j);
            Escape e = detail::escape_from(a.real(), a.imag(), z.real(), z.imag(), n_max, t);
            size_t k = size_t(j) * W + i;
            r.values[k] = e.attracted ? e.iter : kMember;
            if (e.attracted) r.basin[k] = (int8_t)e.basin();
        }
    });
    return r;
}

// indices of repelling fixed points
inline std::vector<cd> repelling_fixed_points(cd a)
{
    std::vector<cd> out;
    for (cd z : fixed_points(a))
        if (std::abs(multiplier(a, z)) > 1.0) out.push_back(z);
    return out;
}

inline Raster julia_raster_inverse(cd a, const Bounds& b, int W, int H, long n_points = 1000000, uint64_t seed = 1)
{
    require_param(a);
    Raster r;
    r.kind = "julia-inverse";
    r.bounds = b;
    r.a = a;
    if (b.empty() || W <= 0 || H <= 0) return r;
    r.width = W;
    r.height = H;
    r.values.assign(size_t(W) * H, 0);
    auto rep = repelling_fixed_points(a);
    if (rep.empty()) throw numeric_failure("no repelling fixed point for inverse iteration");
    std::mt19937_64 rng(seed);
    cd z = rep.front();
    for (long n = 0; n < n_points + 64; ++n) {
        cd s = std::sqrt(1.0 + a / z);
        z = (rng() & 1) ? -1.0 + s : -1.0 - s;
        if (n < 64 || !finite(z)) continue;
        double fx = (z.real() - b.x0) / (b.x1 - b.x0) * W, fy = (b.y1 - z.imag()) / (b.y1 - b.y0) * H;
        if (fx < 0 || fy < 0 || fx >= W || fy >= H) continue;
        r.values[size_t(fy) * W + size_t(fx)] = 1;
    }
    return r;
}

// pixels of the escape raster that straddle the basin boundary
inline std::vector<uint8_t> escape_boundary(const Raster& e)
{
    std::vector<uint8_t> out(e.values.size(), 0);
    auto cls = [&](int i, int j) {
        size_t k = size_t(j) * e.width + i;
        return e.values[k] == kMember ? -1 : (int)e.basin[k];
    };
    for (int j = 0; j < e.height; ++j)
        for (int i = 0; i < e.width; ++i) {
            int c = cls(i, j);
            bool edge = false;
            if (i + 1 < e.width && cls(i + 1, j) != c) edge = true;
            if (i > 0 && cls(i - 1, j) != c) edge = true;
            if (j + 1 < e.height && cls(i, j + 1) != c) edge = true;
            if (j > 0 && cls(i, j - 1) != c) edge = true;
            out[size_t(j) * e.width + i] = edge;
        }
    return out;
}

// Symmetric agreement: the smaller of the two fractions of marked pixels lying
// within tol pixels (Chebyshev) of a marked pixel of the other set.
inline double julia_agreement(const Raster& escape, const Raster& inverse, int tol = 2)
{
    if (escape.width != inverse.width || escape.height != inverse.height) throw domain_error("raster sizes differ");
    int W = escape.width, H = escape.height;
    auto A = escape_boundary(escape);
    std::vector<uint8_t> B(inverse.values.size());
    for (size_t k = 0; k < B.size(); ++k) B[k] = inverse.values[k] != 0;
    auto near = [&](const std::vector<uint8_t>& S, int i, int j) {
        for (int dj = -tol; dj <= tol; ++dj)
            for (int di = -tol; di <= tol; ++di) {
                int x = i + di, y = j + dj;
                if (x >= 0 && y >= 0 && x < W && y < H && S[size_t(y) * W + x]) return true;
            }
        return false;
    };
    auto frac_near = [&](const std::vector<uint8_t>& from, const std::vector<uint8_t>& to) {
        long n = 0, hit = 0;
        for (int j = 0; j < H; ++j)
            for (int i = 0; i < W; ++i)
                if (from[size_t(j) * W + i]) {
                    ++n;
                    hit += near(to, i, j);
                }
        return n ? double(hit) / n : 0.0;
    };
    return std::min(frac_near(A, B), frac_near(B, A));
}

// ---- output ----

inline void write_sidecar(const Raster& r, const std::string& path)
{
    std::ofstream h(path + ".hdr");
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "kind=%s\nwidth=%d\nheight=%d\nx0=%.17g\nx1=%.17g\ny0=%.17g\ny1=%.17g\nn_max=%d\na=%.17g,%.17g\n",
                  r.kind.c_str(), r.width, r.height, r.bounds.x0, r.bounds.x1, r.bounds.y0, r.bounds.y1, r.n_max,
                  r.a.real(), r.a.imag());
    h << buf;
    if (!h) throw domain_error("cannot write " + path + ".hdr");
}

inline uint8_t gray_of(const Raster& r, int32_t v)
{
    if (r.kind == "julia-inverse") return v ? 0 : 255;
    if (v == kMember) return 0;
    if (v == kPuncture) return 128;
    double x = std::log1p((double)v) / std::log1p((double)std::max(1, r.n_max));
    return (uint8_t)(255 - std::lround(200 * std::min(1.0, x)));
}

inline void write_pgm(const Raster& r, const std::string& path)
{
    std::ofstream o(path, std::ios::binary);
    o << "P5\n" << r.width << " " << r.height << "\n255\n";
    for (auto v : r.values) o.put((char)gray_of(r, v));
    if (!o) throw domain_error("cannot write " + path);
    write_sidecar(r, path);
}

inline void write_ppm(const Raster& r, const std::string& path)
{
    std::ofstream o(path, std::ios::binary);
    o << "P6\n" << r.width << " " << r.height << "\n255\n";
    for (size_t k = 0; k < r.values.size(); ++k) {
        int32_t v = r.values[k];
        uint8_t rgb[3];
        if (v == kPuncture) {
            rgb[0] = 220, rgb[1] = 0, rgb[2] = 0;
        } else if (v == kMember || r.kind == "julia-inverse") {
            uint8_t g = gray_of(r, v);
            rgb[0] = rgb[1] = rgb[2] = g;
        } else {
            double x = std::log1p((double)v) / std::log1p((double)std::max(1, r.n_max));
            bool side = !r.basin.empty() && r.basin[k] == 0;
            uint8_t hi = (uint8_t)(255 - std::lround(180 * std::min(1.0, x)));
            rgb[0] = side ? hi : 255;
            rgb[1] = hi;
            rgb[2] = side ? 255 : hi;
        }
        o.write((const char*)rgb, 3);
    }
    if (!o) throw domain_error("cannot write " + path);
    write_sidecar(r, path);
}

// ---- Green function and Boettcher coordinate of f^2 ----

// 2^-n log|f^{2n}(z)|, with the tails of escaping orbits continued by their
// asymptotics so nothing overflows. +-inf on the cycle.
inline double green_value(cd a, const SpherePoint& p, int n = 30)
{
    require_param(a);
    if (p.inf) return INFINITY;
    cd z = p.z;
    // l_{j+1} = 2 l_j - c once f^2 is within 1e-100 of its leading term
    auto tail = [&](int k, double c) {
        double g = std::log(std::abs(z)) / std::ldexp(1.0, k);
        for (int j = k; j < n; ++j) g -= c / std::ldexp(1.0, j + 1);
        return g;
    };
    for (int k = 0; k < n; ++k) {
        if (z == cd(0, 0) || z == cd(-2, 0)) return -INFINITY;  // f^2 lands on 0
        double m = std::abs(z);
        if (m > 1e100) return tail(k, std::log(2.0));
        if (m < 1e-100) return tail(k, std::log(std::abs(a) / 4.0));
        z = f_eval(a, z);
        if (z == cd(0, 0) || z == cd(-2, 0)) return INFINITY;
        z = f_eval(a, z);
    }
    if (z == cd(0, 0)) return -INFINITY;
    return std::log(std::abs(z)) / std::ldexp(1.0, n);
}

namespace detail {

// log phi(z) = log(z/2) + sum 2^-(k+1) Log(2 u_{k+1} / u_k^2), u_k = f^{2k}(z)
inline cd log_phi_series(cd a, cd z)
{
    cd acc = std::log(z / 2.0);
    cd u = z;
    double w = 0.5;
    for (int k = 0; k < 200; ++k) {
        if (std::abs(u) > 1e100) break;
        cd v = f_eval(a, f_eval(a, u));
        cd r = 2.0 * v / (u * u);
        cd term = w * std::log(r);
        acc += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(acc))) break;
        u = v;
        w *= 0.5;
    }
    return acc;
}

}  // namespace detail

inline double boettcher_threshold(cd a) { return 64.0 * (2.0 + std::sqrt(std::abs(a))); }

// phi with phi(f^2 z) = phi(z)^2 and phi(z) ~ z/2
inline cd boettcher_infty(cd a, cd z)
{
    require_param(a);
    if (!(std::abs(z) >= boettcher_threshold(a)))
        throw numeric_failure("point below the Boettcher threshold; iterate f^2 first");
    return std::exp(detail::log_phi_series(a, z));
}

// ---- Blaschke products ----

inline std::pair<cd, cd> blaschke_critical_points(cd b)
{
    double m = std::abs(b);
    if (!(m > 0 && m < 1)) throw domain_error("|b| must lie in (0,1)");
    double s = std::sqrt(1.0 - m * m);
    cd bc = std::conj(b);
    return {(-1.0 + s) / bc, (-1.0 - s) / bc};
}

inline cd blaschke_eval(cd b, cd z)
{
    cd den = std::conj(b) * z + 1.0;
    if (std::abs(den) < 1e-300) throw domain_error("pole of the Blaschke product");
    return z * (z + b) / den;
}

}  // namespace lamina
