#include <CLI11.hpp>

#include <lamina/checks.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace lamina;

namespace {

constexpr int kDomainExit = 1;
constexpr int kNumericExit = 2;
constexpr int kUsageExit = 64;

bool unsafe_limits = false;

void cap_depth(long d)
{
    if (d < 0) throw domain_error("depth must be non-negative");
    if (d > 16 && !unsafe_limits) throw domain_error("depth above 16 needs --unsafe-limits");
}

void cap_iterations(long n)
{
    if (n < 0) throw domain_error("iteration count must be non-negative");
    if (n > 4096 && !unsafe_limits) throw domain_error("more than 4096 iterations needs --unsafe-limits");
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s)
{
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw domain_error("not a number: '" + s + "'");
    }
}

// "re,im" or "re"
cd parse_complex(const std::string& s)
{
    auto p = split(s, ',');
    if (p.size() == 1) return {to_double(p[0]), 0};
    if (p.size() == 2) return {to_double(p[0]), to_double(p[1])};
    throw domain_error("complex numbers are written re,im: '" + s + "'");
}

Bounds parse_bounds(const std::string& s)
{
    auto p = split(s, ',');
    if (p.size() != 4) throw domain_error("bounds are written xmin,xmax,ymin,ymax");
    return {to_double(p[0]), to_double(p[1]), to_double(p[2]), to_double(p[3])};
}

std::pair<int, int> parse_size(const std::string& s)
{
    auto p = split(s, 'x');
    if (p.size() != 2) throw domain_error("size is written WIDTHxHEIGHT");
    int w = (int)to_double(p[0]), h = (int)to_double(p[1]);
    if (w < 0 || h < 0) throw domain_error("negative raster size");
    if ((w > 8192 || h > 8192) && !unsafe_limits) throw domain_error("rasters above 8192 pixels a side need --unsafe-limits");
    return {w, h};
}

Leaf parse_leaf(const std::string& s)
{
    auto p = split(s, ',');
    if (p.size() != 2) throw domain_error("leaves are written p/q,r/s");
    return Leaf(Angle::parse(p[0]), Angle::parse(p[1]));
}

std::string fmt(double x)
{
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}

std::string fmt(cd z)
{
    char b[80];
    std::snprintf(b, sizeof b, "%.17g%+.17gi", z.real(), z.imag());
    return b;
}

std::string interval(const RationalInterval& I) { return "[" + I.lo.get_str() + ", " + I.hi.get_str() + "]"; }

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream o(path, std::ios::binary);
    o << text;
    if (!o) throw domain_error("cannot write " + path);
}

std::string read_file(const std::string& path)
{
    std::ifstream i(path, std::ios::binary);
    if (!i) throw domain_error("cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(i), {});
}

struct LamOutput {
    std::string svg, leaves;
    bool by_depth = false;
};

void emit(const Lamination& L, const LamOutput& out)
{
    std::printf("%zu leaves (%zu inside, %zu outside)\n", L.size(), L.count(Side::inside), L.count(Side::outside));
    if (!out.leaves.empty()) write_file(out.leaves, L.to_text());
    if (!out.svg.empty()) {
        SvgOptions o;
        o.color_by_depth = out.by_depth;
        write_file(out.svg, render_svg(L, o));
    }
    if (out.leaves.empty() && out.svg.empty()) std::fputs(L.to_text().c_str(), stdout);
}

void write_raster(const Raster& r, const std::string& path)
{
    if (path.empty()) return;
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm")
        write_pgm(r, path);
    else
        write_ppm(r, path);
}

void write_csv(const RayPath& p, const std::string& path)
{
    std::string s = "s,re,im,residual\n";
    for (auto& q : p.points) s += fmt(q.s) + "," + fmt(q.z.real()) + "," + fmt(q.z.imag()) + "," + fmt(q.residual) + "\n";
    if (path.empty())
        std::fputs(s.c_str(), stdout);
    else
        write_file(path, s);
}

// key=value lines become --key value, for keys the chosen subcommand knows and
// the command line does not already set
std::vector<std::string> config_tokens(const std::string& path, CLI::App* target, const std::vector<std::string>& argv)
{
    std::vector<std::string> out;
    std::istringstream in(read_file(path));
    std::string line;
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw domain_error("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        std::string flag = "--" + key;
        bool given = false;
        for (auto& a : argv) given |= a == flag || a.rfind(flag + "=", 0) == 0;
        if (given) continue;
        CLI::App* owner = target;
        while (owner && !owner->get_option_no_throw(flag)) owner = owner->get_parent();
        if (!owner) continue;
        auto* opt = owner->get_option(flag);
        out.push_back(flag);
        if (opt->get_type_size() != 0) out.push_back(value);
    }
    return out;
}

const char* kExamples = R"ex(Examples:
  lamina angle x0 --theta 1/6                  11/60 and its digit stream
  lamina angle x0 --theta 1/6 --series 40      with the series enclosure
  lamina angle y0 --theta 1/6
  lamina angle nu --theta 1/6 --m 3
  lamina angle digits --theta 5/12 --bit 4
  lamina angle orbit-type --theta 3/10
  lamina angle double --theta 3/5
  lamina angle preimages --theta 1/6 --n 2
  lamina angle mu --theta 1/6 --z 1/6 --M 30
  lamina angle sigma --theta 1/6
  lamina angle sigma-periodic --p 2
  lamina angle h-arc --theta 1/6 --z 1/6 --M 30
  lamina angle semiconj --theta 1/6 --M 20 --samples 64
  lamina lam L0 --theta 1/6 --depth 3
  lamina lam L --theta 1/2 --depth 2
  lamina lam two-sided --theta 1/2 --depth 6 --svg out.svg --leaves out.leaves
  lamina lam mirror --leaves-in out.leaves
  lamina lam cross --leaf 0,1/2 --with 1/4,3/4
  lamina lam quadratic --y0 1/3 --depth 4 --test-leaf 1/6,2/3
  lamina lam basilica --depth 6 --svg basilica.svg
  lamina lam mate --y1 1/3 --y2 1/5 --depth 4
  lamina lam check-invariance --theta 1/6 --depth 5
  lamina lam regions --theta 1/6 --depth 4
  lamina sym critical-address --theta 1/6
  lamina sym equiv --theta 1/6 --x "(01)" --y "(10)"
  lamina sym angle-to-address --angle 1/4
  lamina sym angle-to-address --address "0|1(10)"
  lamina sym shift --address "1|10(01)"
  lamina sym match-leaves --theta 1/6 --depth 8
  lamina sym cells --n 3
  lamina sym reg-ray --symbol "G(inf;1/2,1/4)"
  lamina sym reg-ray --symbol "G(0;1/4)" --preimage
  lamina dyn m2 --bounds=-6,6,-6,6 --size 400x400 --iterations 512 --out m2.ppm
  lamina dyn julia --a 6 --bounds=-4,2,-3,3 --size 400x400 --method inverse --out j.pgm
  lamina dyn julia --a 6 --bounds=-4,2,-3,3 --size 400x400 --compare
  lamina dyn fixed --a 1
  lamina dyn apply --a 1 --z=-1
  lamina dyn attracted --a 100 --z=-1 --iterations 64
  lamina dyn green --a 1 --z 1e6
  lamina dyn boettcher --a 1 --z 1e8
  lamina dyn ray --a=-3,4 --base inf --theta 2/7 --from 5 --to 0.05 --csv ray.csv
  lamina dyn param-ray --theta 1/6 --from 8 --to 0.05 --csv pray.csv
  lamina dyn ray-leaves --theta 1/6 --potential 0.25 --depth 3
  lamina dyn blaschke --b 0.5 --z 0.3,0.2
  lamina check all --theta-set 1/2,1/6,5/12 --depth 8
Angles are p/q; complex values are re,im (write --a=-3,4 when negative).
Depths above 16 and iteration counts above 4096 need --unsafe-limits.
Exit status: 0 ok, 1 domain error or failed check, 2 numeric failure, 64 usage.)ex";

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Laminations, binary addresses and rays for a/(z^2+2z)", "lamina"};
    app.footer(kExamples);
    app.require_subcommand(1);
    app.fallthrough();
    std::string config;
    app.add_option("--config", config, "file of key=value defaults for the chosen subcommand");
    app.add_flag("--unsafe-limits", unsafe_limits, "lift the depth and iteration caps");

    // shared option storage
    std::string theta, z_s, a_s, b_s, M_s, y0, y1, y2, bounds_s = "-6,6,-6,6", size_s = "400x400", out;
    std::string x_addr, y_addr, address, symbol, angle_s, base_s = "inf", method = "escape", leaves_in, csv;
    std::string test_leaf, leaf_s, with_s, theta_set = "1/2,1/6,5/12";
    long depth = 4, m = 1, n = 1, p = 1, M = 30, samples = 64, bit = 0, series = 0, iterations = 512, points = 1000000;
    long steps = 200, seed = 1, green_n = 30, sweeps = 4097, threads = 0;
    double s_from = 8, s_to = 0.05, potential = 0.25;
    bool alt = false, preimage = false, compare = false;
    LamOutput lo;

    auto theta_opt = [&](CLI::App* c) { c->add_option("--theta", theta, "angle p/q")->required(); };
    auto depth_opt = [&](CLI::App* c, long def) {
        depth = def;
        c->add_option("--depth", depth, "depth")->capture_default_str();
    };
    auto lam_out = [&](CLI::App* c) {
        c->add_option("--svg", lo.svg, "write an SVG");
        c->add_option("--leaves", lo.leaves, "write the leaf file");
        c->add_flag("--color-by-depth", lo.by_depth, "color leaves by depth in the SVG");
    };
    int status = 0;

    // ---------------- angle
    auto* ang = app.add_subcommand("angle", "exact angle correspondences and the blow-up measure");
    ang->require_subcommand(1);
    {
        auto* c = ang->add_subcommand("x0", "x0(theta0) and its digit stream");
        theta_opt(c);
        c->add_option("--series", series, "also print the series enclosure with M terms");
        c->callback([&] {
            Angle t = Angle::parse(theta);
            Angle x = x0_digits(t);
            std::printf("%s\n%s\n", x.str().c_str(), x0_bits(t).str().c_str());
            if (series > 0) std::printf("series %s\n", interval(x0_series(t, series)).c_str());
        });
        c = ang->add_subcommand("y0", "y0(theta0)");
        theta_opt(c);
        c->callback([&] { std::printf("%s\n", y0_from_theta(Angle::parse(theta)).str().c_str()); });
        c = ang->add_subcommand("nu", "nu_m(theta0)");
        theta_opt(c);
        c->add_option("--m", m, "index m >= 0")->capture_default_str();
        c->callback([&] {
            if (m < 0) throw domain_error("m must be non-negative");
            std::printf("%d\n", nu(Angle::parse(theta), m));
        });
        c = ang->add_subcommand("digits", "binary digit stream");
        theta_opt(c);
        c->add_option("--bit", bit, "also print digit number m (1-based)");
        c->callback([&] {
            Angle t = Angle::parse(theta);
            std::printf("%s\n", digit_stream(t).str().c_str());
            if (bit > 0) std::printf("bit %ld = %d\n", bit, binary_digit(t, bit));
        });
        c = ang->add_subcommand("orbit-type", "dyadic, periodic or preperiodic under doubling");
        theta_opt(c);
        c->callback([&] {
            auto o = orbit_type(Angle::parse(theta));
            std::printf("%s preperiod %ld period %ld\n", tag_name(o.tag), o.preperiod, o.period);
        });
        c = ang->add_subcommand("double", "2 theta mod 1");
        theta_opt(c);
        c->callback([&] { std::printf("%s\n", doubled(Angle::parse(theta)).str().c_str()); });
        c = ang->add_subcommand("preimages", "angles z with 2^m z = theta0 for m <= n");
        theta_opt(c);
        c->add_option("--n", n, "depth")->capture_default_str();
        c->callback([&] {
            cap_depth(n);
            for (auto& z : preimages_of_angle(Angle::parse(theta), n)) std::printf("%s\n", z.str().c_str());
        });
        c = ang->add_subcommand("mu", "weight of the truncated measure at z");
        theta_opt(c);
        c->add_option("--z", z_s, "angle p/q")->required();
        c->add_option("--M", M, "depth cap")->capture_default_str();
        c->callback([&] { std::printf("%s\n", mu_weight(Angle::parse(z_s), Angle::parse(theta), M).get_str().c_str()); });
        c = ang->add_subcommand("sigma", "the arc sigma0 for a non-periodic theta0");
        theta_opt(c);
        c->callback([&] { std::printf("%s\n", sigma0_arc(Angle::parse(theta)).str().c_str()); });
        c = ang->add_subcommand("sigma-periodic", "arc lengths for a periodic generator of period p");
        c->add_option("--p", p, "period")->capture_default_str();
        c->callback([&] {
            if (p < 1 || (p > 16 && !unsafe_limits)) throw domain_error("period must lie in 1..16");
            for (auto& x : sigma_lengths_periodic(p)) std::printf("%s\n", x.get_str().c_str());
        });
        c = ang->add_subcommand("h-arc", "h-preimage arc of z with enclosures");
        theta_opt(c);
        c->add_option("--z", z_s, "angle p/q")->required();
        c->add_option("--M", M, "depth cap")->capture_default_str();
        c->callback([&] {
            auto e = h_arc(Angle::parse(z_s), Angle::parse(theta), M);
            std::printf("start %s\nend %s\nlength %s\n", interval(e.start).c_str(), interval(e.end()).c_str(),
                        e.length.get_str().c_str());
        });
        c = ang->add_subcommand("semiconj", "check h(4u) = 2h(u) on k/samples");
        theta_opt(c);
        c->add_option("--M", M, "depth cap")->capture_default_str();
        c->add_option("--samples", samples, "sample count")->capture_default_str();
        c->callback([&] {
            std::vector<Angle> s;
            for (long k = 0; k < samples; ++k) s.push_back(Angle(k, samples));
            auto r = semiconjugacy_check(Angle::parse(theta), s, M);
            std::printf("max defect %s over %zu samples%s\n", r.max_defect.get_str().c_str(), r.samples.size(),
                        r.skipped_shadow_interior ? " (sigma0 interior skipped)" : "");
        });
    }

    // ---------------- lam
    auto* lam = app.add_subcommand("lam", "laminations");
    lam->require_subcommand(1);
    {
        auto* c = lam->add_subcommand("L0", "bridges over the atoms of the measure");
        theta_opt(c);
        depth_opt(c, 4);
        c->add_option("--M", M, "measure cap")->capture_default_str();
        lam_out(c);
        c->callback([&] {
            cap_depth(depth);
            emit(build_L0(Angle::parse(theta), depth, M), lo);
        });
        c = lam->add_subcommand("L", "pullback lamination under x -> 4x");
        theta_opt(c);
        depth_opt(c, 4);
        lam_out(c);
        c->callback([&] {
            cap_depth(depth);
            // 4^depth bridges at the last level
            if (depth > 10 && !unsafe_limits) throw domain_error("L above depth 10 needs --unsafe-limits");
            emit(build_L(Angle::parse(theta), depth), lo);
        });
        c = lam->add_subcommand("two-sided", "two-sided pullback lamination under x -> -2x");
        theta_opt(c);
        depth_opt(c, 6);
        lam_out(c);
        c->callback([&] {
            cap_depth(depth);
            emit(build_2L(Angle::parse(theta), depth), lo);
        });
        c = lam->add_subcommand("mirror", "outside mirror of a leaf file");
        c->add_option("--leaves-in", leaves_in, "leaf file")->required();
        lam_out(c);
        c->callback([&] {
            Lamination in;
            for (auto& l : parse_leaves(read_file(leaves_in)).side(Side::inside)) in.add(l);
            emit(mirror_outside(in), lo);
        });
        c = lam->add_subcommand("cross", "do two chords cross");
        c->add_option("--leaf", leaf_s, "p/q,r/s")->required();
        c->add_option("--with", with_s, "p/q,r/s")->required();
        c->callback([&] { std::printf("%s\n", leaves_cross(parse_leaf(leaf_s), parse_leaf(with_s)) ? "cross" : "no crossing"); });
        c = lam->add_subcommand("quadratic", "quadratic invariant lamination of y0");
        c->add_option("--y0", y0, "angle p/q")->required();
        depth_opt(c, 4);
        c->add_option("--test-leaf", test_leaf, "only test membership of p/q,r/s");
        lam_out(c);
        c->callback([&] {
            Angle y = Angle::parse(y0);
            if (!test_leaf.empty()) {
                std::printf("%s\n", leaf_in_quadratic_lamination(y, parse_leaf(test_leaf)) ? "leaf" : "not a leaf");
                return;
            }
            cap_depth(depth);
            emit(build_quadratic_lamination(y, depth), lo);
        });
        c = lam->add_subcommand("basilica", "basilica lamination");
        depth_opt(c, 6);
        lam_out(c);
        c->callback([&] {
            cap_depth(depth);
            emit(build_basilica(depth), lo);
        });
        c = lam->add_subcommand("mate", "mating of two quadratic laminations");
        c->add_option("--y1", y1, "inside lamination y0")->required();
        c->add_option("--y2", y2, "outside lamination y0")->required();
        depth_opt(c, 4);
        lam_out(c);
        c->callback([&] {
            cap_depth(depth);
            emit(mate(build_quadratic_lamination(Angle::parse(y1), depth),
                      build_quadratic_lamination(Angle::parse(y2), depth)),
                 lo);
        });
        c = lam->add_subcommand("check-invariance", "invariance under x -> -2x");
        c->add_option("--theta", theta, "check 2L(theta) built one level deeper");
        c->add_option("--leaves-in", leaves_in, "check a leaf file instead");
        depth_opt(c, 5);
        c->callback([&] {
            cap_depth(depth);
            Lamination L;
            if (!leaves_in.empty())
                L = parse_leaves(read_file(leaves_in));
            else if (!theta.empty())
                L = build_2L(Angle::parse(theta), depth + 1);
            else
                throw domain_error("give --theta or --leaves-in");
            auto r = check_two_sided_invariance(L, depth);
            std::printf("%zu leaves checked, %zu violations\n", r.checked, r.violations.size());
            for (auto& v : r.violations) std::printf("%s\n", v.c_str());
            if (!r.ok()) status = kDomainExit;
        });
        c = lam->add_subcommand("regions", "complementary regions of the inside leaves");
        theta_opt(c);
        depth_opt(c, 4);
        c->callback([&] {
            cap_depth(depth);
            auto R = complementary_regions(build_2L(Angle::parse(theta), depth).side(Side::inside));
            std::printf("%zu regions\n", R.size());
            for (auto& r : R) {
                std::string s;
                for (auto& b : r) s += std::string(s.empty() ? "" : " ") + (b.chord ? "chord " : "arc ") + b.from.str() + ">" + b.to.str();
                std::printf("%s\n", s.c_str());
            }
        });
    }

    // ---------------- sym
    auto* sym = app.add_subcommand("sym", "binary addresses");
    sym->require_subcommand(1);
    {
        auto* c = sym->add_subcommand("critical-address", "the two addresses of the critical leaf");
        theta_opt(c);
        c->add_flag("--alt-indexing", alt, "use the shifted index convention (debugging)");
        c->callback([&] {
            Angle t = Angle::parse(theta);
            if (alt) {
                BitSeq d = critical_body_alt(t);
                std::printf("%s\n%s\n", Address{0, d}.str().c_str(), Address{1, d}.str().c_str());
                return;
            }
            auto [x, y] = critical_address(t);
            std::printf("%s\n%s\n", x.str().c_str(), y.str().c_str());
        });
        c = sym->add_subcommand("equiv", "are two addresses identified");
        theta_opt(c);
        c->add_option("--x", x_addr, "address")->required();
        c->add_option("--y", y_addr, "address")->required();
        c->callback([&] {
            bool e = addr_equivalent(Address::parse(x_addr), Address::parse(y_addr), Angle::parse(theta));
            std::printf("%s\n", e ? "equivalent" : "not equivalent");
        });
        c = sym->add_subcommand("angle-to-address", "address of an angle, or the angle of an address");
        c->add_option("--angle", angle_s, "angle p/q");
        c->add_option("--address", address, "address, for the reverse direction");
        c->callback([&] {
            if (!angle_s.empty())
                std::printf("%s\n", angle_to_address(Angle::parse(angle_s)).str().c_str());
            else if (!address.empty())
                std::printf("%s\n", address_to_angle(Address::parse(address)).str().c_str());
            else
                throw domain_error("give --angle or --address");
        });
        c = sym->add_subcommand("shift", "shift of an address");
        c->add_option("--address", address, "address")->required();
        c->callback([&] { std::printf("%s\n", shift(Address::parse(address)).str().c_str()); });
        c = sym->add_subcommand("match-leaves", "leaves against the address identifications");
        theta_opt(c);
        depth_opt(c, 8);
        c->callback([&] {
            cap_depth(depth);
            auto r = leaf_addresses_match(Angle::parse(theta), depth);
            std::printf("%ld leaves, %ld pairs, %zu mismatches\n", r.leaves_checked, r.pairs_checked, r.mismatches.size());
            for (auto& s : r.mismatches) std::printf("%s\n", s.c_str());
            if (!r.ok()) status = kDomainExit;
        });
        c = sym->add_subcommand("cells", "finite words of length n");
        c->add_option("--n", n, "length")->capture_default_str();
        c->callback([&] {
            cap_depth(n);
            for (auto& w : cells_at_depth(n)) std::printf("%s\n", w.empty() ? "(empty)" : w.c_str());
        });
        c = sym->add_subcommand("reg-ray", "image or preimages of a regulated ray symbol");
        c->add_option("--symbol", symbol, "e.g. G(0;1/4,[1/2])")->required();
        c->add_flag("--preimage", preimage, "print the two preimages");
        c->callback([&] {
            auto g = RegulatedRaySymbol::parse(symbol);
            if (preimage) {
                auto [u, v] = regulated_ray_preimage(g);
                std::printf("%s\n%s\n", u.str().c_str(), v.str().c_str());
            } else {
                std::printf("%s\n", regulated_ray_image(g).str().c_str());
            }
        });
    }

    // ---------------- dyn
    auto* dyn = app.add_subcommand("dyn", "numerics for f_a(z) = a/(z^2+2z)");
    dyn->require_subcommand(1);
    {
        auto raster_opts = [&](CLI::App* c) {
            c->add_option("--bounds", bounds_s, "xmin,xmax,ymin,ymax")->capture_default_str();
            c->add_option("--size", size_s, "WIDTHxHEIGHT")->capture_default_str();
            c->add_option("--iterations", iterations, "iteration cap")->capture_default_str();
            c->add_option("--out", out, "output .ppm or .pgm, with a .hdr sidecar");
            c->add_option("--threads", threads, "worker threads, 0 for all cores")->capture_default_str();
        };
        auto* c = dyn->add_subcommand("m2", "parameter plane raster");
        raster_opts(c);
        c->callback([&] {
            cap_iterations(iterations);
            auto [w, h] = parse_size(size_s);
            auto r = m2_raster(parse_bounds(bounds_s), w, h, (int)iterations, (int)threads);
            long members = std::count(r.values.begin(), r.values.end(), kMember);
            std::printf("%dx%d, %ld members\n", r.width, r.height, members);
            write_raster(r, out);
        });
        c = dyn->add_subcommand("julia", "Julia set raster");
        c->add_option("--a", a_s, "parameter re,im")->required();
        raster_opts(c);
        c->add_option("--method", method, "escape or inverse")->capture_default_str();
        c->add_option("--points", points, "inverse iteration points")->capture_default_str();
        c->add_option("--seed", seed, "inverse iteration seed")->capture_default_str();
        c->add_flag("--compare", compare, "run both methods and print their agreement");
        c->callback([&] {
            cap_iterations(iterations);
            auto [w, h] = parse_size(size_s);
            cd a = parse_complex(a_s);
            Bounds b = parse_bounds(bounds_s);
            if (compare) {
                auto e = julia_raster_escape(a, b, w, h, (int)iterations, (int)threads);
                auto v = julia_raster_inverse(a, b, w, h, points, (uint64_t)seed);
                std::printf("agreement %.4f\n", julia_agreement(e, v, 2));
                return;
            }
            Raster r;
            if (method == "escape")
                r = julia_raster_escape(a, b, w, h, (int)iterations, (int)threads);
            else if (method == "inverse")
                r = julia_raster_inverse(a, b, w, h, points, (uint64_t)seed);
            else
                throw domain_error("method is escape or inverse");
            std::printf("%dx%d %s\n", r.width, r.height, r.kind.c_str());
            write_raster(r, out);
        });
        c = dyn->add_subcommand("fixed", "fixed points and multipliers");
        c->add_option("--a", a_s, "parameter re,im")->required();
        c->callback([&] {
            cd a = parse_complex(a_s);
            for (cd z : fixed_points(a)) std::printf("%s  multiplier %s\n", fmt(z).c_str(), fmt(multiplier(a, z)).c_str());
        });
        c = dyn->add_subcommand("apply", "f_a(z) on the sphere");
        c->add_option("--a", a_s, "parameter re,im")->required();
        c->add_option("--z", z_s, "point re,im or inf")->required();
        c->callback([&] {
            SpherePoint pz = z_s == "inf" ? SpherePoint::infinity() : SpherePoint::finite(parse_complex(z_s));
            auto w = apply_f(parse_complex(a_s), pz);
            std::printf("%s\n", w.inf ? "inf" : fmt(w.z).c_str());
        });
        c = dyn->add_subcommand("attracted", "is z attracted to the cycle {0, inf}");
        c->add_option("--a", a_s, "parameter re,im")->required();
        c->add_option("--z", z_s, "point re,im or inf")->required();
        c->add_option("--iterations", iterations, "iteration cap")->capture_default_str();
        c->callback([&] {
            cap_iterations(iterations);
            SpherePoint pz = z_s == "inf" ? SpherePoint::infinity() : SpherePoint::finite(parse_complex(z_s));
            auto e = attracted_to_supercycle(parse_complex(a_s), pz, (int)iterations);
            if (e.attracted)
                std::printf("attracted after %d steps\n", e.iter);
            else
                std::printf("not attracted within %ld steps\n", iterations);
        });
        c = dyn->add_subcommand("green", "Green function of f^2");
        c->add_option("--a", a_s, "parameter re,im")->required();
        c->add_option("--z", z_s, "point re,im or inf")->required();
        c->add_option("--n", green_n, "truncation")->capture_default_str();
        c->callback([&] {
            SpherePoint pz = z_s == "inf" ? SpherePoint::infinity() : SpherePoint::finite(parse_complex(z_s));
            std::printf("%s\n", fmt(green_value(parse_complex(a_s), pz, (int)green_n)).c_str());
        });
        c = dyn->add_subcommand("boettcher", "Boettcher coordinate at infinity");
        c->add_option("--a", a_s, "parameter re,im")->required();
        c->add_option("--z", z_s, "point re,im")->required();
        c->callback([&] { std::printf("%s\n", fmt(boettcher_infty(parse_complex(a_s), parse_complex(z_s))).c_str()); });
        c = dyn->add_subcommand("ray", "dynamical ray");
        c->add_option("--a", a_s, "parameter re,im")->required();
        c->add_option("--base", base_s, "0 or inf")->capture_default_str();
        theta_opt(c);
        c->add_option("--from", s_from, "start potential")->capture_default_str();
        c->add_option("--to", s_to, "end potential")->capture_default_str();
        c->add_option("--steps", steps, "steps")->capture_default_str();
        c->add_option("--csv", csv, "write s,re,im,residual here instead of stdout");
        c->callback([&] {
            cap_iterations(steps);
            if (base_s != "0" && base_s != "inf") throw domain_error("base is 0 or inf");
            auto r = trace_dynamical_ray(parse_complex(a_s), base_s == "0" ? Basin::zero : Basin::infinity,
                                         Angle::parse(theta), s_from, s_to, (int)steps);
            write_csv(r, csv);
            if (r.crashed)
                std::fprintf(stderr, "crashed at %s, potential %s, f^%d of it is -1\n", fmt(r.crash_point).c_str(),
                             fmt(r.crash_potential).c_str(), r.crash_order);
            else if (!r.complete)
                throw numeric_failure(r.message);
        });
        c = dyn->add_subcommand("param-ray", "parameter ray in the a-plane");
        theta_opt(c);
        c->add_option("--from", s_from, "start potential")->capture_default_str();
        c->add_option("--to", s_to, "end potential")->capture_default_str();
        c->add_option("--steps", steps, "steps")->capture_default_str();
        c->add_option("--csv", csv, "write s,re,im,residual here instead of stdout");
        c->callback([&] {
            cap_iterations(steps);
            auto r = trace_parameter_ray(Angle::parse(theta), s_from, s_to, (int)steps);
            write_csv(r.path, csv);
            if (!r.path.complete) throw numeric_failure(r.path.message);
            std::fprintf(stderr, "landing estimate %s +- %s\n", fmt(r.landing).c_str(), fmt(r.error_bar).c_str());
        });
        c = dyn->add_subcommand("ray-leaves", "leaves of the exterior lamination from rays");
        theta_opt(c);
        c->add_option("--potential", potential, "potential of a on the parameter ray")->capture_default_str();
        depth_opt(c, 3);
        c->add_option("--samples", sweeps, "circle samples (odd)")->capture_default_str();
        c->callback([&] {
            if (depth > 6 && !unsafe_limits) throw domain_error("ray leaves above depth 6 need --unsafe-limits");
            cap_depth(depth);
            Angle t = Angle::parse(theta);
            auto P = trace_parameter_ray(t, std::max(8.0, potential * 2), potential, 300);
            if (!P.path.complete) throw numeric_failure(P.path.message);
            std::vector<cd> path;
            for (auto& q : P.path.points) path.push_back(q.z);
            auto J = track_julia_circle(path, (int)sweeps);
            auto got = ray_leaf_endpoints(J.a, t, (int)depth, J);
            std::printf("a = %s\n", fmt(J.a).c_str());
            for (auto& l : got)
                std::printf("%c %d %.6f %.6f%s\n", l.inside ? 'I' : 'O', l.depth, l.t[0], l.t[1], l.resolved ? "" : " unresolved");
            auto cmp = compare_ray_leaves(got, build_2L(t, depth), 1e-2);
            std::printf("%zu of %zu matched 2L within 1e-2, %zu unresolved\n", cmp.matched, cmp.total, cmp.total - cmp.resolved);
            for (auto& s : cmp.misses) std::printf("%s\n", s.c_str());
        });
        c = dyn->add_subcommand("blaschke", "critical points of z(z+b)/(conj(b)z+1)");
        c->add_option("--b", b_s, "b re,im with 0 < |b| < 1")->required();
        c->add_option("--z", z_s, "also evaluate at z");
        c->callback([&] {
            cd b = parse_complex(b_s);
            auto [c1, c2] = blaschke_critical_points(b);
            std::printf("%s\n%s\n", fmt(c1).c_str(), fmt(c2).c_str());
            if (!z_s.empty()) std::printf("B(z) = %s\n", fmt(blaschke_eval(b, parse_complex(z_s))).c_str());
        });
    }

    // ---------------- check
    auto* chk = app.add_subcommand("check", "acceptance suites");
    chk->require_subcommand(1);
    for (std::string g : {"all", "angle", "lam", "sym", "dyn"}) {
        auto* c = chk->add_subcommand(g, "run the " + g + " criteria");
        c->add_option("--theta-set", theta_set, "generators for the lamination checks")->capture_default_str();
        depth_opt(c, 8);
        c->add_option("--threads", threads, "raster threads")->capture_default_str();
        c->callback([&, g] {
            cap_depth(depth);
            CheckOptions o;
            o.thetas.clear();
            for (auto& s : split(theta_set, ',')) o.thetas.push_back(Angle::parse(s));
            o.depth = depth;
            o.threads = (int)threads;
            int failed = 0;
            for (int id : check_group(g)) {
                auto r = run_check(id, o);
                std::printf("%s\n", format_check(r).c_str());
                std::fflush(stdout);
                failed += !r.pass;
            }
            if (failed) status = kDomainExit;
        });
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // apply --config before the real parse: find the subcommand chain first
        auto cpos = std::find_if(args.begin(), args.end(), [](const std::string& s) {
            return s == "--config" || s.rfind("--config=", 0) == 0;
        });
        if (cpos != args.end()) {
            std::string path;
            if (*cpos == "--config") {
                if (cpos + 1 == args.end()) throw CLI::ArgumentMismatch("--config needs a path");
                path = *(cpos + 1);
                args.erase(cpos, cpos + 2);
            } else {
                path = cpos->substr(9);
                args.erase(cpos);
            }
            CLI::App* target = &app;
            for (auto& a : args) {
                if (!a.empty() && a[0] == '-') continue;
                auto subs = target->get_subcommands([&](CLI::App* s) { return s->get_name() == a; });
                if (subs.empty()) break;
                target = subs.front();
            }
            auto extra = config_tokens(path, target, args);
            args.insert(args.end(), extra.begin(), extra.end());
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kUsageExit;
    } catch (const domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kDomainExit;
    } catch (const numeric_failure& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kNumericExit;
    }
    return status;
}
