#include <catch_amalgamated.hpp>

#include <lamina/lamination.hpp>

#include <random>

using namespace lamina;

namespace {

const std::vector<Angle> gens = {Angle(1, 2), Angle(1, 6), Angle(5, 12)};

Leaf I(long p, long q, long r, long s) { return Leaf(Angle(p, q), Angle(r, s)); }

bool brute_noncrossing(const std::vector<Leaf>& v)
{
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = i + 1; j < v.size(); ++j)
            if (leaves_cross(v[i], v[j])) return false;
    return true;
}

size_t count_elements(const std::string& svg, const std::string& tag)
{
    size_t n = 0, pos = 0;
    while ((pos = svg.find(tag, pos)) != std::string::npos) {
        ++n;
        pos += tag.size();
    }
    return n;
}

}  // namespace

TEST_CASE("crossing predicate")
{
    CHECK(leaves_cross(I(0, 1, 1, 2), I(1, 4, 3, 4)));
    CHECK_FALSE(leaves_cross(I(0, 1, 1, 4), I(1, 2, 3, 4)));
    CHECK_FALSE(leaves_cross(I(0, 1, 1, 4), I(0, 1, 1, 2)));
    CHECK_FALSE(leaves_cross(I(1, 8, 7, 8), I(1, 4, 3, 4)));  // nested

    // the sweep agrees with brute force on random chord sets
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Leaf> v;
        int n = std::uniform_int_distribution<int>(1, 7)(rng);
        while ((int)v.size() < n) {
            long p = std::uniform_int_distribution<long>(0, 11)(rng), q = std::uniform_int_distribution<long>(0, 11)(rng);
            if (p != q) v.push_back(I(p, 12, q, 12));
        }
        REQUIRE(find_crossing(v).has_value() == !brute_noncrossing(v));
    }
}

TEST_CASE("L0 from the measure")
{
    auto L = build_L0(Angle(1, 6), 0);
    REQUIRE(L.size() == 1);
    CHECK(L.leaves()[0].a == Angle(11, 60));
    CHECK(L.leaves()[0].b == Angle(41, 60));

    auto L1 = build_L0(Angle(1, 2), 1);
    REQUIRE(L1.size() == 3);
    CHECK(L1.contains(Side::inside, Angle(1, 4), Angle(3, 4)));
    for (auto& l : L1.leaves())
        if (l.depth == 1) CHECK(l.b.value() - l.a.value() == mpq_class(1, 8));

    for (auto& g : gens) {
        auto L5 = build_L0(g, 5);
        CHECK_FALSE(find_crossing(L5).has_value());
        // quadrupling a non-l0 leaf gives a leaf or a coincident pair
        for (auto& l : L5.leaves()) {
            if (l.depth == 0 || l.depth == 5) continue;
            Angle p = l.a.times(4), q = l.b.times(4);
            CHECK((p == q || L5.contains(Side::inside, p, q)));
        }
    }
}

TEST_CASE("L by pullback")
{
    auto L = build_L(Angle(1, 2), 1);
    REQUIRE(L.size() == 5);
    CHECK(L.contains(Side::inside, Angle(1, 4), Angle(3, 4)));
    for (long k = 0; k < 4; ++k)
        CHECK(L.contains(Side::inside, Angle(mpq_class(1, 16) + mpq_class(k, 4)), Angle(mpq_class(3, 16) + mpq_class(k, 4))));

    for (auto& g : gens) {
        for (long d = 0; d <= 6; ++d) {
            auto Ld = build_L(g, d);
            Angle x = x0_digits(g);
            REQUIRE(Ld.contains(Side::inside, x, x + mpq_class(1, 2)));
            REQUIRE_FALSE(find_crossing(Ld).has_value());
        }
        auto L6 = build_L(g, 6);
        for (auto& l : L6.leaves()) {
            mpq_class len = l.b.value() - l.a.value();
            len = std::min(len, mpq_class(1 - len));
            REQUIRE(len == mpq_class(1, 2) * pow2q(-2 * l.depth));
            REQUIRE(L6.contains(Side::inside, l.a + mpq_class(1, 2), l.b + mpq_class(1, 2)));
        }
        // bridges over atoms are pullbacks of sigma0; L also holds the pullbacks inside sigma0
        auto L0 = build_L0(g, 4);
        for (auto& l : L0.leaves()) CHECK(L6.find(Side::inside, l.a, l.b)->depth == l.depth);
        CHECK(L0.size() < build_L(g, 4).size());
    }
}

TEST_CASE("two-sided pullback")
{
    auto L0 = build_2L(Angle(1, 2), 0);
    REQUIRE(L0.size() == 1);
    CHECK(L0.contains(Side::inside, Angle(1, 4), Angle(3, 4)));
    auto L1 = build_2L(Angle(1, 2), 1);
    CHECK(L1.contains(Side::outside, Angle(1, 8), Angle(3, 8)));
    CHECK(L1.contains(Side::outside, Angle(5, 8), Angle(7, 8)));
    CHECK(L1.count(Side::outside) == 2);
    auto L2 = build_2L(Angle(1, 2), 2);
    CHECK(L2.contains(Side::inside, Angle(5, 16), Angle(7, 16)));
    CHECK(L2.contains(Side::inside, Angle(13, 16), Angle(15, 16)));
    CHECK(L2.count(Side::inside) == 5);

    for (auto& g : gens) {
        auto L = build_2L(g, 8);
        REQUIRE_FALSE(find_crossing(L).has_value());
        for (long d = 0; d <= 8; ++d) {
            auto lhs = build_2L(g, d);
            auto rhs = merge(build_L(g, d / 2), mirror_outside(build_L(g, (d + 1) / 2)), LamKind::twoSided);
            REQUIRE(same_leaf_sets(lhs, rhs));
            // L counts x -> x^4 pullbacks, two-sided depth counts x -> 1/x^2 pullbacks
            for (auto& l : rhs.leaves())
                REQUIRE(lhs.find(l.side, l.a, l.b)->depth == (l.side == Side::inside ? 2 * l.depth : l.depth));
        }
    }
}

TEST_CASE("outside mirror")
{
    Lamination L;
    L.add(I(1, 4, 3, 4));
    CHECK(mirror_outside(L).size() == 0);
    Lamination M;
    M.add(I(1, 16, 3, 16));
    auto m = mirror_outside(M);
    REQUIRE(m.size() == 1);
    CHECK(m.contains(Side::outside, Angle(7, 8), Angle(5, 8)));
    CHECK(mirror_outside(Lamination{}).size() == 0);
}

TEST_CASE("two-sided invariance")
{
    for (auto& g : gens) {
        auto rep = check_two_sided_invariance(build_2L(g, 6), 5);
        CHECK(rep.ok());
        CHECK(rep.checked > 0);
    }
    Lamination adv;
    adv.add(I(0, 1, 1, 3));
    auto bad = check_two_sided_invariance(adv, 0);
    CHECK_FALSE(bad.ok());
    bool backward = false;
    for (auto& v : bad.violations) backward |= v.rfind("backward", 0) == 0;
    CHECK(backward);
    // only the critical leaf: its image collapses to a point
    auto one = build_2L(Angle(1, 2), 0);
    auto r1 = check_two_sided_invariance(one, 0);
    for (auto& v : r1.violations) CHECK(v.rfind("forward", 0) != 0);
}

TEST_CASE("quadratic laminations")
{
    Angle y(1, 3);
    CHECK(leaf_in_quadratic_lamination(y, I(1, 6, 2, 3)));
    CHECK(leaf_in_quadratic_lamination(y, I(1, 3, 2, 3)));
    CHECK(leaf_in_quadratic_lamination(Angle(0, 1), I(0, 1, 1, 4)));
    CHECK_FALSE(leaf_in_quadratic_lamination(Angle(0, 1), I(1, 8, 5, 8)));

    auto L0 = build_quadratic_lamination(Angle(0, 1), 1);
    CHECK(L0.size() == 5);
    for (auto l : {I(0, 1, 1, 4), I(0, 1, 3, 4), I(1, 2, 1, 4), I(1, 2, 3, 4), I(0, 1, 1, 2)})
        CHECK(L0.contains(Side::inside, l.a, l.b));

    auto L13 = build_quadratic_lamination(y, 2);
    CHECK(L13.contains(Side::inside, Angle(1, 3), Angle(2, 3)));
    CHECK(L13.contains(Side::inside, Angle(1, 6), Angle(1, 3)));

    // touching l0 is allowed, so a periodic y0 admits crossing chords:
    // {0,1/4} and {1/8,1/2} both pass for y0 = 0
    CHECK(find_crossing(build_quadratic_lamination(Angle(0, 1), 2)).has_value());
    CHECK(leaf_in_quadratic_lamination(Angle(0, 1), I(1, 8, 1, 2)));

    for (auto yy : {Angle(0, 1), Angle(1, 3), Angle(7, 20), Angle(7, 12), Angle(1, 5), Angle(3, 10), Angle(11, 24)}) {
        for (long d = 0; d <= 6; ++d) {
            auto L = build_quadratic_lamination(yy, d);
            REQUIRE(L.contains(Side::inside, Angle(yy.value() / 2), Angle(yy.value() / 2 + mpq_class(1, 2))));
            if (!is_periodic(yy)) REQUIRE_FALSE(find_crossing(L).has_value());
        }
        // images of leaves stay in the lamination when their endpoints are on the grid
        auto L = build_quadratic_lamination(yy, 5);
        std::set<mpq_class> pts;
        for (auto& l : L.leaves()) {
            pts.insert(l.a.value());
            pts.insert(l.b.value());
        }
        for (auto& l : L.leaves()) {
            Angle p = doubled(l.a), q = doubled(l.b);
            if (p == q || !pts.count(p.value()) || !pts.count(q.value())) continue;
            REQUIRE(L.contains(Side::inside, p, q));
        }
    }
}

TEST_CASE("basilica")
{
    auto B0 = build_basilica(0);
    REQUIRE(B0.size() == 1);
    CHECK(B0.contains(Side::inside, Angle(1, 3), Angle(2, 3)));
    auto B1 = build_basilica(1);
    CHECK(B1.size() == 2);
    CHECK(B1.contains(Side::inside, Angle(1, 6), Angle(5, 6)));
    auto B2 = build_basilica(2);
    CHECK(B2.contains(Side::inside, Angle(1, 12), Angle(11, 12)));
    CHECK(B2.contains(Side::inside, Angle(5, 12), Angle(7, 12)));

    auto B = build_basilica(10);
    CHECK(B.size() == 1024);
    CHECK_FALSE(find_crossing(B).has_value());
    // quadratic invariance: antipodal pairs and images
    for (auto& l : B.leaves()) {
        REQUIRE(B.contains(Side::inside, l.a + mpq_class(1, 2), l.b + mpq_class(1, 2)));
        REQUIRE(B.contains(Side::inside, doubled(l.a), doubled(l.b)));
        REQUIRE(leaf_in_quadratic_lamination(Angle(1, 3), l));
    }
}

TEST_CASE("mating")
{
    CHECK(mate(Lamination{}, Lamination{}).size() == 0);
    auto B = build_basilica(0);
    auto M = mate(B, B);
    CHECK(M.contains(Side::inside, Angle(1, 3), Angle(2, 3)));
    CHECK(M.contains(Side::outside, Angle(2, 3), Angle(1, 3)));
    auto Q = build_quadratic_lamination(Angle(1, 5), 2);
    auto M2 = mate(build_basilica(3), Q);
    CHECK(M2.count(Side::outside) == Q.size());
    for (auto& l : Q.leaves()) CHECK(M2.contains(Side::outside, -l.a, -l.b));
}

TEST_CASE("complementary regions")
{
    CHECK(complementary_regions({}).size() == 1);
    CHECK(complementary_regions({I(0, 1, 1, 2)}).size() == 2);
    auto L0 = build_quadratic_lamination(Angle(0, 1), 1);
    auto regs = complementary_regions(L0.leaves());
    CHECK(regs.size() == 6);
    CHECK_THROWS_AS(complementary_regions({I(0, 1, 1, 2), I(1, 4, 3, 4)}), domain_error);
    for (auto& g : gens) {
        auto L = build_2L(g, 6).side(Side::inside);
        auto R = complementary_regions(L);
        CHECK(R.size() == L.size() + 1);
        size_t chord_sides = 0;
        for (auto& r : R)
            for (auto& p : r) chord_sides += p.chord;
        CHECK(chord_sides == 2 * L.size());
    }
}

TEST_CASE("svg")
{
    Lamination d;
    d.add(I(0, 1, 1, 2));
    auto s = render_svg(d);
    CHECK(count_elements(s, "<line ") == 1);
    CHECK(count_elements(s, "<path ") == 0);

    auto L = build_2L(Angle(1, 2), 4);
    auto svg = render_svg(L);
    CHECK(svg.find("<g id=\"inside\"") != std::string::npos);
    CHECK(svg.find("<g id=\"outside\"") != std::string::npos);
    CHECK(count_elements(svg, "<path ") + count_elements(svg, "<line ") == L.size());
    CHECK(svg == render_svg(build_2L(Angle(1, 2), 4)));

    auto e = render_svg(Lamination{});
    CHECK(count_elements(e, "<circle ") == 1);
    CHECK(count_elements(e, "<path ") == 0);

    auto round = parse_leaves(L.to_text());
    CHECK(same_leaf_sets(round, L));
}
