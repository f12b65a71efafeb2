#include <catch_amalgamated.hpp>

#include <lamina/measure.hpp>

#include <random>

using namespace lamina;

namespace {
const std::vector<Angle> gens = {Angle(1, 2), Angle(1, 6), Angle(5, 12), Angle(3, 10), Angle(7, 40)};
}

TEST_CASE("preimages")
{
    auto p = preimages_of_angle(Angle(1, 2), 1);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == Angle(1, 4));
    CHECK(p[1] == Angle(3, 4));
    auto q = preimages_of_angle(Angle(1, 6), 1);
    CHECK(q[0] == Angle(1, 12));
    CHECK(q[1] == Angle(7, 12));
    CHECK(preimages_of_angle(Angle(2, 7), 0) == std::vector<Angle>{Angle(2, 7)});
    for (auto& t : preimages_of_angle(Angle(5, 12), 5)) {
        Angle x = t;
        for (int i = 0; i < 5; ++i) x = doubled(x);
        REQUIRE(x == Angle(5, 12));
    }
}

TEST_CASE("atom weights")
{
    CHECK(mu_weight(Angle(1, 6), Angle(1, 6), 30) == mpq_class(1, 2));
    CHECK(mu_weight(Angle(1, 12), Angle(1, 6), 30) == mpq_class(1, 8));
    CHECK(mu_weight(Angle(1, 5), Angle(1, 6), 30) == 0);
    // periodic generator at 0: geometric series
    CHECK(mu_weight(Angle(0, 1), Angle(0, 1), 40) == mpq_class(2, 3) - mpq_class(2, 3) * pow2q(-82));
}

TEST_CASE("mass accounting")
{
    for (auto& g : gens) {
        for (long M = 0; M <= 10; ++M) {
            auto mu = atomic_measure(g, M);
            REQUIRE(mu.atoms.size() == (size_t(2) << M) - 1);
            REQUIRE(mu.mass() == 1 - pow2q(-(M + 1)));
            REQUIRE(mass_below_trunc(Angle(mpq_class(1) - pow2q(-200)), g, M) == 1 - pow2q(-(M + 1)));
        }
    }
}

TEST_CASE("sigma0 and periodic lengths")
{
    CHECK(sigma0_arc(Angle(1, 2)).start == Angle(1, 4));
    CHECK(sigma0_arc(Angle(1, 2)).end == Angle(3, 4));
    CHECK(sigma0_arc(Angle(1, 6)).start == Angle(11, 60));
    CHECK(sigma0_arc(Angle(1, 6)).end == Angle(41, 60));
    for (auto& g : gens) {
        auto a = sigma0_arc(g);
        CHECK(a.length() == mpq_class(1, 2));
        CHECK_FALSE(a.contains(Angle(0, 1)));
    }
    CHECK_THROWS_AS(sigma0_arc(Angle(1, 3)), domain_error);
    CHECK(sigma_lengths_periodic(1) == std::vector<mpq_class>{mpq_class(2, 3)});
    CHECK(sigma_lengths_periodic(2) == std::vector<mpq_class>{mpq_class(2, 15), mpq_class(8, 15)});
    CHECK(sigma_lengths_periodic(1).back() == mu_weight(Angle(0, 1), Angle(0, 1), 200) + mpq_class(2, 3) * pow2q(-402));
}

TEST_CASE("blow-up endpoints")
{
    for (auto& g : gens) {
        auto e = h_arc(g, g, 30);
        Angle x = x0_digits(g);
        CHECK(e.length == mpq_class(1, 2));
        CHECK(e.start.contains(x.value()));
        CHECK(e.end().contains(x.value() + mpq_class(1, 2)));
        CHECK(h_arc_exact(g, g).start == x);
        CHECK(mass_below(g, g) == x.value());
    }
    CHECK(h_arc(Angle(1, 5), Angle(1, 6), 20).length == 0);
    CHECK(h_arc(Angle(0, 1), Angle(1, 6), 20).start.lo == 0);
}

TEST_CASE("exact cdf matches truncations")
{
    std::mt19937_64 rng(3);
    for (auto& g : gens) {
        for (int i = 0; i < 40; ++i) {
            long q = std::uniform_int_distribution<long>(1, 300)(rng);
            Angle t(std::uniform_int_distribution<long>(0, q - 1)(rng), q);
            mpq_class exact = mass_below(t, g);
            for (long M : {4L, 12L, 24L}) {
                mpq_class lo = mass_below_trunc(t, g, M);
                REQUIRE(lo <= exact);
                REQUIRE(exact <= lo + pow2q(-(M + 1)));
            }
        }
    }
}

TEST_CASE("h is monotone of degree one with disjoint arcs")
{
    for (auto& g : gens) {
        auto mu = atomic_measure(g, 7);
        mpq_class prev_end(0), total(0);
        for (auto& a : mu.atoms) {
            Arc arc = h_arc_exact(a.angle, g);
            REQUIRE(arc.length() == a.weight);
            // arcs come in the same order as the atoms and never overlap
            REQUIRE(arc.start.value() >= prev_end);
            prev_end = arc.start.value() + arc.length();
            total += arc.length();
        }
        REQUIRE(prev_end <= 1);
        REQUIRE(total == mu.mass());
    }
}

TEST_CASE("semiconjugacy")
{
    Angle g(1, 6);
    Arc s0 = sigma0_arc(g);
    // exact endpoint bookkeeping: h(x0) = theta0, h(4 x0) = 2 theta0
    Arc a = h_arc_exact(g, g);
    Arc b = h_arc_exact(doubled(g), g);
    CHECK(a.start == s0.start);
    CHECK(b.length() == 0);
    CHECK(b.start == Angle(4 * s0.start.value()));

    auto rep0 = semiconjugacy_check(g, {Angle(0, 1)}, 20);
    CHECK(rep0.max_defect == 0);

    std::mt19937_64 rng(5);
    std::vector<Angle> samples;
    while (samples.size() < 40) {
        Angle u(mpq_class(std::uniform_int_distribution<long>(0, (1L << 40) - 1)(rng)) * pow2q(-40));
        if (!s0.contains(u)) samples.push_back(u);
    }
    auto rep = semiconjugacy_check(g, samples, 20);
    CHECK(rep.samples.size() == samples.size());
    CHECK(rep.max_defect <= 2 * pow2q(-21));
}
