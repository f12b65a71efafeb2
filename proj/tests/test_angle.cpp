#include <catch_amalgamated.hpp>

#include <lamina/angle.hpp>

#include <random>

using namespace lamina;

namespace {

// long division, one bit at a time
std::vector<int> long_division(const Angle& t, int n)
{
    std::vector<int> out;
    mpq_class x = t.value();
    for (int i = 0; i < n; ++i) {
        x *= 2;
        int b = x >= 1 ? 1 : 0;
        out.push_back(b);
        if (b) x -= 1;
    }
    return out;
}

Angle random_nonodd(std::mt19937_64& rng, long maxden)
{
    for (;;) {
        long q = std::uniform_int_distribution<long>(2, maxden)(rng);
        if (q % 2) continue;
        long p = std::uniform_int_distribution<long>(1, q - 1)(rng);
        Angle a(p, q);
        if (!is_periodic(a)) return a;
    }
}

}  // namespace

TEST_CASE("doubling")
{
    CHECK(doubled(Angle(1, 3)) == Angle(2, 3));
    CHECK(doubled(Angle(3, 4)) == Angle(1, 2));
    CHECK(doubled(Angle(0, 1)) == Angle(0, 1));
    CHECK(Angle::parse("7/4") == Angle(3, 4));
    CHECK(Angle::parse("-1/4") == Angle(3, 4));
    CHECK_THROWS_AS(Angle::parse("1/0"), domain_error);
    CHECK_THROWS_AS(Angle::parse("x/3"), domain_error);
}

TEST_CASE("binary digits")
{
    CHECK(binary_digit(Angle(1, 2), 1) == 1);
    CHECK(binary_digit(Angle(1, 6), 3) == 1);
    CHECK(binary_digit(Angle(1, 3), 1) == 0);
    CHECK(binary_digit(Angle(1, 3), 2) == 1);

    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        long q = std::uniform_int_distribution<long>(1, 5000)(rng);
        long p = std::uniform_int_distribution<long>(0, q - 1)(rng);
        Angle t(p, q);
        auto ld = long_division(t, 64);
        BitSeq s = digit_stream(t);
        for (int m = 1; m <= 64; ++m) {
            REQUIRE(binary_digit(t, m) == ld[m - 1]);
            REQUIRE(s.bit(m) == ld[m - 1]);
        }
        REQUIRE(s.value() == t.value());
        REQUIRE(s.per != "1");
    }
}

TEST_CASE("digit streams")
{
    CHECK(digit_stream(Angle(1, 6)).str() == "0(01)");
    CHECK(digit_stream(Angle(0, 1)).str() == "(0)");
    CHECK(digit_stream(Angle(1, 4)).str() == "01(0)");
    CHECK(digit_stream(Angle(1, 3)).str() == "(01)");
    CHECK(to_digit_stream(make_bits("0", "1")).str() == "1(0)");
    CHECK(to_digit_stream(make_bits("", "1")).str() == "(0)");
}

TEST_CASE("orbit type")
{
    auto a = orbit_type(Angle(1, 3));
    CHECK(a.tag == OrbitTag::periodic);
    CHECK(a.period == 2);
    auto b = orbit_type(Angle(1, 6));
    CHECK(b.tag == OrbitTag::preperiodic);
    CHECK(b.preperiod == 1);
    CHECK(b.period == 2);
    CHECK(orbit_type(Angle(3, 8)).tag == OrbitTag::dyadic);
    CHECK(orbit_type(Angle(0, 1)).tag == OrbitTag::periodic);

    // q-fold doubling fixes theta iff the period divides q
    for (long den : {3L, 5L, 7L, 9L, 21L, 31L}) {
        for (long p = 1; p < den; ++p) {
            Angle t(p, den);
            auto ot = orbit_type(t);
            Angle x = t;
            for (long q = 1; q <= 12; ++q) {
                x = doubled(x);
                REQUIRE((x == t) == (q % ot.period == 0));
            }
        }
    }
}

TEST_CASE("nu")
{
    CHECK(nu(Angle(2, 7), 0) == 1);
    CHECK(nu(Angle(3, 5), 1) == 0);
    for (int m = 1; m < 20; ++m) CHECK(nu(Angle(1, 6), m) == 1);

    // eventually periodic with period dividing the orbit period
    for (auto t : {Angle(1, 6), Angle(5, 12), Angle(3, 10), Angle(7, 40), Angle(11, 56)}) {
        auto ot = orbit_type(t);
        for (long m = ot.preperiod + 1; m < 40; ++m) REQUIRE(nu(t, m) == nu(t, m + ot.period));
    }
}

TEST_CASE("x0 from series and digits")
{
    auto s = x0_series(Angle(1, 2), 30);
    CHECK(s.contains(mpq_class(1, 4)));
    CHECK(s.hi - s.lo == pow2q(-31));
    CHECK(x0_series(Angle(1, 6), 30).contains(mpq_class(11, 60)));
    CHECK(x0_digits(Angle(1, 2)) == Angle(1, 4));
    CHECK(x0_digits(Angle(1, 6)) == Angle(11, 60));
    CHECK(x0_bits(Angle(1, 6)).str() == "00(1011)");
    CHECK_THROWS_AS(x0_digits(Angle(1, 3)), domain_error);
    CHECK_THROWS_AS(x0_digits(Angle(0, 1)), domain_error);

    std::mt19937_64 rng(11);
    for (int i = 0; i < 60; ++i) {
        Angle t = random_nonodd(rng, 4096);
        Angle x = x0_digits(t);
        REQUIRE(x0_bits(t).bit(1) == 0);
        for (long M : {5L, 17L, 40L}) REQUIRE(x0_series(t, M).contains(x.value()));
    }
}

TEST_CASE("y0")
{
    CHECK(y0_from_theta(Angle(0, 1)) == Angle(1, 3));
    CHECK(y0_from_theta(Angle(1, 2)) == Angle(7, 12));
    CHECK(y0_from_theta(Angle(1, 6)) == Angle(7, 20));
}
