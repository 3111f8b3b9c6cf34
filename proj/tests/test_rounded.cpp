#include "happy/errors.hpp"
#include "happy/rounded.hpp"

#include <doctest.h>
#include <gmpxx.h>

using happy::Ival;

TEST_CASE("point constructors are exact where representable") {
    Ival three = Ival::of_long(3, 64);
    CHECK(three.is_point());
    CHECK(three.contains_q(mpq_class(3)));

    Ival big = Ival::of_mpz(mpz_class("1000000000000000000000000000000"), 128);
    CHECK(big.is_point()); // 1e30 needs ~100 bits, fits at 128

    Ival third = Ival::of_mpq(mpq_class(1, 3), 64);
    CHECK(!third.is_point());
    CHECK(third.contains_q(mpq_class(1, 3)));
    CHECK(third.width_d() < 1e-18);
}

TEST_CASE("arithmetic encloses the exact rational result") {
    // Fixed-seed random rationals pushed through every operator; the interval
    // result must contain the exact value computed in mpq.
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(12345);
    const mpfr_prec_t prec = 64;
    for (int trial = 0; trial < 200; ++trial) {
        mpq_class x(mpz_class(rng.get_z_bits(40)) - (mpz_class(1) << 39),
                    mpz_class(rng.get_z_bits(20)) + 1);
        mpq_class y(mpz_class(rng.get_z_bits(40)) - (mpz_class(1) << 39),
                    mpz_class(rng.get_z_bits(20)) + 1);
        x.canonicalize();
        y.canonicalize();
        Ival xi = Ival::of_mpq(x, prec);
        Ival yi = Ival::of_mpq(y, prec);
        CHECK((xi + yi).contains_q(x + y));
        CHECK((xi - yi).contains_q(x - y));
        CHECK((xi * yi).contains_q(x * y));
        if (y != 0 && !yi.contains_q(mpq_class(0)))
            CHECK((xi / yi).contains_q(x / y));
        CHECK((-xi).contains_q(-x));
    }
}

TEST_CASE("multiplication handles sign combinations") {
    // [-2,3] * [-5,7]: the extremes come from different endpoint pairs, so
    // sample points and both exact corners must land inside the product.
    mpq_class xs[] = {mpq_class(-2), mpq_class(0), mpq_class(3)};
    mpq_class ys[] = {mpq_class(-5), mpq_class(1, 3), mpq_class(7)};
    Ival hullx(64);
    mpfr_set_si(hullx.lo_mut(), -2, MPFR_RNDD);
    mpfr_set_si(hullx.hi_mut(), 3, MPFR_RNDU);
    Ival hully(64);
    mpfr_set_si(hully.lo_mut(), -5, MPFR_RNDD);
    mpfr_set_si(hully.hi_mut(), 7, MPFR_RNDU);
    Ival prod = hullx * hully;
    for (const auto& qx : xs)
        for (const auto& qy : ys) CHECK(prod.contains_q(qx * qy));
    // exact extreme corners
    CHECK(prod.contains_q(mpq_class(-15)));
    CHECK(prod.contains_q(mpq_class(21)));
}

TEST_CASE("division rejects divisor intervals through zero") {
    Ival num = Ival::of_long(1, 64);
    Ival den(64);
    mpfr_set_si(den.lo_mut(), -1, MPFR_RNDD);
    mpfr_set_si(den.hi_mut(), 1, MPFR_RNDU);
    CHECK_THROWS_AS(num / den, happy::internal_error);
}

TEST_CASE("pow_dyadic encloses the true power") {
    // 10^(8/4) = 100 exactly.
    Ival hundred = Ival::pow_dyadic(10, 8, 4, 96);
    CHECK(hundred.contains_q(mpq_class(100)));
    CHECK(hundred.width_d() < 1e-20);

    // 2^(3/8): raising the enclosure to the 8th power must straddle 8.
    Ival r = Ival::pow_dyadic(2, 3, 8, 96);
    Ival p = r;
    for (int i = 1; i < 8; ++i) p = p * r;
    CHECK(p.contains_q(mpq_class(8)));

    // Negative exponents give values below one.
    Ival inv = Ival::pow_dyadic(10, -101, 4, 96);
    CHECK(inv.certainly_positive());
    CHECK(inv.certainly_le_q(mpq_class(1, 1000000)));

    CHECK_THROWS_AS(Ival::pow_dyadic(10, 1, 3, 64), happy::internal_error);
}

TEST_CASE("sqrt and exp bracket known values") {
    Ival two = Ival::of_long(2, 128);
    Ival r = Ival::sqrt(two);
    CHECK((r * r).contains_q(mpq_class(2)));

    Ival e1 = Ival::exp(Ival::of_long(1, 128));
    CHECK(e1.lo_d() < 2.718281828459046);
    CHECK(e1.hi_d() > 2.718281828459045);
    CHECK(Ival::exp(Ival::of_long(0, 64)).contains_q(mpq_class(1)));

    Ival neg = Ival::of_long(-1, 64);
    CHECK_THROWS_AS(Ival::sqrt(neg), happy::internal_error);
}

TEST_CASE("certainly comparisons are one-sided") {
    Ival a(64), b(64);
    mpfr_set_si(a.lo_mut(), 1, MPFR_RNDD);
    mpfr_set_si(a.hi_mut(), 2, MPFR_RNDU);
    mpfr_set_si(b.lo_mut(), 2, MPFR_RNDD);
    mpfr_set_si(b.hi_mut(), 3, MPFR_RNDU);
    CHECK(a.certainly_le(b));
    CHECK(!a.certainly_lt(b)); // endpoints touch
    CHECK(!b.certainly_le(a));

    Ival c(64);
    mpfr_set_si(c.lo_mut(), 1, MPFR_RNDD);
    mpfr_set_si(c.hi_mut(), 3, MPFR_RNDU);
    // Overlap: neither order is certain.
    CHECK(!c.certainly_le(a));
    CHECK(!a.certainly_le(c));

    CHECK(a.certainly_ge_q(mpq_class(1)));
    CHECK(a.certainly_le_q(mpq_class(2)));
    CHECK(!a.certainly_le_q(mpq_class(3, 2)));
    CHECK(a.certainly_le_z(mpz_class(2)));
    CHECK(a.certainly_ge_z(mpz_class(1)));
    CHECK(a.certainly_positive());
    CHECK((-a).certainly_negative());
}

TEST_CASE("decimal strings round toward the stated side") {
    Ival third = Ival::of_mpq(mpq_class(1, 3), 128);
    CHECK(third.lo_str(5) == "0.33333");
    CHECK(third.hi_str(5) == "0.33334");

    CHECK(happy::decimal_down(mpq_class(1, 3), 5) == "0.33333");
    CHECK(happy::decimal_up(mpq_class(1, 3), 5) == "0.33334");
    CHECK(happy::decimal_down(mpq_class(2), 3) == "2.000");
    CHECK(happy::decimal_up(mpq_class(2), 3) == "2.000");
    CHECK(happy::decimal_down(mpq_class(-1, 3), 3) == "-0.334");
    CHECK(happy::decimal_up(mpq_class(-1, 3), 3) == "-0.333");
    CHECK(happy::decimal_down(mpq_class(1857731, 10000000), 6) == "0.185773");
}
