#include "happy/bounds.hpp"
#include "happy/errors.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace happy;

namespace {

mpz_class pow_z(int base, long e) {
    mpz_class out;
    mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(base),
                  static_cast<unsigned long>(e));
    return out;
}

// |x| sits inside (lo_digits, hi_digits) * 10^-exponent10.
bool abs_between(const Ival& x, long lo_digits, long hi_digits,
                 long exponent10) {
    Ival a = -x;
    mpq_class lo(lo_digits), hi(hi_digits);
    lo /= mpq_class(pow_z(10, exponent10));
    hi /= mpq_class(pow_z(10, exponent10));
    return a.certainly_ge_q(lo) && a.certainly_le_q(hi);
}

// The window budget 1 + (3/4) mu x + b^(n/8) sigma sqrt((3/4) x), composed
// here from public interval ops as a cross-check of the library's own.
Ival budget(const DigitFunction& f, long n, const mpz_class& x,
            mpfr_prec_t prec) {
    Ival tq = Ival::of_mpq(mpq_class(3, 4), prec);
    Ival xi = Ival::of_mpz(x, prec);
    return Ival::of_ulong(1, prec) + tq * Ival::of_mpq(f.digit_mean(), prec) * xi +
           Ival::pow_dyadic(static_cast<unsigned long>(f.base()), n, 8, prec) *
               Ival::sqrt(Ival::of_mpq(f.digit_variance(), prec)) *
               Ival::sqrt(tq * xi);
}

} // namespace

TEST_CASE("growth inequalities flip at the measured thresholds") {
    struct Case {
        DigitFunction f;
        long first;
    };
    Case cases[] = {
        {DigitFunction::power(2, 10), 13},
        {DigitFunction::power(3, 10), 17},
        {DigitFunction(7, {0, 1, 7, 4, 17, 9, 13}), 12},
    };
    for (const auto& c : cases) {
        CAPTURE(c.f.describe());
        BoundBReport last_fail = check_bound_B(c.f, c.first - 1);
        CHECK(!last_fail.all_ok());
        // The third inequality is the binding one for all three functions.
        CHECK(last_fail.b1_ok);
        CHECK(last_fail.b2_ok);
        CHECK(!last_fail.b3_ok);

        BoundBReport pass = check_bound_B(c.f, c.first);
        CHECK(pass.all_ok());
        CHECK(pass.b1_margin.certainly_positive());
        CHECK(pass.b2_margin.certainly_positive());
        CHECK(pass.b3_margin.certainly_positive());

        CHECK(first_certifiable_n(c.f, 100) == c.first);
        for (long n = c.first; n <= c.first + 20; ++n)
            CHECK(check_bound_B(c.f, n).all_ok());
    }
    CHECK_THROWS_AS(first_certifiable_n(cases[0].f, 5),
                    happy::certification_error);
}

TEST_CASE("delta enclosures match independent high-precision values") {
    DigitFunction sq = DigitFunction::power(2, 10);
    Ival d404 = delta(sq, 404);
    CHECK(d404.certainly_negative());
    // -6.3623...e-50
    CHECK(abs_between(d404, 636, 637, 52));

    DigitFunction cu = DigitFunction::power(3, 10);
    CHECK(abs_between(delta(cu, 864), 670, 671, 109));

    DigitFunction b7(7, {0, 1, 7, 4, 17, 9, 13});
    CHECK(abs_between(delta(b7, 384), 233, 234, 42));
    CHECK(abs_between(delta(b7, 176), 218, 219, 20));
}

TEST_CASE("delta is negative and vanishing") {
    DigitFunction f = DigitFunction::power(2, 10);
    for (long n = 8; n <= 96; n += 8) {
        Ival now = delta(f, n);
        Ival next = delta(f, n + 8);
        CHECK(now.certainly_negative());
        CHECK((-next).certainly_lt(-now));
    }
}

TEST_CASE("higher precision tightens the delta enclosure") {
    DigitFunction f = DigitFunction::power(2, 10);
    Ival coarse = delta(f, 40, 64);
    Ival fine = delta(f, 40, 512);
    CHECK(mpfr_greaterequal_p(fine.lo(), coarse.lo()));
    CHECK(mpfr_lessequal_p(fine.hi(), coarse.hi()));
    CHECK(fine.width_d() < coarse.width_d());
}

TEST_CASE("certificates require 4 | n and a passing bound check") {
    DigitFunction f = DigitFunction::power(2, 10);
    CycleSet cycles = find_cycles(f);
    CycleSelection sel(cycles, {0});
    DensityValue band = DensityValue::of_exact(mpq_class(1, 7));
    CHECK_THROWS_AS(certify_upper(f, cycles, sel, 18, band),
                    happy::certification_error);
    // 4 | 12, but the growth inequalities fail below 13.
    CHECK_THROWS_AS(certify_upper(f, cycles, sel, 12, band),
                    happy::certification_error);
}

TEST_CASE("upper certificate damps the band density by exp(delta)") {
    DigitFunction f = DigitFunction::power(2, 10);
    CycleSet cycles = find_cycles(f);
    CycleSelection sel(cycles, {0});
    ComputeOptions opts;
    TypeTable table = build_type_table(f, cycles, 16 * 81);
    DensityValue band = band_density(f, table, sel, 16, NumMode::exact, opts);

    BoundCertificate cert = certify_upper(f, cycles, sel, 16, band);
    CHECK(cert.kind == CertKind::upper_density_lower_bound);
    CHECK(cert.n == 16);
    CHECK(!cert.band_is_complement);
    CHECK(cert.bound_check.all_ok());
    CHECK(cert.claimed_str().substr(0, 2) == ">=");

    // exp(delta(16)) is about 0.8159, so the claim sits well below the band
    // density but within a factor of the damping.
    double b = band.lo_d();
    CHECK(cert.claimed_d() < b * 0.8160);
    CHECK(cert.claimed_d() > b * 0.8159);

    // Recomposing the damped product from public pieces must agree.
    Ival again = band.as_interval(256) * Ival::exp(delta(f, 16, 256));
    CHECK(mpfr_lessequal_p(again.lo(), cert.claimed_endpoint()));
    Ival slack = again - cert.claimed_enclosure;
    CHECK(slack.contains_q(mpq_class(0)));
}

TEST_CASE("lower certificate complements the other cycles") {
    DigitFunction f = DigitFunction::power(2, 10);
    CycleSet cycles = find_cycles(f);
    CycleSelection sel(cycles, {0});
    CycleSelection rest = CycleSelection::complement(cycles, sel);
    TypeTable table = build_type_table(f, cycles, 16 * 81);
    DensityValue comp = band_density(f, table, rest, 16, NumMode::exact, {});

    BoundCertificate cert = certify_lower(f, cycles, sel, 16, comp);
    CHECK(cert.kind == CertKind::lower_density_upper_bound);
    CHECK(cert.band_is_complement);
    CHECK(cert.claimed_str().substr(0, 2) == "<=");
    // 1 - comp.lo * exp(delta) stays above 1 - comp.lo and below 1.
    CHECK(cert.claimed_d() > 1.0 - comp.hi_d());
    CHECK(cert.claimed_d() < 1.0);
}

TEST_CASE("certificates serialize to complete JSON") {
    DigitFunction f = DigitFunction::power(2, 10);
    CycleSet cycles = find_cycles(f);
    CycleSelection sel(cycles, {1});
    TypeTable table = build_type_table(f, cycles, 16 * 81);
    DensityValue band = band_density(f, table, sel, 16, NumMode::exact, {});
    BoundCertificate cert = certify_upper(f, cycles, sel, 16, band, 320);

    auto j = nlohmann::json::parse(cert.to_json(20));
    CHECK(j["spec_version"] == 1);
    CHECK(j["kind"] == "upper_density_lower_bound");
    CHECK(j["function"]["base"] == 10);
    CHECK(j["function"]["digit_image"].size() == 10);
    CHECK(j["cycles"].size() == 1);
    CHECK(j["cycles"][0] ==
          nlohmann::json({4, 16, 37, 58, 89, 145, 42, 20}));
    CHECK(j["n"] == 16);
    CHECK(j["band_density"]["mode"] == "exact");
    CHECK(j["band_density"]["of"] == "selection");
    CHECK(j["delta"].contains("lo"));
    CHECK(j["bound_check"]["b3_ok"] == true);
    CHECK(j["claimed"] == cert.claimed_str(20));
    CHECK(j["precision_bits"] == 320);

    std::string text = cert.to_text();
    CHECK(text.find("claimed >=") != std::string::npos);
    CHECK(text.find("{4,16,37,58,89,145,42,20}") != std::string::npos);
}

TEST_CASE("shift bound has the closed-form value on rational inputs") {
    // (1 - 1/4) * (1/2) / (1 + 2*10*2/1000) = 75/208
    Ival got = lemma_shift_bound(mpq_class(1, 2), mpz_class(1000),
                                 Ival::of_ulong(10, 128),
                                 Ival::of_ulong(2, 128));
    CHECK(got.contains_q(mpq_class(75, 208)));
    CHECK(got.width_d() < 1e-30);

    // lambda = 1 keeps nothing.
    Ival zero = lemma_shift_bound(mpq_class(1, 2), mpz_class(1000),
                                  Ival::of_ulong(10, 128),
                                  Ival::of_ulong(1, 128));
    CHECK(zero.contains_q(mpq_class(0)));
    CHECK(zero.certainly_le_q(mpq_class(0)));

    // Never exceeds the input density.
    for (unsigned long lam : {1UL, 2UL, 5UL, 100UL}) {
        Ival v = lemma_shift_bound(mpq_class(1, 2), mpz_class(1000),
                                   Ival::of_ulong(10, 128),
                                   Ival::of_ulong(lam, 128));
        CHECK(v.certainly_le_q(mpq_class(1, 2)));
    }

    CHECK_THROWS_AS(lemma_shift_bound(mpq_class(1, 2), mpz_class(0),
                                      Ival::of_ulong(10, 128),
                                      Ival::of_ulong(2, 128)),
                    happy::validation_error);
    CHECK_THROWS_AS(lemma_shift_bound(mpq_class(1, 2), mpz_class(1000),
                                      Ival::of_ulong(10, 128),
                                      Ival::of_long(-2, 128)),
                    happy::validation_error);
}

TEST_CASE("find_n2 satisfies its postconditions and is maximal") {
    DigitFunction f = DigitFunction::power(2, 10);
    const long n = 16;
    const mpz_class a = pow_z(10, 15); // left edge of [10^15, 10^16]
    mpz_class n2 = find_n2(f, n, a);

    CHECK(n2 % 4 == 0);
    // 10^15 / mu <= n2 <= (4 / (3 mu)) 10^16, checked in exact integers.
    CHECK(n2 * 57 >= 2 * pow_z(10, 15));
    CHECK(3 * n2 * 57 <= 4 * 2 * pow_z(10, 16));

    // 0 <= a - budget(n2) <= 3 mu + 1, and budget(n2 + 4) overshoots.
    Ival at = budget(f, n, n2, 512);
    CHECK(at.certainly_le_z(a));
    Ival residual = Ival::of_mpz(a, 512) - at;
    CHECK(residual.certainly_le_q(3 * f.digit_mean() + 1));
    Ival next = budget(f, n, n2 + 4, 512);
    CHECK(mpfr_cmp_z(next.lo(), a.get_mpz_t()) > 0);

    CHECK_THROWS_AS(find_n2(f, n, mpz_class(5)), happy::validation_error);
    CHECK_THROWS_AS(find_n2(f, 8, pow_z(10, 7)),
                    happy::certification_error);
}

TEST_CASE("window transfer certifies containment and the kept density") {
    DigitFunction f = DigitFunction::power(2, 10);
    const long n = 20;
    const mpz_class a = pow_z(10, 19);
    mpz_class n2 = find_n2(f, n, a);
    const mpfr_prec_t prec = 256;
    Ival lambda = Ival::of_ulong(10, prec);

    // Left end of the certified window, rounded up to a safe integer.
    Ival tq = Ival::of_mpq(mpq_class(3, 4), prec);
    Ival n2i = Ival::of_mpz(n2, prec);
    Ival jleft = Ival::of_ulong(1, prec) +
                 tq * Ival::of_mpq(f.digit_mean(), prec) * n2i +
                 lambda * Ival::sqrt(Ival::of_mpq(f.digit_variance(), prec)) *
                     Ival::sqrt(tq * n2i);
    mpz_class i_left;
    mpfr_get_z(i_left.get_mpz_t(), jleft.hi(), MPFR_RNDU);
    i_left += 1;
    mpz_class i_size = pow_z(10, 15); // base^(3n/4)

    DensityValue d = DensityValue::of_exact(mpq_class(1, 2));
    WindowTransfer wt =
        theorem_window_transfer(f, n2, lambda, i_left, i_size, d, prec);
    CHECK(wt.bound.certainly_positive());
    CHECK(wt.bound.certainly_le_q(mpq_class(1, 2)));
    CHECK(mpfr_lessequal_p(wt.window_left.hi(), wt.window_right.lo()));

    // Recompose the kept-density formula from public pieces; the two
    // enclosures both contain the true value, so they cannot be disjoint.
    Ival sigma = Ival::sqrt(Ival::of_mpq(f.digit_variance(), prec));
    Ival denom = Ival::of_ulong(1, prec) +
                 Ival::sqrt(Ival::of_ulong(3, prec) * n2i) * sigma * lambda /
                     Ival::of_mpz(i_size, prec);
    Ival one = Ival::of_ulong(1, prec);
    Ival expected =
        (one - one / (lambda * lambda)) * (d.as_interval(prec) / denom);
    CHECK(!wt.bound.certainly_lt(expected));
    CHECK(!expected.certainly_lt(wt.bound));

    // Containment violations are certification errors that name the side.
    CHECK_THROWS_WITH_AS(
        theorem_window_transfer(f, n2, lambda, mpz_class(1), i_size, d, prec),
        doctest::Contains("window left"), happy::certification_error);
    CHECK_THROWS_WITH_AS(
        theorem_window_transfer(f, n2, lambda, i_left, n2, d, prec),
        doctest::Contains("window right"), happy::certification_error);
    CHECK_THROWS_AS(
        theorem_window_transfer(f, n2 + 1, lambda, i_left, i_size, d, prec),
        happy::certification_error);
}
