#pragma once
// Certified density bounds.
//
// A band density at digit count n transfers to the asymptotic upper/lower
// density once n clears three growth inequalities (the "bound check" below)
// and is damped by exp(delta(n)), delta < 0. Everything here is computed
// with outward rounding so emitted claims hold for the true values.

#include "happy/cycles.hpp"
#include "happy/digit_function.hpp"
#include "happy/distribution.hpp"
#include "happy/rounded.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace happy {

// The three inequalities gating certification at digit count n. A true
// verdict is certified (outward rounding can only turn true into false).
// Margins are enclosures of RHS - LHS, useful for reports.
struct BoundBReport {
    long n = 0;
    bool b1_ok = false, b2_ok = false, b3_ok = false;
    Ival b1_margin, b2_margin, b3_margin;

    bool all_ok() const { return b1_ok && b2_ok && b3_ok; }
};

BoundBReport check_bound_B(const DigitFunction& f, long n,
                           mpfr_prec_t prec = 256);

// Smallest n in [1, limit] whose bound check passes. Throws
// certification_error when none does.
long first_certifiable_n(const DigitFunction& f, long limit,
                         mpfr_prec_t prec = 256);

// Enclosure of delta(n) = 2/(1 - b^(n/4)) + 4 sigma / (sqrt(mu) (1 - b^(n/8))).
// Always negative; exp(delta(n)) is the certified damping factor.
Ival delta(const DigitFunction& f, long n, mpfr_prec_t prec = 256);

enum class CertKind {
    upper_density_lower_bound, // "upper density of the selection >= claimed"
    lower_density_upper_bound, // "lower density of the selection <= claimed"
};

struct BoundCertificate {
    CertKind kind;
    int base = 0;
    std::vector<long long> digit_image;
    // Orbits of the cycles the claim is about.
    std::vector<std::vector<std::uint64_t>> cycle_orbits;
    long n = 0;
    // Band density the claim was derived from; for a lower-density claim this
    // is the band density of the complement selection.
    DensityValue band;
    bool band_is_complement = false;
    Ival delta_enclosure;
    BoundBReport bound_check;
    // Full enclosure of the derived quantity; the claim is its lo endpoint
    // for an upper-density bound, its hi endpoint for a lower-density bound.
    Ival claimed_enclosure;
    mpfr_prec_t precision = 0;

    // ">=0.185773..." or "<=0.113789...", rounded so the printed claim is
    // still implied by the computed one.
    std::string claimed_str(int digits = 30) const;
    double claimed_d() const;
    mpfr_srcptr claimed_endpoint() const;

    std::string to_json(int digits = 30) const;
    std::string to_text(int digits = 30) const;
};

// Certify "upper density of sel >= band.lo * exp(delta(n))". Requires 4 | n
// and a passing bound check, else certification_error.
BoundCertificate certify_upper(const DigitFunction& f, const CycleSet& cycles,
                               const CycleSelection& sel, long n,
                               const DensityValue& band,
                               mpfr_prec_t prec = 256);

// Certify "lower density of sel <= 1 - complement_band.lo * exp(delta(n))".
// complement_band must be the band density of the complement of sel at n.
BoundCertificate certify_lower(const DigitFunction& f, const CycleSet& cycles,
                               const CycleSelection& sel, long n,
                               const DensityValue& complement_band,
                               mpfr_prec_t prec = 256);

// (1 - 1/lambda^2) * density / (1 + 2 sigma_y lambda / interval_size),
// rounded outward: the density kept after shifting a window by a random
// offset with deviation sigma_y. lambda must be certainly positive.
Ival lemma_shift_bound(const mpq_class& density, const mpz_class& interval_size,
                       const Ival& sigma_y, const Ival& lambda,
                       mpfr_prec_t prec = 256);

// Window transfer at digit count n2 (which may be astronomically large, hence
// mpz): checks that [i_left, i_left + i_size - 1] sits inside the certified
// window J(n2, lambda) and returns the density bound that transfers to it.
struct WindowTransfer {
    Ival window_left, window_right; // J endpoints
    Ival bound;                     // certified via lo endpoint
};

WindowTransfer theorem_window_transfer(const DigitFunction& f,
                                       const mpz_class& n2, const Ival& lambda,
                                       const mpz_class& i_left,
                                       const mpz_class& i_size,
                                       const DensityValue& window_density,
                                       mpfr_prec_t prec = 256);

// Largest n2 divisible by 4 with
//   1 + (3/4) mu n2 + b^(n/8) sigma sqrt((3/4) n2) <= a,
// for a in [base^(n-1), base^n]. Requires a passing bound check at n.
// Postconditions, re-verified independently: 4 | n2,
// base^(n-1)/mu <= n2 <= (4/(3 mu)) base^n, and 0 <= a - f(n2) <= 3 mu + 1.
mpz_class find_n2(const DigitFunction& f, long n, const mpz_class& a,
                  mpfr_prec_t prec = 256);

} // namespace happy
