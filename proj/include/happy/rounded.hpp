#pragma once
// Directed-rounding interval scalar on top of MPFR.
//
// An Ival is a closed interval [lo, hi] of mpfr numbers at a fixed precision.
// Every operation rounds the lower endpoint toward -inf and the upper endpoint
// toward +inf, so for exact real inputs x in [a.lo, a.hi], y in [b.lo, b.hi]
// the true result of the operation always lies inside the returned interval.
// That outward rule is the only soundness contract in this file; everything
// downstream (densities, certificates) leans on it.
//
// Comparisons come in "certainly" form: certainly_le(b) means every point of
// *this is <= every point of b. A false return is not a refutation, the
// intervals may simply overlap. Callers that need a decision either way must
// retry at higher precision.

#include <mpfr.h>
#include <gmpxx.h>

#include <string>

namespace happy {

class Ival {
  public:
    explicit Ival(mpfr_prec_t prec = 128);
    Ival(const Ival& other);
    Ival(Ival&& other) noexcept;
    Ival& operator=(const Ival& other);
    Ival& operator=(Ival&& other) noexcept;
    ~Ival();

    mpfr_prec_t prec() const { return prec_; }

    // Point constructors. Values not representable at `prec` become a
    // one-ulp-wide enclosure.
    static Ival of_long(long v, mpfr_prec_t prec);
    static Ival of_ulong(unsigned long v, mpfr_prec_t prec);
    static Ival of_mpz(const mpz_class& v, mpfr_prec_t prec);
    static Ival of_mpq(const mpq_class& v, mpfr_prec_t prec);

    // base^(num/den) for a positive integer base. den must be a power of two
    // so the exponent itself is exact in binary; that covers every exponent
    // used by the bound and delta formulas (n/4, n/8, 3n/8, 5n/8, 3n/4).
    static Ival pow_dyadic(unsigned long base, long num, long den,
                           mpfr_prec_t prec);

    Ival operator-() const;
    friend Ival operator+(const Ival& a, const Ival& b);
    friend Ival operator-(const Ival& a, const Ival& b);
    friend Ival operator*(const Ival& a, const Ival& b);
    // Division requires a sign-definite divisor (0 strictly outside [b.lo, b.hi]).
    friend Ival operator/(const Ival& a, const Ival& b);

    // Monotone functions applied endpoint-wise. sqrt requires lo >= 0.
    static Ival sqrt(const Ival& a);
    static Ival exp(const Ival& a);

    bool certainly_le(const Ival& o) const;
    bool certainly_lt(const Ival& o) const;
    // hi <= q resp. lo >= q, exact comparison against a rational
    bool certainly_le_q(const mpq_class& q) const;
    bool certainly_ge_q(const mpq_class& q) const;
    bool certainly_le_z(const mpz_class& z) const;
    bool certainly_ge_z(const mpz_class& z) const;
    bool certainly_negative() const;
    bool certainly_positive() const;
    bool contains_q(const mpq_class& q) const;

    // True if the interval is a single representable point.
    bool is_point() const { return mpfr_equal_p(lo_, hi_) != 0; }

    double lo_d() const { return mpfr_get_d(lo_, MPFR_RNDD); }
    double hi_d() const { return mpfr_get_d(hi_, MPFR_RNDU); }
    double width_d() const;

    // Decimal renderings rounded in the endpoint's own direction, so the
    // printed pair still encloses the interval.
    std::string lo_str(int digits) const;
    std::string hi_str(int digits) const;

    mpfr_srcptr lo() const { return lo_; }
    mpfr_srcptr hi() const { return hi_; }
    // Builder access; caller is responsible for keeping lo <= hi.
    mpfr_ptr lo_mut() { return lo_; }
    mpfr_ptr hi_mut() { return hi_; }

  private:
    mpfr_t lo_;
    mpfr_t hi_;
    mpfr_prec_t prec_;
};

// Decimal string of v with `digits` significant digits, rounded in direction
// rnd (MPFR_RNDD gives a value <= v, MPFR_RNDU a value >= v).
std::string decimal_str(mpfr_srcptr v, int digits, mpfr_rnd_t rnd);

// Exact-rational decimals with `digits` places after the point, truncated
// toward -inf / +inf. Used when a density is known as an exact mpq.
std::string decimal_down(const mpq_class& q, int digits);
std::string decimal_up(const mpq_class& q, int digits);

} // namespace happy
