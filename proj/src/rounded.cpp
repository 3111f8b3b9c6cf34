#include "happy/rounded.hpp"

#include "happy/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <vector>

namespace happy {

Ival::Ival(mpfr_prec_t prec) : prec_(prec) {
    mpfr_init2(lo_, prec);
    mpfr_init2(hi_, prec);
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
}

Ival::Ival(const Ival& other) : prec_(other.prec_) {
    mpfr_init2(lo_, prec_);
    mpfr_init2(hi_, prec_);
    mpfr_set(lo_, other.lo_, MPFR_RNDD);
    mpfr_set(hi_, other.hi_, MPFR_RNDU);
}

Ival::Ival(Ival&& other) noexcept : prec_(other.prec_) {
    mpfr_init2(lo_, 2); // throwaway, swapped out immediately
    mpfr_init2(hi_, 2);
    mpfr_swap(lo_, other.lo_);
    mpfr_swap(hi_, other.hi_);
}

Ival& Ival::operator=(const Ival& other) {
    if (this != &other) {
        mpfr_set_prec(lo_, other.prec_);
        mpfr_set_prec(hi_, other.prec_);
        prec_ = other.prec_;
        mpfr_set(lo_, other.lo_, MPFR_RNDD);
        mpfr_set(hi_, other.hi_, MPFR_RNDU);
    }
    return *this;
}

Ival& Ival::operator=(Ival&& other) noexcept {
    mpfr_swap(lo_, other.lo_);
    mpfr_swap(hi_, other.hi_);
    std::swap(prec_, other.prec_);
    return *this;
}

Ival::~Ival() {
    mpfr_clear(lo_);
    mpfr_clear(hi_);
}

Ival Ival::of_long(long v, mpfr_prec_t prec) {
    Ival r(prec);
    mpfr_set_si(r.lo_, v, MPFR_RNDD);
    mpfr_set_si(r.hi_, v, MPFR_RNDU);
    return r;
}

Ival Ival::of_ulong(unsigned long v, mpfr_prec_t prec) {
    Ival r(prec);
    mpfr_set_ui(r.lo_, v, MPFR_RNDD);
    mpfr_set_ui(r.hi_, v, MPFR_RNDU);
    return r;
}

Ival Ival::of_mpz(const mpz_class& v, mpfr_prec_t prec) {
    Ival r(prec);
    mpfr_set_z(r.lo_, v.get_mpz_t(), MPFR_RNDD);
    mpfr_set_z(r.hi_, v.get_mpz_t(), MPFR_RNDU);
    return r;
}

Ival Ival::of_mpq(const mpq_class& v, mpfr_prec_t prec) {
    Ival r(prec);
    mpfr_set_q(r.lo_, v.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(r.hi_, v.get_mpq_t(), MPFR_RNDU);
    return r;
}

Ival Ival::pow_dyadic(unsigned long base, long num, long den,
                      mpfr_prec_t prec) {
    if (den <= 0 || (den & (den - 1)) != 0)
        throw internal_error("pow_dyadic: denominator must be a power of two");
    if (base == 0)
        throw internal_error("pow_dyadic: base must be positive");
    // Exponent num/den is exact in binary: hold num in 64 bits and shift.
    mpfr_t e;
    mpfr_init2(e, 64);
    mpfr_set_si(e, num, MPFR_RNDN); // exact, |num| < 2^63
    int shift = 0;
    for (long d = den; d > 1; d >>= 1) ++shift;
    mpfr_div_2ui(e, e, static_cast<unsigned long>(shift), MPFR_RNDN); // exact

    mpfr_t b;
    mpfr_init2(b, 64);
    mpfr_set_ui(b, base, MPFR_RNDN); // exact

    Ival r(prec);
    mpfr_pow(r.lo_, b, e, MPFR_RNDD);
    mpfr_pow(r.hi_, b, e, MPFR_RNDU);
    mpfr_clear(b);
    mpfr_clear(e);
    return r;
}

Ival Ival::operator-() const {
    Ival r(prec_);
    mpfr_neg(r.lo_, hi_, MPFR_RNDD);
    mpfr_neg(r.hi_, lo_, MPFR_RNDU);
    return r;
}

Ival operator+(const Ival& a, const Ival& b) {
    Ival r(std::max(a.prec_, b.prec_));
    mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
}

Ival operator-(const Ival& a, const Ival& b) {
    Ival r(std::max(a.prec_, b.prec_));
    mpfr_sub(r.lo_, a.lo_, b.hi_, MPFR_RNDD);
    mpfr_sub(r.hi_, a.hi_, b.lo_, MPFR_RNDU);
    return r;
}

namespace {

// min/max over the four endpoint products (or quotients), computed under the
// target rounding direction. Slower than a sign-case analysis but it has no
// cases to get wrong, and nothing here is on a hot path.
template <int (*Op)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)>
Ival combine4(const Ival& a, const Ival& b) {
    Ival r(std::max(a.prec(), b.prec()));
    mpfr_t t;
    mpfr_init2(t, r.prec());
    mpfr_srcptr xs[2] = {a.lo(), a.hi()};
    mpfr_srcptr ys[2] = {b.lo(), b.hi()};
    bool first = true;
    for (auto x : xs)
        for (auto y : ys) {
            Op(t, x, y, MPFR_RNDD);
            if (first || mpfr_less_p(t, r.lo()))
                mpfr_set(r.lo_mut(), t, MPFR_RNDD);
            Op(t, x, y, MPFR_RNDU);
            if (first || mpfr_greater_p(t, r.hi()))
                mpfr_set(r.hi_mut(), t, MPFR_RNDU);
            first = false;
        }
    mpfr_clear(t);
    return r;
}

} // namespace

Ival operator*(const Ival& a, const Ival& b) {
    return combine4<mpfr_mul>(a, b);
}

Ival operator/(const Ival& a, const Ival& b) {
    // Reject divisors whose interval touches zero; quotient would be unbounded.
    if (mpfr_sgn(b.lo()) <= 0 && mpfr_sgn(b.hi()) >= 0)
        throw internal_error("interval division by an interval containing zero");
    return combine4<mpfr_div>(a, b);
}

Ival Ival::sqrt(const Ival& a) {
    if (mpfr_sgn(a.lo_) < 0)
        throw internal_error("interval sqrt of a possibly negative value");
    Ival r(a.prec_);
    mpfr_sqrt(r.lo_, a.lo_, MPFR_RNDD);
    mpfr_sqrt(r.hi_, a.hi_, MPFR_RNDU);
    return r;
}

Ival Ival::exp(const Ival& a) {
    Ival r(a.prec_);
    mpfr_exp(r.lo_, a.lo_, MPFR_RNDD);
    mpfr_exp(r.hi_, a.hi_, MPFR_RNDU);
    return r;
}

bool Ival::certainly_le(const Ival& o) const {
    return mpfr_lessequal_p(hi_, o.lo_) != 0;
}

bool Ival::certainly_lt(const Ival& o) const {
    return mpfr_less_p(hi_, o.lo_) != 0;
}

bool Ival::certainly_le_q(const mpq_class& q) const {
    return mpfr_cmp_q(hi_, q.get_mpq_t()) <= 0;
}

bool Ival::certainly_ge_q(const mpq_class& q) const {
    return mpfr_cmp_q(lo_, q.get_mpq_t()) >= 0;
}

bool Ival::certainly_le_z(const mpz_class& z) const {
    return mpfr_cmp_z(hi_, z.get_mpz_t()) <= 0;
}

bool Ival::certainly_ge_z(const mpz_class& z) const {
    return mpfr_cmp_z(lo_, z.get_mpz_t()) >= 0;
}

bool Ival::certainly_negative() const {
    return mpfr_sgn(hi_) < 0;
}

bool Ival::certainly_positive() const {
    return mpfr_sgn(lo_) > 0;
}

bool Ival::contains_q(const mpq_class& q) const {
    return mpfr_cmp_q(lo_, q.get_mpq_t()) <= 0 &&
           mpfr_cmp_q(hi_, q.get_mpq_t()) >= 0;
}

double Ival::width_d() const {
    mpfr_t w;
    mpfr_init2(w, prec_);
    mpfr_sub(w, hi_, lo_, MPFR_RNDU);
    double d = mpfr_get_d(w, MPFR_RNDU);
    mpfr_clear(w);
    return d;
}

std::string Ival::lo_str(int digits) const {
    return decimal_str(lo_, digits, MPFR_RNDD);
}

std::string Ival::hi_str(int digits) const {
    return decimal_str(hi_, digits, MPFR_RNDU);
}

std::string decimal_str(mpfr_srcptr v, int digits, mpfr_rnd_t rnd) {
    if (digits < 1) digits = 1;
    char* s = nullptr;
    // %R*g: significant-digit formatting with an explicit rounding mode.
    int n = mpfr_asprintf(&s, "%.*R*g", digits, rnd, v);
    if (n < 0)
        throw internal_error("mpfr_asprintf failed");
    std::string out(s);
    mpfr_free_str(s);
    return out;
}

namespace {

std::string decimal_fixed(const mpq_class& q, int digits, bool round_up) {
    if (digits < 1) digits = 1;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    mpz_class num = q.get_num() * scale;
    mpz_class scaled;
    if (round_up)
        mpz_cdiv_q(scaled.get_mpz_t(), num.get_mpz_t(), q.get_den().get_mpz_t());
    else
        mpz_fdiv_q(scaled.get_mpz_t(), num.get_mpz_t(), q.get_den().get_mpz_t());

    bool neg = scaled < 0;
    mpz_class mag = neg ? mpz_class(-scaled) : scaled;
    std::string s = mag.get_str();
    if (static_cast<int>(s.size()) <= digits)
        s.insert(0, std::string(static_cast<size_t>(digits) + 1 - s.size(), '0'));
    s.insert(s.size() - static_cast<size_t>(digits), ".");
    if (neg) s.insert(0, "-");
    return s;
}

} // namespace

std::string decimal_down(const mpq_class& q, int digits) {
    return decimal_fixed(q, digits, false);
}

std::string decimal_up(const mpq_class& q, int digits) {
    return decimal_fixed(q, digits, true);
}

} // namespace happy
