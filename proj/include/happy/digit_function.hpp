#pragma once
// A digit-sum map: base b >= 2 plus an image h(0..b-1) applied to each base-b
// digit. h(0) = 0 and h(1) = 1 are required anchors, all entries nonnegative.

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace happy {

class DigitFunction {
  public:
    // Validates and precomputes derived quantities. Throws
    // invalid_length_error / violated_anchor_error / negative_entry_error.
    DigitFunction(int base, std::vector<long long> digit_image);

    // h(i) = i^exponent, the classic family (exponent 2, base 10 is the
    // original happy function).
    static DigitFunction power(int exponent, int base);

    int base() const { return base_; }
    const std::vector<long long>& digit_image() const { return image_; }

    // Largest digit image value.
    long long alpha() const { return alpha_; }

    // Least d with alpha*d < base^(d-1). For any n with at least d_star
    // digits, applying the map strictly decreases n, so every trajectory
    // eventually falls below base^(d_star-1) and stays there.
    int d_star() const { return d_star_; }

    // Mean and variance of the image of a uniformly random digit, exact.
    const mpq_class& digit_mean() const { return mean_; }
    const mpq_class& digit_variance() const { return variance_; }

    mpz_class apply(const mpz_class& n) const;
    std::uint64_t apply_u64(std::uint64_t n) const;

    // "base=10 h=[0,1,4,9,...]", used in logs and certificates.
    std::string describe() const;

  private:
    int base_;
    std::vector<long long> image_;
    long long alpha_;
    int d_star_;
    mpq_class mean_;
    mpq_class variance_;
};

} // namespace happy
