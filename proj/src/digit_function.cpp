#include "happy/digit_function.hpp"

#include "happy/errors.hpp"

#include <sstream>

namespace happy {

DigitFunction::DigitFunction(int base, std::vector<long long> digit_image)
    : base_(base), image_(std::move(digit_image)) {
    if (base_ < 2)
        throw validation_error("base must be at least 2, got " +
                               std::to_string(base_));
    if (image_.size() != static_cast<size_t>(base_))
        throw invalid_length_error(
            "digit image needs exactly " + std::to_string(base_) +
            " entries, got " + std::to_string(image_.size()));
    if (image_[0] != 0)
        throw violated_anchor_error("h(0) must be 0, got " +
                                    std::to_string(image_[0]));
    if (image_[1] != 1)
        throw violated_anchor_error("h(1) must be 1, got " +
                                    std::to_string(image_[1]));
    for (size_t i = 0; i < image_.size(); ++i)
        if (image_[i] < 0)
            throw negative_entry_error("h(" + std::to_string(i) +
                                       ") is negative: " +
                                       std::to_string(image_[i]));

    alpha_ = 0;
    for (long long v : image_)
        if (v > alpha_) alpha_ = v;

    // alpha >= 1 (h(1) = 1), so d = 1 never qualifies and the loop starts
    // finding base^(d-1) growth beating linear alpha*d quickly.
    mpz_class pow = 1; // base^(d-1) at d = 1
    int d = 1;
    while (mpz_class(static_cast<long>(alpha_)) * d >= pow) {
        ++d;
        pow *= base_;
    }
    d_star_ = d;

    mpz_class sum = 0, sumsq = 0;
    for (long long v : image_) {
        const auto lv = static_cast<long>(v);
        sum += lv;
        sumsq += mpz_class(lv) * lv;
    }
    mean_ = mpq_class(sum, base_);
    mean_.canonicalize();
    variance_ = mpq_class(sumsq, base_) - mean_ * mean_;
    variance_.canonicalize();
}

DigitFunction DigitFunction::power(int exponent, int base) {
    if (exponent < 1)
        throw validation_error("power exponent must be positive, got " +
                               std::to_string(exponent));
    if (base < 2)
        throw validation_error("base must be at least 2, got " +
                               std::to_string(base));
    std::vector<long long> img(static_cast<size_t>(base));
    for (int i = 0; i < base; ++i) {
        long long v = 1;
        for (int e = 0; e < exponent; ++e) {
            if (v > (1LL << 62) / (i > 1 ? i : 1))
                throw validation_error("digit image value overflows");
            v *= i;
        }
        img[static_cast<size_t>(i)] = v;
    }
    return DigitFunction(base, std::move(img));
}

mpz_class DigitFunction::apply(const mpz_class& n) const {
    if (n < 0)
        throw validation_error("digit sum of a negative number");
    mpz_class rest = n;
    mpz_class sum = 0;
    while (rest > 0) {
        unsigned long digit = mpz_fdiv_q_ui(rest.get_mpz_t(), rest.get_mpz_t(),
                                            static_cast<unsigned long>(base_));
        sum += static_cast<long>(image_[digit]);
    }
    return sum;
}

std::uint64_t DigitFunction::apply_u64(std::uint64_t n) const {
    const auto b = static_cast<std::uint64_t>(base_);
    std::uint64_t sum = 0;
    while (n > 0) {
        sum += static_cast<std::uint64_t>(image_[n % b]);
        n /= b;
    }
    return sum;
}

std::string DigitFunction::describe() const {
    std::ostringstream os;
    os << "base=" << base_ << " h=[";
    for (size_t i = 0; i < image_.size(); ++i) {
        if (i) os << ",";
        os << image_[i];
    }
    os << "]";
    return os.str();
}

} // namespace happy
