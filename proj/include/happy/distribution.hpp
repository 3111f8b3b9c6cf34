#pragma once
// Distribution of the digit-image sum of a uniformly random m-digit string
// (leading zeros allowed), and the type densities derived from it.
//
// Exact mode stores integer counts: row m holds, for each sum value i in
// [0, m*alpha], how many of the base^m strings have image sum i. Interval
// mode stores probabilities as outward-rounded [lo, hi] mpfr pairs. The row
// advances by one digit at a time; each new entry is assembled from the
// previous row in a fixed order (offsets ascending), so results are
// bit-identical no matter how the work is split across threads.

#include "happy/cycles.hpp"
#include "happy/digit_function.hpp"
#include "happy/rounded.hpp"

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <utility>
#include <vector>

namespace happy {

enum class NumMode { exact, interval };

struct ComputeOptions {
    mpfr_prec_t precision = 128; // interval endpoints, bits
    int threads = 1;
    std::uint64_t memory_budget = 8ull << 30; // bytes, rows only
};

// Contiguous array of mpfr values sharing one precision. Move-only; entries
// are reached by pointer so the backing vector may reallocate freely.
class MpfrVec {
  public:
    MpfrVec() = default;
    MpfrVec(const MpfrVec&) = delete;
    MpfrVec& operator=(const MpfrVec&) = delete;
    MpfrVec(MpfrVec&& o) noexcept : v_(std::move(o.v_)) { o.v_.clear(); }
    MpfrVec& operator=(MpfrVec&& o) noexcept;
    ~MpfrVec();

    // Grows with zero-initialized entries (or shrinks, clearing the tail).
    void resize(size_t n, mpfr_prec_t prec);
    size_t size() const { return v_.size(); }
    mpfr_ptr at(size_t i) { return &v_[i]; }
    mpfr_srcptr at(size_t i) const { return &v_[i]; }
    void swap(MpfrVec& o) { v_.swap(o.v_); }

  private:
    std::vector<__mpfr_struct> v_;
};

class DistributionStepper {
  public:
    DistributionStepper(const DigitFunction& f, NumMode mode,
                        ComputeOptions opts = {});

    void step();          // advance one digit
    void step_to(long m); // no-op if already past

    long m() const { return m_; }
    long long support_max() const { return support_; }
    NumMode mode() const { return mode_; }
    const DigitFunction& function() const { return f_; }
    mpfr_prec_t precision() const { return opts_.precision; }

    // Exact row access; zero outside [0, support_max()].
    const mpz_class& count(long long i) const;
    // Interval row access.
    Ival probability(long long i) const;

    mpz_class total_count() const;
    Ival total_probability() const;

    // Sum of the current row over indices classified into each cycle.
    // The table must cover [0, support_max()].
    std::vector<mpz_class> cycle_counts(const TypeTable& table,
                                        size_t cycle_count) const;
    std::vector<Ival> cycle_probabilities(const TypeTable& table,
                                          size_t cycle_count) const;
    mpz_class selected_count(const TypeTable& table,
                             const CycleSelection& sel) const;
    Ival selected_probability(const TypeTable& table,
                              const CycleSelection& sel) const;

  private:
    void step_exact();
    void step_interval();
    void check_budget(long long new_support) const;
    void require_mode(NumMode m, const char* what) const;
    void require_table(const TypeTable& table) const;
    // Enclosure of base^-m, the probability of the all-zero string.
    Ival zero_string_weight() const;

    DigitFunction f_;
    NumMode mode_;
    ComputeOptions opts_;
    // digit image grouped by value: (offset, multiplicity), offsets ascending
    std::vector<std::pair<long long, unsigned long>> offsets_;
    long m_ = 0;
    long long support_ = 0;

    std::vector<mpz_class> row_, alt_; // exact; alt used by threaded steps
    MpfrVec lo_, hi_, alt_lo_, alt_hi_;
};

// A finished row with metadata, the result of running the stepper to m.
class SumDistribution {
  public:
    static SumDistribution compute(const DigitFunction& f, long m,
                                   NumMode mode, ComputeOptions opts = {});

    long m() const { return eng_.m(); }
    long long support_max() const { return eng_.support_max(); }
    NumMode mode() const { return eng_.mode(); }
    const DigitFunction& function() const { return eng_.function(); }

    const mpz_class& count(long long i) const { return eng_.count(i); }
    mpq_class probability(long long i) const; // exact mode
    Ival probability_interval(long long i) const {
        return eng_.probability(i);
    }
    mpz_class total_count() const { return eng_.total_count(); }
    Ival total_probability() const { return eng_.total_probability(); }
    mpz_class selected_count(const TypeTable& table,
                             const CycleSelection& sel) const {
        return eng_.selected_count(table, sel);
    }
    Ival selected_probability(const TypeTable& table,
                              const CycleSelection& sel) const {
        return eng_.selected_probability(table, sel);
    }

  private:
    explicit SumDistribution(DistributionStepper&& eng)
        : eng_(std::move(eng)) {}
    DistributionStepper eng_;
};

// Exact mean and variance of the sum; exact mode only.
std::pair<mpq_class, mpq_class> moments(const SumDistribution& dist);

// One density value in either numeric mode.
struct DensityValue {
    NumMode mode = NumMode::exact;
    mpq_class exact;
    Ival enclosure;

    static DensityValue of_exact(mpq_class q);
    static DensityValue of_interval(Ival iv);

    // Outward-rounded view, valid in both modes.
    Ival as_interval(mpfr_prec_t prec) const;
    std::string lo_str(int digits) const;
    std::string hi_str(int digits) const;
    double lo_d() const;
    double hi_d() const;
};

// Density of the selected types among [0, base^m - 1] (equivalently among
// m-digit strings; the all-zero string is never any type).
DensityValue prefix_density(const DigitFunction& f, const TypeTable& table,
                            const CycleSelection& sel, long m, NumMode mode,
                            ComputeOptions opts = {});

// Density of the selected types among n-digit integers, [base^(n-1), base^n - 1].
DensityValue band_density(const DigitFunction& f, const TypeTable& table,
                          const CycleSelection& sel, long n, NumMode mode,
                          ComputeOptions opts = {});

// Same count as the exact band numerator, assembled the other way around: by
// conditioning on the leading digit over the row for the remaining n-1
// positions. Exists to cross-check band_density.
mpz_class band_count_by_leading_digit(const DigitFunction& f,
                                      const TypeTable& table,
                                      const CycleSelection& sel, long n,
                                      ComputeOptions opts = {});

// Max over integer points within T standard deviations of the mean of the
// relative gap between the exact row and the Gaussian with the row's mean
// and variance. Small values mean the local limit approximation is tight.
double local_limit_deviation(const DigitFunction& f, long m, double T,
                             ComputeOptions opts = {});

} // namespace happy
