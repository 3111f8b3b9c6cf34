#include "happy/distribution.hpp"

#include "happy/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace happy {

MpfrVec& MpfrVec::operator=(MpfrVec&& o) noexcept {
    if (this != &o) {
        for (auto& x : v_) mpfr_clear(&x);
        v_ = std::move(o.v_);
        o.v_.clear();
    }
    return *this;
}

MpfrVec::~MpfrVec() {
    for (auto& x : v_) mpfr_clear(&x);
}

void MpfrVec::resize(size_t n, mpfr_prec_t prec) {
    size_t old = v_.size();
    if (n < old) {
        for (size_t i = n; i < old; ++i) mpfr_clear(&v_[i]);
        v_.resize(n);
        return;
    }
    v_.resize(n);
    for (size_t i = old; i < n; ++i) {
        mpfr_init2(&v_[i], prec);
        mpfr_set_zero(&v_[i], 1);
    }
}

DistributionStepper::DistributionStepper(const DigitFunction& f, NumMode mode,
                                         ComputeOptions opts)
    : f_(f), mode_(mode), opts_(opts) {
    if (opts_.threads < 1) opts_.threads = 1;
    if (opts_.precision < MPFR_PREC_MIN || opts_.precision > (1 << 22))
        throw validation_error("precision out of range: " +
                               std::to_string(opts_.precision));

    // Group equal image values; ascending offset order is also the fixed
    // summation order that makes interval results reproducible.
    std::vector<long long> img = f_.digit_image();
    std::sort(img.begin(), img.end());
    for (long long v : img) {
        if (!offsets_.empty() && offsets_.back().first == v)
            ++offsets_.back().second;
        else
            offsets_.emplace_back(v, 1ul);
    }

    if (mode_ == NumMode::exact) {
        row_.resize(1);
        row_[0] = 1;
    } else {
        lo_.resize(1, opts_.precision);
        hi_.resize(1, opts_.precision);
        mpfr_set_ui(lo_.at(0), 1, MPFR_RNDD);
        mpfr_set_ui(hi_.at(0), 1, MPFR_RNDU);
    }
}

void DistributionStepper::check_budget(long long new_support) const {
    const double entries = static_cast<double>(new_support) + 1;
    double bytes;
    if (mode_ == NumMode::exact) {
        // counts in row m+1 are bounded by base^(m+1)
        double limbs =
            (static_cast<double>(m_ + 1) * std::log2(double(f_.base()))) / 64.0 +
            1;
        bytes = entries * (limbs * 8 + 24);
    } else {
        bytes = entries * 2 * (double(opts_.precision) / 8.0 + 40);
    }
    if (opts_.threads > 1) bytes *= 2; // double buffered
    if (bytes > static_cast<double>(opts_.memory_budget))
        throw resource_error(
            "row for m=" + std::to_string(m_ + 1) + " needs about " +
            std::to_string(static_cast<long long>(bytes / (1 << 20))) +
            " MiB, over the " +
            std::to_string(static_cast<long long>(opts_.memory_budget >> 20)) +
            " MiB budget");
}

void DistributionStepper::step() {
    if (mode_ == NumMode::exact)
        step_exact();
    else
        step_interval();
}

void DistributionStepper::step_to(long m) {
    if (m < m_)
        throw validation_error("row " + std::to_string(m_) +
                               " cannot step back to " + std::to_string(m));
    while (m_ < m) step();
}

void DistributionStepper::step_exact() {
    const long long old_support = support_;
    const long long new_support = support_ + f_.alpha();
    check_budget(new_support);
    const size_t n = static_cast<size_t>(new_support) + 1;

    // Accumulate each new entry from the old row in ascending offset order.
    // src entries at or below the target index are still old values in the
    // in-place descending walk, so both code paths see the same inputs.
    auto gather = [&](const std::vector<mpz_class>& src, long long i,
                      mpz_ptr acc) {
        mpz_set_ui(acc, 0);
        for (const auto& [off, mult] : offsets_) {
            const long long t = i - off;
            if (t < 0) break; // offsets ascend, later ones only get lower
            if (t > old_support) continue;
            if (mult == 1)
                mpz_add(acc, acc, src[static_cast<size_t>(t)].get_mpz_t());
            else
                mpz_addmul_ui(acc, src[static_cast<size_t>(t)].get_mpz_t(),
                              mult);
        }
    };

    if (opts_.threads == 1) {
        row_.resize(n);
        mpz_class acc;
        for (long long i = new_support; i >= 0; --i) {
            gather(row_, i, acc.get_mpz_t());
            mpz_swap(row_[static_cast<size_t>(i)].get_mpz_t(),
                     acc.get_mpz_t());
        }
    } else {
        alt_.resize(n);
        std::atomic<long long> cursor{0};
        const long long kBlock = 8192;
        auto work = [&]() {
            for (;;) {
                const long long begin = cursor.fetch_add(kBlock);
                if (begin > new_support) return;
                const long long end =
                    std::min(new_support, begin + kBlock - 1);
                for (long long i = begin; i <= end; ++i)
                    gather(row_, i,
                           alt_[static_cast<size_t>(i)].get_mpz_t());
            }
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < opts_.threads; ++t) pool.emplace_back(work);
        work();
        for (auto& th : pool) th.join();
        row_.swap(alt_);
    }
    support_ = new_support;
    ++m_;
}

void DistributionStepper::step_interval() {
    const long long old_support = support_;
    const long long new_support = support_ + f_.alpha();
    check_budget(new_support);
    const size_t n = static_cast<size_t>(new_support) + 1;
    const auto prec = opts_.precision;
    const auto base = static_cast<unsigned long>(f_.base());

    // Same fixed order as the exact path; every entry is a sum over offsets
    // ascending, then one division by the base, lo rounded down, hi up.
    auto gather = [&](MpfrVec& src_lo, MpfrVec& src_hi, long long i,
                      mpfr_ptr tlo, mpfr_ptr thi, mpfr_ptr scr) {
        mpfr_set_zero(tlo, 1);
        mpfr_set_zero(thi, 1);
        for (const auto& [off, mult] : offsets_) {
            const long long t = i - off;
            if (t < 0) break;
            if (t > old_support) continue;
            const auto ti = static_cast<size_t>(t);
            if (mult == 1) {
                mpfr_add(tlo, tlo, src_lo.at(ti), MPFR_RNDD);
                mpfr_add(thi, thi, src_hi.at(ti), MPFR_RNDU);
            } else {
                mpfr_mul_ui(scr, src_lo.at(ti), mult, MPFR_RNDD);
                mpfr_add(tlo, tlo, scr, MPFR_RNDD);
                mpfr_mul_ui(scr, src_hi.at(ti), mult, MPFR_RNDU);
                mpfr_add(thi, thi, scr, MPFR_RNDU);
            }
        }
        mpfr_div_ui(tlo, tlo, base, MPFR_RNDD);
        mpfr_div_ui(thi, thi, base, MPFR_RNDU);
    };

    if (opts_.threads == 1) {
        lo_.resize(n, prec);
        hi_.resize(n, prec);
        mpfr_t tlo, thi, scr;
        mpfr_init2(tlo, prec);
        mpfr_init2(thi, prec);
        mpfr_init2(scr, prec);
        for (long long i = new_support; i >= 0; --i) {
            gather(lo_, hi_, i, tlo, thi, scr);
            mpfr_swap(lo_.at(static_cast<size_t>(i)), tlo);
            mpfr_swap(hi_.at(static_cast<size_t>(i)), thi);
        }
        mpfr_clear(tlo);
        mpfr_clear(thi);
        mpfr_clear(scr);
    } else {
        alt_lo_.resize(n, prec);
        alt_hi_.resize(n, prec);
        std::atomic<long long> cursor{0};
        const long long kBlock = 8192;
        auto work = [&]() {
            mpfr_t tlo, thi, scr;
            mpfr_init2(tlo, prec);
            mpfr_init2(thi, prec);
            mpfr_init2(scr, prec);
            for (;;) {
                const long long begin = cursor.fetch_add(kBlock);
                if (begin > new_support) break;
                const long long end =
                    std::min(new_support, begin + kBlock - 1);
                for (long long i = begin; i <= end; ++i) {
                    gather(lo_, hi_, i, tlo, thi, scr);
                    mpfr_swap(alt_lo_.at(static_cast<size_t>(i)), tlo);
                    mpfr_swap(alt_hi_.at(static_cast<size_t>(i)), thi);
                }
            }
            mpfr_clear(tlo);
            mpfr_clear(thi);
            mpfr_clear(scr);
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < opts_.threads; ++t) pool.emplace_back(work);
        work();
        for (auto& th : pool) th.join();
        lo_.swap(alt_lo_);
        hi_.swap(alt_hi_);
    }
    support_ = new_support;
    ++m_;
}

void DistributionStepper::require_mode(NumMode m, const char* what) const {
    if (mode_ != m)
        throw mode_error(std::string(what) + " is not available in " +
                         (mode_ == NumMode::exact ? "exact" : "interval") +
                         " mode");
}

void DistributionStepper::require_table(const TypeTable& table) const {
    if (table.bound() < static_cast<std::uint64_t>(support_))
        throw out_of_range_error(
            "type table covers [0," + std::to_string(table.bound()) +
            "] but the row reaches " + std::to_string(support_));
}

Ival DistributionStepper::zero_string_weight() const {
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(f_.base()),
                  static_cast<unsigned long>(m_));
    return Ival::of_mpq(mpq_class(1, den), opts_.precision);
}

const mpz_class& DistributionStepper::count(long long i) const {
    require_mode(NumMode::exact, "count access");
    static const mpz_class kZero = 0;
    if (i < 0 || i > support_) return kZero;
    return row_[static_cast<size_t>(i)];
}

Ival DistributionStepper::probability(long long i) const {
    require_mode(NumMode::interval, "probability enclosure access");
    Ival out(opts_.precision);
    if (i >= 0 && i <= support_) {
        mpfr_set(out.lo_mut(), lo_.at(static_cast<size_t>(i)), MPFR_RNDD);
        mpfr_set(out.hi_mut(), hi_.at(static_cast<size_t>(i)), MPFR_RNDU);
    }
    return out;
}

mpz_class DistributionStepper::total_count() const {
    require_mode(NumMode::exact, "count total");
    mpz_class sum = 0;
    for (const auto& v : row_) sum += v;
    return sum;
}

Ival DistributionStepper::total_probability() const {
    require_mode(NumMode::interval, "probability total");
    Ival out(opts_.precision);
    for (size_t i = 0; i < lo_.size(); ++i) {
        mpfr_add(out.lo_mut(), out.lo(), lo_.at(i), MPFR_RNDD);
        mpfr_add(out.hi_mut(), out.hi(), hi_.at(i), MPFR_RNDU);
    }
    return out;
}

std::vector<mpz_class>
DistributionStepper::cycle_counts(const TypeTable& table,
                                  size_t cycle_count) const {
    require_mode(NumMode::exact, "cycle count sums");
    require_table(table);
    std::vector<mpz_class> acc(cycle_count, mpz_class(0));
    for (long long i = 0; i <= support_; ++i) {
        const std::int32_t fl =
            table.flag_unchecked(static_cast<std::uint64_t>(i));
        if (fl < 0) continue;
        if (static_cast<size_t>(fl) >= cycle_count)
            throw validation_error("type table references cycle index " +
                                   std::to_string(fl) +
                                   " outside the given cycle set");
        acc[static_cast<size_t>(fl)] += row_[static_cast<size_t>(i)];
    }
    // Sum 0 is a type only for images that send some digit to 0. Its bucket
    // then includes the all-zero string, which is the integer 0 and counts
    // toward no type.
    const std::int32_t fl0 = table.flag_unchecked(0);
    if (fl0 >= 0) acc[static_cast<size_t>(fl0)] -= 1;
    return acc;
}

std::vector<Ival>
DistributionStepper::cycle_probabilities(const TypeTable& table,
                                         size_t cycle_count) const {
    require_mode(NumMode::interval, "cycle probability sums");
    require_table(table);
    std::vector<Ival> acc;
    acc.reserve(cycle_count);
    for (size_t k = 0; k < cycle_count; ++k) acc.emplace_back(opts_.precision);
    for (long long i = 0; i <= support_; ++i) {
        const std::int32_t fl =
            table.flag_unchecked(static_cast<std::uint64_t>(i));
        if (fl < 0) continue;
        if (static_cast<size_t>(fl) >= cycle_count)
            throw validation_error("type table references cycle index " +
                                   std::to_string(fl) +
                                   " outside the given cycle set");
        auto& dst = acc[static_cast<size_t>(fl)];
        mpfr_add(dst.lo_mut(), dst.lo(), lo_.at(static_cast<size_t>(i)),
                 MPFR_RNDD);
        mpfr_add(dst.hi_mut(), dst.hi(), hi_.at(static_cast<size_t>(i)),
                 MPFR_RNDU);
    }
    // Remove the all-zero string (the integer 0, which counts toward no
    // type) from the sum-0 bucket; its probability is exactly base^-m.
    const std::int32_t fl0 = table.flag_unchecked(0);
    if (fl0 >= 0) {
        Ival w = zero_string_weight();
        auto& dst = acc[static_cast<size_t>(fl0)];
        mpfr_sub(dst.lo_mut(), dst.lo(), w.hi(), MPFR_RNDD);
        mpfr_sub(dst.hi_mut(), dst.hi(), w.lo(), MPFR_RNDU);
    }
    return acc;
}

mpz_class DistributionStepper::selected_count(const TypeTable& table,
                                              const CycleSelection& sel) const {
    require_mode(NumMode::exact, "selected count");
    require_table(table);
    mpz_class sum = 0;
    for (long long i = 0; i <= support_; ++i) {
        const std::int32_t fl =
            table.flag_unchecked(static_cast<std::uint64_t>(i));
        if (fl >= 0 && sel.contains(static_cast<size_t>(fl)))
            sum += row_[static_cast<size_t>(i)];
    }
    const std::int32_t fl0 = table.flag_unchecked(0);
    if (fl0 >= 0 && sel.contains(static_cast<size_t>(fl0))) sum -= 1;
    return sum;
}

Ival DistributionStepper::selected_probability(const TypeTable& table,
                                               const CycleSelection& sel) const {
    require_mode(NumMode::interval, "selected probability");
    require_table(table);
    Ival out(opts_.precision);
    for (long long i = 0; i <= support_; ++i) {
        const std::int32_t fl =
            table.flag_unchecked(static_cast<std::uint64_t>(i));
        if (fl >= 0 && sel.contains(static_cast<size_t>(fl))) {
            mpfr_add(out.lo_mut(), out.lo(), lo_.at(static_cast<size_t>(i)),
                     MPFR_RNDD);
            mpfr_add(out.hi_mut(), out.hi(), hi_.at(static_cast<size_t>(i)),
                     MPFR_RNDU);
        }
    }
    const std::int32_t fl0 = table.flag_unchecked(0);
    if (fl0 >= 0 && sel.contains(static_cast<size_t>(fl0))) {
        Ival w = zero_string_weight();
        Ival r(opts_.precision);
        mpfr_sub(r.lo_mut(), out.lo(), w.hi(), MPFR_RNDD);
        mpfr_sub(r.hi_mut(), out.hi(), w.lo(), MPFR_RNDU);
        return r;
    }
    return out;
}

SumDistribution SumDistribution::compute(const DigitFunction& f, long m,
                                         NumMode mode, ComputeOptions opts) {
    if (m < 0) throw validation_error("row index must be nonnegative");
    DistributionStepper eng(f, mode, opts);
    eng.step_to(m);
    return SumDistribution(std::move(eng));
}

mpq_class SumDistribution::probability(long long i) const {
    if (mode() != NumMode::exact)
        throw mode_error("exact probabilities need exact mode");
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(),
                  static_cast<unsigned long>(function().base()),
                  static_cast<unsigned long>(m()));
    mpq_class q(count(i), den);
    q.canonicalize();
    return q;
}

std::pair<mpq_class, mpq_class> moments(const SumDistribution& dist) {
    if (dist.mode() != NumMode::exact)
        throw mode_error("moments need exact mode");
    mpz_class s1 = 0, s2 = 0, isq;
    for (long long i = 1; i <= dist.support_max(); ++i) {
        const mpz_class& c = dist.count(i);
        if (c == 0) continue;
        mpz_addmul_ui(s1.get_mpz_t(), c.get_mpz_t(),
                      static_cast<unsigned long>(i));
        isq = static_cast<unsigned long>(i);
        isq *= static_cast<unsigned long>(i);
        mpz_addmul(s2.get_mpz_t(), c.get_mpz_t(), isq.get_mpz_t());
    }
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(),
                  static_cast<unsigned long>(dist.function().base()),
                  static_cast<unsigned long>(dist.m()));
    mpq_class mean(s1, den), second(s2, den);
    mean.canonicalize();
    second.canonicalize();
    mpq_class var = second - mean * mean;
    var.canonicalize();
    return {mean, var};
}

DensityValue DensityValue::of_exact(mpq_class q) {
    DensityValue v;
    v.mode = NumMode::exact;
    v.exact = std::move(q);
    return v;
}

DensityValue DensityValue::of_interval(Ival iv) {
    DensityValue v;
    v.mode = NumMode::interval;
    v.enclosure = std::move(iv);
    return v;
}

Ival DensityValue::as_interval(mpfr_prec_t prec) const {
    if (mode == NumMode::exact) return Ival::of_mpq(exact, prec);
    return enclosure;
}

std::string DensityValue::lo_str(int digits) const {
    if (mode == NumMode::exact) return decimal_down(exact, digits);
    return enclosure.lo_str(digits);
}

std::string DensityValue::hi_str(int digits) const {
    if (mode == NumMode::exact) return decimal_up(exact, digits);
    return enclosure.hi_str(digits);
}

double DensityValue::lo_d() const {
    if (mode == NumMode::exact) return exact.get_d();
    return enclosure.lo_d();
}

double DensityValue::hi_d() const {
    if (mode == NumMode::exact) return exact.get_d();
    return enclosure.hi_d();
}

DensityValue prefix_density(const DigitFunction& f, const TypeTable& table,
                            const CycleSelection& sel, long m, NumMode mode,
                            ComputeOptions opts) {
    if (m < 0) throw validation_error("prefix exponent must be nonnegative");
    DistributionStepper eng(f, mode, opts);
    eng.step_to(m);
    if (mode == NumMode::exact) {
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(f.base()),
                      static_cast<unsigned long>(m));
        mpq_class q(eng.selected_count(table, sel), den);
        q.canonicalize();
        return DensityValue::of_exact(q);
    }
    return DensityValue::of_interval(eng.selected_probability(table, sel));
}

DensityValue band_density(const DigitFunction& f, const TypeTable& table,
                          const CycleSelection& sel, long n, NumMode mode,
                          ComputeOptions opts) {
    if (n < 1) throw validation_error("band index must be at least 1");
    DistributionStepper eng(f, mode, opts);
    eng.step_to(n - 1);
    if (mode == NumMode::exact) {
        mpz_class c0 = eng.selected_count(table, sel);
        eng.step();
        mpz_class c1 = eng.selected_count(table, sel);
        mpz_class low;
        mpz_ui_pow_ui(low.get_mpz_t(), static_cast<unsigned long>(f.base()),
                      static_cast<unsigned long>(n - 1));
        mpq_class q(c1 - c0, low * (f.base() - 1));
        q.canonicalize();
        return DensityValue::of_exact(q);
    }
    Ival d0 = eng.selected_probability(table, sel);
    eng.step();
    Ival d1 = eng.selected_probability(table, sel);
    const auto prec = opts.precision;
    Ival b = Ival::of_ulong(static_cast<unsigned long>(f.base()), prec);
    Ival bm1 =
        Ival::of_ulong(static_cast<unsigned long>(f.base()) - 1, prec);
    Ival r = (b * d1 - d0) / bm1;
    // the true band density is a ratio of counts, never below zero
    if (mpfr_sgn(r.lo()) < 0) mpfr_set_zero(r.lo_mut(), 1);
    return DensityValue::of_interval(r);
}

mpz_class band_count_by_leading_digit(const DigitFunction& f,
                                      const TypeTable& table,
                                      const CycleSelection& sel, long n,
                                      ComputeOptions opts) {
    if (n < 1) throw validation_error("band index must be at least 1");
    DistributionStepper eng(f, NumMode::exact, opts);
    eng.step_to(n - 1);
    const long long support = eng.support_max();
    const auto& img = f.digit_image();
    if (table.bound() <
        static_cast<std::uint64_t>(support + f.alpha()))
        throw out_of_range_error(
            "type table covers [0," + std::to_string(table.bound()) +
            "] but leading-digit sums reach " +
            std::to_string(support + f.alpha()));
    mpz_class total = 0;
    for (long long i = 0; i <= support; ++i) {
        unsigned long ways = 0;
        for (int a = 1; a < f.base(); ++a) {
            const auto s = static_cast<std::uint64_t>(i + img[static_cast<size_t>(a)]);
            const std::int32_t fl = table.flag_unchecked(s);
            if (fl >= 0 && sel.contains(static_cast<size_t>(fl))) ++ways;
        }
        if (ways == 1)
            total += eng.count(i);
        else if (ways > 1)
            mpz_addmul_ui(total.get_mpz_t(), eng.count(i).get_mpz_t(), ways);
    }
    return total;
}

double local_limit_deviation(const DigitFunction& f, long m, double T,
                             ComputeOptions opts) {
    if (m < 1) throw validation_error("need at least one digit");
    if (!(T > 0)) throw validation_error("the window width must be positive");
    DistributionStepper eng(f, NumMode::exact, opts);
    eng.step_to(m);

    const double mu = f.digit_mean().get_d();
    const double sd = std::sqrt(f.digit_variance().get_d());
    const double center = mu * static_cast<double>(m);
    const double spread = sd * std::sqrt(static_cast<double>(m));
    long long first = static_cast<long long>(std::ceil(center - T * spread));
    long long last = static_cast<long long>(std::floor(center + T * spread));
    first = std::max<long long>(first, 0);
    last = std::min<long long>(last, eng.support_max());

    mpfr_t p, den;
    mpfr_init2(p, 256);
    mpfr_init2(den, 256);
    mpfr_ui_pow_ui(den, static_cast<unsigned long>(f.base()),
                   static_cast<unsigned long>(m), MPFR_RNDN);
    double worst = 0.0;
    for (long long i = first; i <= last; ++i) {
        const double t = (static_cast<double>(i) - center) / spread;
        if (std::abs(t) > T) continue;
        const double gauss =
            std::exp(-t * t / 2) /
            (sd * std::sqrt(2 * std::numbers::pi * static_cast<double>(m)));
        mpfr_set_z(p, eng.count(i).get_mpz_t(), MPFR_RNDN);
        mpfr_div(p, p, den, MPFR_RNDN);
        const double pd = mpfr_get_d(p, MPFR_RNDN);
        worst = std::max(worst, std::abs(1.0 - pd / gauss));
    }
    mpfr_clear(p);
    mpfr_clear(den);
    return worst;
}

} // namespace happy
