#pragma once
// Incremental density sweeps over digit counts, and the reports built from
// them: per-cycle bound tables and prefix/band series files.
//
// A sweep advances one distribution row from m = 1 to n_max and keeps only
// the per-cycle type sums at each step, so memory stays proportional to
// n_max times the number of cycles, not to the row support.

#include "happy/bounds.hpp"
#include "happy/cycles.hpp"
#include "happy/digit_function.hpp"
#include "happy/distribution.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace happy {

struct SweepOptions {
    // Fixed mode if set; otherwise exact up to exact_ceiling digits,
    // interval beyond.
    std::optional<NumMode> mode;
    long exact_ceiling = 1000;
    mpfr_prec_t precision = 128;
    int threads = 1;
    std::uint64_t memory_budget = 8ull << 30;
};

class SweepResult {
  public:
    SweepResult(DigitFunction f, CycleSet cycles, NumMode mode, long n_max,
                mpfr_prec_t precision,
                std::vector<std::vector<mpz_class>> counts,
                std::vector<std::vector<Ival>> probs);

    const DigitFunction& function() const { return f_; }
    const CycleSet& cycles() const { return cycles_; }
    NumMode mode() const { return mode_; }
    long n_max() const { return n_max_; }

    // Type density in [0, base^m - 1], m in [1, n_max].
    DensityValue prefix_density(size_t cycle, long m) const;
    DensityValue prefix_density(const CycleSelection& sel, long m) const;
    // Type density among n-digit integers, n in [1, n_max].
    DensityValue band_density(size_t cycle, long n) const;
    DensityValue band_density(const CycleSelection& sel, long n) const;

    // Best band anchors over multiples of 4 in [4, n_max]: largest certified
    // lower endpoint resp. smallest certified upper endpoint. Ties keep the
    // smaller n. nullopt when n_max < 4.
    std::optional<long> argmax_band(size_t cycle) const;
    std::optional<long> argmin_band(size_t cycle) const;

  private:
    mpz_class prefix_count(const CycleSelection& sel, long m) const;
    Ival prefix_prob(const CycleSelection& sel, long m) const;

    DigitFunction f_;
    CycleSet cycles_;
    NumMode mode_;
    long n_max_;
    mpfr_prec_t precision_;
    // [cycle][m-1] prefix type sums for m in [1, n_max]
    std::vector<std::vector<mpz_class>> counts_; // exact mode
    std::vector<std::vector<Ival>> probs_;       // interval mode
};

SweepResult density_sweep(const DigitFunction& f, const CycleSet& cycles,
                          long n_max, SweepOptions opts = {});

// One table row per cycle: a certified upper-density bound at its best (or
// pinned) anchor and a certified lower-density bound likewise. Cycles whose
// band density never moves in an exact sweep are reported as that constant.
struct TableRow {
    size_t cycle_index = 0;
    std::vector<std::uint64_t> orbit;

    bool constant_density = false;
    mpq_class constant_value;

    bool upper_ok = false;
    long upper_n = 0;
    std::string upper_note;
    std::optional<BoundCertificate> upper_cert;

    bool lower_ok = false;
    long lower_n = 0;
    std::string lower_note;
    std::optional<BoundCertificate> lower_cert;
};

struct TableOptions {
    std::map<size_t, long> pin_upper; // cycle index -> anchor n
    std::map<size_t, long> pin_lower;
    mpfr_prec_t cert_precision = 256;
};

std::vector<TableRow> build_table(const SweepResult& sweep,
                                  TableOptions opts = {});

std::string render_table(const std::vector<TableRow>& rows, int digits = 8);
std::string table_json(const std::vector<TableRow>& rows, int digits = 30);

// CSV: n,cycle,prefix_lo,prefix_hi,band_lo,band_hi; one row per digit count
// per cycle (cycle labeled by smallest member), byte-deterministic.
void emit_series(const SweepResult& sweep, std::ostream& out, int digits = 30);
void emit_series(const SweepResult& sweep, const std::string& path,
                 int digits = 30);

} // namespace happy
