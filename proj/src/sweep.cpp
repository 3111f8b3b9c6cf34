#include "happy/sweep.hpp"

#include "happy/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace happy {

namespace {

mpz_class ui_pow(unsigned long base, unsigned long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), base, e);
    return r;
}

} // namespace

SweepResult::SweepResult(DigitFunction f, CycleSet cycles, NumMode mode,
                         long n_max, mpfr_prec_t precision,
                         std::vector<std::vector<mpz_class>> counts,
                         std::vector<std::vector<Ival>> probs)
    : f_(std::move(f)), cycles_(std::move(cycles)), mode_(mode), n_max_(n_max),
      precision_(precision), counts_(std::move(counts)),
      probs_(std::move(probs)) {}

mpz_class SweepResult::prefix_count(const CycleSelection& sel, long m) const {
    mpz_class sum = 0;
    if (m == 0) return sum;
    for (size_t c : sel.indices()) sum += counts_[c][static_cast<size_t>(m - 1)];
    return sum;
}

Ival SweepResult::prefix_prob(const CycleSelection& sel, long m) const {
    Ival sum(precision_);
    if (m == 0) return sum;
    for (size_t c : sel.indices()) {
        const Ival& v = probs_[c][static_cast<size_t>(m - 1)];
        mpfr_add(sum.lo_mut(), sum.lo(), v.lo(), MPFR_RNDD);
        mpfr_add(sum.hi_mut(), sum.hi(), v.hi(), MPFR_RNDU);
    }
    return sum;
}

DensityValue SweepResult::prefix_density(const CycleSelection& sel,
                                         long m) const {
    if (m < 1 || m > n_max_)
        throw out_of_range_error("prefix index " + std::to_string(m) +
                                 " outside the sweep range [1," +
                                 std::to_string(n_max_) + "]");
    if (mode_ == NumMode::exact) {
        mpq_class q(prefix_count(sel, m),
                    ui_pow(static_cast<unsigned long>(f_.base()),
                           static_cast<unsigned long>(m)));
        q.canonicalize();
        return DensityValue::of_exact(q);
    }
    return DensityValue::of_interval(prefix_prob(sel, m));
}

DensityValue SweepResult::prefix_density(size_t cycle, long m) const {
    return prefix_density(CycleSelection(cycles_, {cycle}), m);
}

DensityValue SweepResult::band_density(const CycleSelection& sel,
                                       long n) const {
    if (n < 1 || n > n_max_)
        throw out_of_range_error("band index " + std::to_string(n) +
                                 " outside the sweep range [1," +
                                 std::to_string(n_max_) + "]");
    if (mode_ == NumMode::exact) {
        mpz_class diff = prefix_count(sel, n) - prefix_count(sel, n - 1);
        mpq_class q(diff, ui_pow(static_cast<unsigned long>(f_.base()),
                                 static_cast<unsigned long>(n - 1)) *
                              (f_.base() - 1));
        q.canonicalize();
        return DensityValue::of_exact(q);
    }
    Ival pn = prefix_prob(sel, n);
    Ival pn1 = prefix_prob(sel, n - 1);
    Ival b = Ival::of_ulong(static_cast<unsigned long>(f_.base()), precision_);
    Ival bm1 =
        Ival::of_ulong(static_cast<unsigned long>(f_.base()) - 1, precision_);
    Ival r = (b * pn - pn1) / bm1;
    if (mpfr_sgn(r.lo()) < 0) mpfr_set_zero(r.lo_mut(), 1);
    return DensityValue::of_interval(r);
}

DensityValue SweepResult::band_density(size_t cycle, long n) const {
    return band_density(CycleSelection(cycles_, {cycle}), n);
}

std::optional<long> SweepResult::argmax_band(size_t cycle) const {
    std::optional<long> best;
    DensityValue best_v;
    for (long n = 4; n <= n_max_; n += 4) {
        DensityValue v = band_density(cycle, n);
        bool better;
        if (!best)
            better = true;
        else if (mode_ == NumMode::exact)
            better = v.exact > best_v.exact;
        else
            better = mpfr_cmp(v.enclosure.lo(), best_v.enclosure.lo()) > 0;
        if (better) {
            best = n;
            best_v = v;
        }
    }
    return best;
}

std::optional<long> SweepResult::argmin_band(size_t cycle) const {
    std::optional<long> best;
    DensityValue best_v;
    for (long n = 4; n <= n_max_; n += 4) {
        DensityValue v = band_density(cycle, n);
        bool better;
        if (!best)
            better = true;
        else if (mode_ == NumMode::exact)
            better = v.exact < best_v.exact;
        else
            better = mpfr_cmp(v.enclosure.hi(), best_v.enclosure.hi()) < 0;
        if (better) {
            best = n;
            best_v = v;
        }
    }
    return best;
}

SweepResult density_sweep(const DigitFunction& f, const CycleSet& cycles,
                          long n_max, SweepOptions opts) {
    if (n_max < 1) throw validation_error("sweep needs n_max >= 1");
    const NumMode mode =
        opts.mode ? *opts.mode
                  : (n_max > opts.exact_ceiling ? NumMode::interval
                                                : NumMode::exact);

    const auto bound = static_cast<std::uint64_t>(n_max) *
                       static_cast<std::uint64_t>(f.alpha());
    if (bound * sizeof(std::int32_t) > opts.memory_budget)
        throw resource_error("type table with " + std::to_string(bound + 1) +
                             " entries exceeds the memory budget");
    TypeTable table = build_type_table(f, cycles, bound);

    ComputeOptions copts;
    copts.precision = opts.precision;
    copts.threads = opts.threads;
    copts.memory_budget = opts.memory_budget;
    DistributionStepper eng(f, mode, copts);

    const size_t k = cycles.size();
    std::vector<std::vector<mpz_class>> counts;
    std::vector<std::vector<Ival>> probs;
    if (mode == NumMode::exact)
        counts.resize(k);
    else
        probs.resize(k);
    for (long m = 1; m <= n_max; ++m) {
        eng.step();
        if (mode == NumMode::exact) {
            auto sums = eng.cycle_counts(table, k);
            for (size_t c = 0; c < k; ++c)
                counts[c].push_back(std::move(sums[c]));
        } else {
            auto sums = eng.cycle_probabilities(table, k);
            for (size_t c = 0; c < k; ++c)
                probs[c].push_back(std::move(sums[c]));
        }
    }
    return SweepResult(f, cycles, mode, n_max, opts.precision,
                       std::move(counts), std::move(probs));
}

std::vector<TableRow> build_table(const SweepResult& sweep, TableOptions opts) {
    const auto& cycles = sweep.cycles();
    const auto& f = sweep.function();
    std::vector<TableRow> rows;
    for (size_t c = 0; c < cycles.size(); ++c) {
        TableRow row;
        row.cycle_index = c;
        row.orbit = cycles.at(c).orbit;

        // A cycle pinned to the same exact band density at every n carries
        // its density verbatim; no limit argument is needed.
        if (sweep.mode() == NumMode::exact && sweep.n_max() >= 4) {
            bool constant = true;
            DensityValue first = sweep.band_density(c, 1);
            for (long n = 2; n <= sweep.n_max() && constant; ++n)
                constant = sweep.band_density(c, n).exact == first.exact;
            if (constant) {
                row.constant_density = true;
                row.constant_value = first.exact;
                rows.push_back(std::move(row));
                continue;
            }
        }

        CycleSelection sel(cycles, {c});
        CycleSelection rest = CycleSelection::complement(cycles, sel);

        auto pinned = [&](const std::map<size_t, long>& pins)
            -> std::optional<long> {
            auto it = pins.find(c);
            if (it == pins.end()) return std::nullopt;
            return it->second;
        };

        std::optional<long> un = pinned(opts.pin_upper);
        if (!un) un = sweep.argmax_band(c);
        if (!un) {
            row.upper_note = "no anchor in range";
        } else {
            row.upper_n = *un;
            try {
                row.upper_cert =
                    certify_upper(f, cycles, sel, *un,
                                  sweep.band_density(c, *un),
                                  opts.cert_precision);
                row.upper_ok = true;
            } catch (const error& e) {
                row.upper_note = e.what();
            }
        }

        std::optional<long> ln = pinned(opts.pin_lower);
        if (!ln) ln = sweep.argmin_band(c);
        if (!ln) {
            row.lower_note = "no anchor in range";
        } else {
            row.lower_n = *ln;
            try {
                row.lower_cert =
                    certify_lower(f, cycles, sel, *ln,
                                  sweep.band_density(rest, *ln),
                                  opts.cert_precision);
                row.lower_ok = true;
            } catch (const error& e) {
                row.lower_note = e.what();
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string orbit_str(const std::vector<std::uint64_t>& orbit) {
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < orbit.size(); ++i) os << (i ? "," : "") << orbit[i];
    os << "}";
    return os.str();
}

// upper bound on |delta| from the certificate's enclosure (delta < 0)
std::string abs_delta_str(const BoundCertificate& cert, int digits) {
    Ival nd = -cert.delta_enclosure;
    return nd.hi_str(digits);
}

} // namespace

std::string render_table(const std::vector<TableRow>& rows, int digits) {
    std::ostringstream os;
    os << std::left << std::setw(28) << "cycle" << std::setw(8) << "UD n"
       << std::setw(16) << "UD bound" << std::setw(14) << "|delta| UD"
       << std::setw(8) << "LD n" << std::setw(16) << "LD bound"
       << std::setw(14) << "|delta| LD" << "\n";
    for (const auto& row : rows) {
        os << std::left << std::setw(28) << orbit_str(row.orbit);
        if (row.constant_density) {
            os << "= " << row.constant_value.get_str() << " at every n\n";
            continue;
        }
        if (row.upper_ok) {
            os << std::setw(8) << row.upper_n << std::setw(16)
               << decimal_str(row.upper_cert->claimed_enclosure.lo(), digits,
                              MPFR_RNDD)
               << std::setw(14) << abs_delta_str(*row.upper_cert, 3);
        } else {
            os << std::setw(8) << "-" << std::setw(16)
               << ("(" + row.upper_note + ")") << std::setw(14) << "-";
        }
        if (row.lower_ok) {
            os << std::setw(8) << row.lower_n << std::setw(16)
               << decimal_str(row.lower_cert->claimed_enclosure.hi(), digits,
                              MPFR_RNDU)
               << std::setw(14) << abs_delta_str(*row.lower_cert, 3);
        } else {
            os << std::setw(8) << "-" << std::setw(16)
               << ("(" + row.lower_note + ")") << std::setw(14) << "-";
        }
        os << "\n";
    }
    return os.str();
}

std::string table_json(const std::vector<TableRow>& rows, int digits) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json j;
        j["cycle_index"] = row.cycle_index;
        j["orbit"] = row.orbit;
        if (row.constant_density) {
            j["constant_density"] = row.constant_value.get_str();
        } else {
            if (row.upper_ok) {
                j["upper"] =
                    nlohmann::json::parse(row.upper_cert->to_json(digits));
            } else {
                j["upper"] = {{"error", row.upper_note}};
            }
            if (row.lower_ok) {
                j["lower"] =
                    nlohmann::json::parse(row.lower_cert->to_json(digits));
            } else {
                j["lower"] = {{"error", row.lower_note}};
            }
        }
        out.push_back(std::move(j));
    }
    return out.dump(2);
}

void emit_series(const SweepResult& sweep, std::ostream& out, int digits) {
    out << "n,cycle,prefix_lo,prefix_hi,band_lo,band_hi\n";
    for (long n = 1; n <= sweep.n_max(); ++n) {
        for (size_t c = 0; c < sweep.cycles().size(); ++c) {
            DensityValue p = sweep.prefix_density(c, n);
            DensityValue b = sweep.band_density(c, n);
            out << n << "," << sweep.cycles().at(c).members[0] << ","
                << p.lo_str(digits) << "," << p.hi_str(digits) << ","
                << b.lo_str(digits) << "," << b.hi_str(digits) << "\n";
        }
    }
    if (!out)
        throw validation_error("series destination is not writable");
}

void emit_series(const SweepResult& sweep, const std::string& path,
                 int digits) {
    std::ofstream file(path);
    if (!file)
        throw validation_error("cannot open series destination " + path);
    emit_series(sweep, file, digits);
}

} // namespace happy
