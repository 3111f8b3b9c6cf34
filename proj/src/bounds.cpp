#include "happy/bounds.hpp"

#include "happy/errors.hpp"

#include <json.hpp>

#include <sstream>

namespace happy {

namespace {

mpz_class ui_pow(unsigned long base, unsigned long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), base, e);
    return r;
}

Ival sigma_of(const DigitFunction& f, mpfr_prec_t prec) {
    return Ival::sqrt(Ival::of_mpq(f.digit_variance(), prec));
}

} // namespace

BoundBReport check_bound_B(const DigitFunction& f, long n, mpfr_prec_t prec) {
    if (n < 1) throw validation_error("digit count must be positive");
    const auto b = static_cast<unsigned long>(f.base());
    const Ival one = Ival::of_ulong(1, prec);
    const Ival two = Ival::of_ulong(2, prec);
    const Ival three = Ival::of_ulong(3, prec);
    const Ival four = Ival::of_ulong(4, prec);
    const Ival mu = Ival::of_mpq(f.digit_mean(), prec);
    const Ival sigma = sigma_of(f, prec);
    const mpz_class rhs_z = ui_pow(b, static_cast<unsigned long>(n - 1));
    const Ival rhs = Ival::of_mpz(rhs_z, prec);

    BoundBReport rep;
    rep.n = n;

    Ival lhs1 = four * (one + three * mu +
                        Ival::sqrt(two) * sigma *
                            Ival::pow_dyadic(b, 5 * n, 8, prec));
    rep.b1_ok = lhs1.certainly_le_z(rhs_z);
    rep.b1_margin = rhs - lhs1;

    Ival lhs2 = Ival::sqrt(three * mu * Ival::of_ulong(b, prec)) * sigma;
    Ival rhs2 = Ival::pow_dyadic(b, 3 * n, 8, prec);
    rep.b2_ok = lhs2.certainly_le(rhs2);
    rep.b2_margin = rhs2 - lhs2;

    Ival lhs3 =
        four * mu *
        (three * mu + one + Ival::pow_dyadic(b, 3 * n, 4, prec) +
         two * sigma / Ival::sqrt(mu) * Ival::pow_dyadic(b, 5 * n, 8, prec));
    rep.b3_ok = lhs3.certainly_le_z(rhs_z);
    rep.b3_margin = rhs - lhs3;

    return rep;
}

long first_certifiable_n(const DigitFunction& f, long limit, mpfr_prec_t prec) {
    for (long n = 1; n <= limit; ++n)
        if (check_bound_B(f, n, prec).all_ok()) return n;
    throw certification_error("no digit count up to " + std::to_string(limit) +
                              " passes the bound check");
}

Ival delta(const DigitFunction& f, long n, mpfr_prec_t prec) {
    if (n < 1) throw validation_error("digit count must be positive");
    const auto b = static_cast<unsigned long>(f.base());
    const Ival one = Ival::of_ulong(1, prec);
    const Ival two = Ival::of_ulong(2, prec);
    const Ival four = Ival::of_ulong(4, prec);
    const Ival mu = Ival::of_mpq(f.digit_mean(), prec);
    const Ival sigma = sigma_of(f, prec);
    Ival t1 = two / (one - Ival::pow_dyadic(b, n, 4, prec));
    Ival t2 = four * sigma /
              (Ival::sqrt(mu) * (one - Ival::pow_dyadic(b, n, 8, prec)));
    return t1 + t2;
}

namespace {

BoundCertificate make_certificate(CertKind kind, const DigitFunction& f,
                                  const CycleSet& cycles,
                                  const CycleSelection& sel, long n,
                                  const DensityValue& band,
                                  mpfr_prec_t prec) {
    if (n % 4 != 0)
        throw certification_error("certification needs 4 | n, got n=" +
                                  std::to_string(n));
    BoundBReport rep = check_bound_B(f, n, prec);
    if (!rep.all_ok()) {
        std::ostringstream os;
        os << "bound check fails at n=" << n << " (b1=" << rep.b1_ok
           << " b2=" << rep.b2_ok << " b3=" << rep.b3_ok << ")";
        throw certification_error(os.str());
    }

    BoundCertificate cert;
    cert.kind = kind;
    cert.base = f.base();
    cert.digit_image = f.digit_image();
    for (size_t i : sel.indices())
        cert.cycle_orbits.push_back(cycles.at(i).orbit);
    cert.n = n;
    cert.band = band;
    cert.band_is_complement = (kind == CertKind::lower_density_upper_bound);
    cert.delta_enclosure = delta(f, n, prec);
    cert.bound_check = rep;
    cert.precision = prec;

    Ival damped = band.as_interval(prec) * Ival::exp(cert.delta_enclosure);
    if (kind == CertKind::upper_density_lower_bound)
        cert.claimed_enclosure = damped;
    else
        cert.claimed_enclosure = Ival::of_ulong(1, prec) - damped;
    return cert;
}

} // namespace

BoundCertificate certify_upper(const DigitFunction& f, const CycleSet& cycles,
                               const CycleSelection& sel, long n,
                               const DensityValue& band, mpfr_prec_t prec) {
    return make_certificate(CertKind::upper_density_lower_bound, f, cycles,
                            sel, n, band, prec);
}

BoundCertificate certify_lower(const DigitFunction& f, const CycleSet& cycles,
                               const CycleSelection& sel, long n,
                               const DensityValue& complement_band,
                               mpfr_prec_t prec) {
    return make_certificate(CertKind::lower_density_upper_bound, f, cycles,
                            sel, n, complement_band, prec);
}

mpfr_srcptr BoundCertificate::claimed_endpoint() const {
    return kind == CertKind::upper_density_lower_bound
               ? claimed_enclosure.lo()
               : claimed_enclosure.hi();
}

std::string BoundCertificate::claimed_str(int digits) const {
    if (kind == CertKind::upper_density_lower_bound)
        return ">=" + decimal_str(claimed_enclosure.lo(), digits, MPFR_RNDD);
    return "<=" + decimal_str(claimed_enclosure.hi(), digits, MPFR_RNDU);
}

double BoundCertificate::claimed_d() const {
    return kind == CertKind::upper_density_lower_bound
               ? claimed_enclosure.lo_d()
               : claimed_enclosure.hi_d();
}

namespace {

nlohmann::json ival_json(const Ival& v, int digits) {
    return {{"lo", v.lo_str(digits)}, {"hi", v.hi_str(digits)}};
}

} // namespace

std::string BoundCertificate::to_json(int digits) const {
    nlohmann::json j;
    j["spec_version"] = 1;
    j["kind"] = kind == CertKind::upper_density_lower_bound
                    ? "upper_density_lower_bound"
                    : "lower_density_upper_bound";
    j["function"] = {{"base", base}, {"digit_image", digit_image}};
    j["cycles"] = cycle_orbits;
    j["n"] = n;
    j["band_density"] = {
        {"lo", band.lo_str(digits)},
        {"hi", band.hi_str(digits)},
        {"mode", band.mode == NumMode::exact ? "exact" : "interval"},
        {"of", band_is_complement ? "complement" : "selection"},
    };
    j["delta"] = ival_json(delta_enclosure, digits);
    j["bound_check"] = {
        {"b1_ok", bound_check.b1_ok},
        {"b2_ok", bound_check.b2_ok},
        {"b3_ok", bound_check.b3_ok},
        {"b1_margin", ival_json(bound_check.b1_margin, digits)},
        {"b2_margin", ival_json(bound_check.b2_margin, digits)},
        {"b3_margin", ival_json(bound_check.b3_margin, digits)},
    };
    j["claimed"] = claimed_str(digits);
    j["precision_bits"] = static_cast<long>(precision);
    return j.dump(2);
}

std::string BoundCertificate::to_text(int digits) const {
    std::ostringstream os;
    os << (kind == CertKind::upper_density_lower_bound
               ? "upper density lower bound"
               : "lower density upper bound")
       << " at n=" << n << "\n";
    os << "  cycles:";
    for (const auto& orbit : cycle_orbits) {
        os << " {";
        for (size_t i = 0; i < orbit.size(); ++i)
            os << (i ? "," : "") << orbit[i];
        os << "}";
    }
    os << "\n";
    os << "  band density" << (band_is_complement ? " (complement)" : "")
       << " in [" << band.lo_str(digits) << ", " << band.hi_str(digits)
       << "]\n";
    os << "  delta in [" << delta_enclosure.lo_str(digits) << ", "
       << delta_enclosure.hi_str(digits) << "]\n";
    os << "  claimed " << claimed_str(digits) << "\n";
    os << "  precision " << precision << " bits\n";
    return os.str();
}

Ival lemma_shift_bound(const mpq_class& density, const mpz_class& interval_size,
                       const Ival& sigma_y, const Ival& lambda,
                       mpfr_prec_t prec) {
    if (interval_size <= 0)
        throw validation_error("interval size must be positive");
    if (!lambda.certainly_positive())
        throw validation_error("lambda must be certainly positive");
    const Ival one = Ival::of_ulong(1, prec);
    const Ival two = Ival::of_ulong(2, prec);
    Ival d = Ival::of_mpq(density, prec);
    Ival keep = one - one / (lambda * lambda);
    Ival spread = one + two * sigma_y * lambda / Ival::of_mpz(interval_size, prec);
    return keep * (d / spread);
}

WindowTransfer theorem_window_transfer(const DigitFunction& f,
                                       const mpz_class& n2, const Ival& lambda,
                                       const mpz_class& i_left,
                                       const mpz_class& i_size,
                                       const DensityValue& window_density,
                                       mpfr_prec_t prec) {
    if (n2 % 4 != 0)
        throw certification_error("window transfer needs 4 | n2");
    if (i_size <= 0) throw validation_error("interval size must be positive");
    if (!lambda.certainly_positive())
        throw validation_error("lambda must be certainly positive");

    const Ival one = Ival::of_ulong(1, prec);
    const Ival four = Ival::of_ulong(4, prec);
    const Ival tq = Ival::of_mpq(mpq_class(3, 4), prec);
    const Ival mu = Ival::of_mpq(f.digit_mean(), prec);
    const Ival sigma = sigma_of(f, prec);
    const Ival n2i = Ival::of_mpz(n2, prec);

    Ival drift = tq * mu * n2i;
    Ival spread = lambda * sigma * Ival::sqrt(tq * n2i);
    WindowTransfer out;
    out.window_left = one + drift + spread;
    out.window_right = n2i / four + drift - spread;

    const mpz_class i_right = i_left + i_size - 1;
    if (mpfr_cmp_z(out.window_left.hi(), i_left.get_mpz_t()) > 0)
        throw certification_error(
            "window left endpoint not certified: need " + i_left.get_str() +
            " >= J_left");
    if (mpfr_cmp_z(out.window_right.lo(), i_right.get_mpz_t()) < 0)
        throw certification_error(
            "window right endpoint not certified: need " + i_right.get_str() +
            " <= J_right");

    Ival d = window_density.as_interval(prec);
    Ival three_n2 = Ival::of_ulong(3, prec) * n2i;
    Ival denom =
        one + Ival::sqrt(three_n2) * sigma * lambda / Ival::of_mpz(i_size, prec);
    out.bound = (one - one / (lambda * lambda)) * (d / denom);
    return out;
}

mpz_class find_n2(const DigitFunction& f, long n, const mpz_class& a,
                  mpfr_prec_t prec) {
    BoundBReport rep = check_bound_B(f, n, prec);
    if (!rep.all_ok())
        throw certification_error("bound check fails at n=" +
                                  std::to_string(n));
    const auto b = static_cast<unsigned long>(f.base());
    const mpz_class bn1 = ui_pow(b, static_cast<unsigned long>(n - 1));
    const mpz_class bn = bn1 * f.base();
    if (a < bn1 || a > bn)
        throw validation_error("target must lie in [base^(n-1), base^n]");

    const mpq_class mu = f.digit_mean();
    const mpz_class p = mu.get_num(), q = mu.get_den();

    // f(x) = 1 + (3/4) mu x + b^(n/8) sigma sqrt((3/4) x)
    auto fval = [&](const mpz_class& x, mpfr_prec_t pr) {
        const Ival tq = Ival::of_mpq(mpq_class(3, 4), pr);
        const Ival xi = Ival::of_mpz(x, pr);
        return Ival::of_ulong(1, pr) +
               tq * Ival::of_mpq(mu, pr) * xi +
               Ival::pow_dyadic(b, n, 8, pr) *
                   Ival::sqrt(Ival::of_mpq(f.digit_variance(), pr)) *
                   Ival::sqrt(tq * xi);
    };

    constexpr mpfr_prec_t kPrecCap = 1 << 15;
    // true:  f(x) certainly <= a; false: f(x) certainly > a
    auto below = [&](const mpz_class& x) -> bool {
        for (mpfr_prec_t pr = prec; pr <= kPrecCap; pr *= 2) {
            Ival v = fval(x, pr);
            if (v.certainly_le_z(a)) return true;
            if (mpfr_cmp_z(v.lo(), a.get_mpz_t()) > 0) return false;
        }
        throw internal_error("could not separate the window budget from the "
                             "target at x=" + x.get_str());
    };

    // Anchors: k_lo always satisfies the budget (shift construction
    // guarantees it for any a >= base^(n-1)), k_hi always exceeds it.
    mpz_class klo, khi;
    mpz_fdiv_q(klo.get_mpz_t(), mpz_class(bn1 * q).get_mpz_t(),
               mpz_class(4 * p).get_mpz_t());
    klo += 1;
    mpz_fdiv_q(khi.get_mpz_t(), mpz_class(bn * q).get_mpz_t(),
               mpz_class(3 * p).get_mpz_t());
    khi += 2;
    if (!below(4 * klo))
        throw internal_error("low anchor fails its budget guarantee");
    if (below(4 * khi))
        throw internal_error("high anchor fails its overshoot guarantee");

    while (khi - klo > 1) {
        mpz_class mid = (klo + khi) / 2;
        if (below(4 * mid))
            klo = mid;
        else
            khi = mid;
    }
    mpz_class n2 = 4 * klo;

    // Postconditions, verified independently of the search.
    if (n2 % 4 != 0)
        throw internal_error("result not divisible by 4");
    if (!(n2 * p >= bn1 * q))
        throw internal_error("result below base^(n-1)/mu");
    if (!(3 * n2 * p <= 4 * bn * q))
        throw internal_error("result above (4/(3 mu)) base^n");
    const mpq_class residual_cap = 3 * mu + 1;
    bool residual_ok = false;
    for (mpfr_prec_t pr = prec; pr <= kPrecCap; pr *= 2) {
        Ival diff = Ival::of_mpz(a, pr) - fval(n2, pr);
        if (mpfr_sgn(diff.lo()) >= 0 && diff.certainly_le_q(residual_cap)) {
            residual_ok = true;
            break;
        }
    }
    if (!residual_ok)
        throw internal_error("residual budget check failed at n2=" +
                             n2.get_str());
    return n2;
}

} // namespace happy
