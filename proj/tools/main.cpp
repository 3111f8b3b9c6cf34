// happy-density: cycle structure, type densities, and certified density
// bounds for digit-sum maps (happy-number style iterations).

#include "happy/bounds.hpp"
#include "happy/cycles.hpp"
#include "happy/digit_function.hpp"
#include "happy/distribution.hpp"
#include "happy/errors.hpp"
#include "happy/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace happy;

struct GlobalArgs {
    int base = 10;
    int power = 2;
    std::string image; // "0,1,4,9,..." wins over power when given
    std::string mode = "auto";
    long exact_ceiling = 1000;
    long precision = 128;
    int threads = 1;
    long memory_mb = 8192;
    int digits_out = 30;
    std::string config;
    std::string out;
    std::string format = "text";
};

struct SelectionArgs {
    std::vector<std::string> members; // each names one cycle by any member(s)
    std::vector<size_t> indices;
    bool complement = false;
};

std::vector<long long> parse_ll_list(const std::string& s) {
    std::vector<long long> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty())
            throw validation_error("empty entry in list '" + s + "'");
        try {
            size_t pos = 0;
            out.push_back(std::stoll(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw validation_error("cannot parse '" + tok + "' as an integer");
        }
    }
    if (out.empty()) throw validation_error("empty list '" + s + "'");
    return out;
}

DigitFunction make_function(const GlobalArgs& g) {
    if (!g.image.empty())
        return DigitFunction(g.base, parse_ll_list(g.image));
    return DigitFunction::power(g.power, g.base);
}

NumMode resolve_mode(const GlobalArgs& g, long scale) {
    if (g.mode == "exact") return NumMode::exact;
    if (g.mode == "interval") return NumMode::interval;
    if (g.mode == "auto")
        return scale > g.exact_ceiling ? NumMode::interval : NumMode::exact;
    throw validation_error("mode must be exact, interval, or auto, got '" +
                           g.mode + "'");
}

ComputeOptions compute_options(const GlobalArgs& g) {
    ComputeOptions c;
    c.precision = static_cast<mpfr_prec_t>(g.precision);
    c.threads = g.threads;
    c.memory_budget = static_cast<std::uint64_t>(g.memory_mb) << 20;
    return c;
}

CycleSelection parse_selection(const CycleSet& cycles,
                               const SelectionArgs& sel) {
    std::vector<size_t> idx;
    for (const auto& arg : sel.members) {
        for (long long v : parse_ll_list(arg)) {
            if (v < 0)
                throw validation_error("cycle members are nonnegative, got " +
                                       std::to_string(v));
            auto i = cycles.index_of_member(static_cast<std::uint64_t>(v));
            if (!i)
                throw validation_error(std::to_string(v) +
                                       " is not a member of any cycle");
            idx.push_back(*i);
        }
    }
    for (size_t i : sel.indices) idx.push_back(i);
    if (idx.empty())
        throw validation_error(
            "select at least one cycle (--cycle or --cycle-index)");
    CycleSelection out(cycles, std::move(idx));
    if (sel.complement) out = CycleSelection::complement(cycles, out);
    if (out.indices().empty())
        throw validation_error("the selection complement is empty");
    return out;
}

void deliver(const GlobalArgs& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(g.out);
    if (!file) throw validation_error("cannot open output file " + g.out);
    file << text;
    if (!file) throw validation_error("cannot write output file " + g.out);
}

nlohmann::json selection_json(const CycleSet& cycles,
                              const CycleSelection& sel) {
    nlohmann::json arr = nlohmann::json::array();
    for (size_t i : sel.indices()) arr.push_back(cycles.at(i).orbit);
    return arr;
}

// ---- subcommands ----

void cmd_cycles(const GlobalArgs& g) {
    DigitFunction f = make_function(g);
    CycleSet cycles = find_cycles(f);
    if (g.format == "json") {
        nlohmann::json j;
        j["function"] = {{"base", f.base()}, {"digit_image", f.digit_image()}};
        j["d_star"] = f.d_star();
        j["cycles"] = nlohmann::json::array();
        for (size_t i = 0; i < cycles.size(); ++i)
            j["cycles"].push_back({{"index", i},
                                   {"members", cycles.at(i).members},
                                   {"orbit", cycles.at(i).orbit}});
        deliver(g, j.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    os << f.describe() << "\n";
    for (size_t i = 0; i < cycles.size(); ++i) {
        os << i << ": {";
        const auto& orbit = cycles.at(i).orbit;
        for (size_t k = 0; k < orbit.size(); ++k)
            os << (k ? "," : "") << orbit[k];
        os << "}\n";
    }
    deliver(g, os.str());
}

struct DensityArgs {
    long prefix = -1;
    long band = -1;
    SelectionArgs sel;
    std::string dump;
};

void cmd_density(const GlobalArgs& g, const DensityArgs& a) {
    if ((a.prefix < 0) == (a.band < 0))
        throw validation_error("give exactly one of --prefix or --band");
    if (!a.dump.empty() && a.prefix < 0)
        throw validation_error("--dump needs --prefix");
    DigitFunction f = make_function(g);
    CycleSet cycles = find_cycles(f);
    CycleSelection sel = parse_selection(cycles, a.sel);
    const long scale = a.prefix >= 0 ? a.prefix : a.band;
    const NumMode mode = resolve_mode(g, scale);
    ComputeOptions copts = compute_options(g);
    TypeTable table = build_type_table(
        f, cycles,
        static_cast<std::uint64_t>(scale) *
            static_cast<std::uint64_t>(f.alpha()));

    DensityValue d;
    if (a.prefix >= 0) {
        SumDistribution dist = SumDistribution::compute(f, a.prefix, mode, copts);
        if (!a.dump.empty()) {
            std::ofstream dump(a.dump);
            if (!dump)
                throw validation_error("cannot open dump file " + a.dump);
            if (mode == NumMode::exact) {
                dump << "i,count\n";
                for (long long i = 0; i <= dist.support_max(); ++i)
                    dump << i << "," << dist.count(i).get_str() << "\n";
            } else {
                dump << "i,lo,hi\n";
                for (long long i = 0; i <= dist.support_max(); ++i) {
                    Ival p = dist.probability_interval(i);
                    dump << i << "," << p.lo_str(g.digits_out) << ","
                         << p.hi_str(g.digits_out) << "\n";
                }
            }
        }
        if (mode == NumMode::exact) {
            mpz_class den;
            mpz_ui_pow_ui(den.get_mpz_t(),
                          static_cast<unsigned long>(f.base()),
                          static_cast<unsigned long>(a.prefix));
            mpq_class q(dist.selected_count(table, sel), den);
            q.canonicalize();
            d = DensityValue::of_exact(q);
        } else {
            d = DensityValue::of_interval(dist.selected_probability(table, sel));
        }
    } else {
        d = band_density(f, table, sel, a.band, mode, copts);
    }

    if (g.format == "json") {
        nlohmann::json j;
        j["op"] = "density";
        j["kind"] = a.prefix >= 0 ? "prefix" : "band";
        j[a.prefix >= 0 ? "m" : "n"] = scale;
        j["selection"] = selection_json(cycles, sel);
        j["mode"] = mode == NumMode::exact ? "exact" : "interval";
        j["lo"] = d.lo_str(g.digits_out);
        j["hi"] = d.hi_str(g.digits_out);
        deliver(g, j.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    os << (a.prefix >= 0 ? "prefix m=" : "band n=") << scale << " selection "
       << sel.describe(cycles) << "\n";
    os << "mode " << (mode == NumMode::exact ? "exact" : "interval") << "\n";
    os << "density >=" << d.lo_str(g.digits_out) << "\n";
    os << "density <=" << d.hi_str(g.digits_out) << "\n";
    deliver(g, os.str());
}

struct SweepArgs {
    long n_max = 0;
};

SweepOptions sweep_options(const GlobalArgs& g) {
    SweepOptions s;
    if (g.mode == "exact")
        s.mode = NumMode::exact;
    else if (g.mode == "interval")
        s.mode = NumMode::interval;
    else if (g.mode != "auto")
        throw validation_error("mode must be exact, interval, or auto");
    s.exact_ceiling = g.exact_ceiling;
    s.precision = static_cast<mpfr_prec_t>(g.precision);
    s.threads = g.threads;
    s.memory_budget = static_cast<std::uint64_t>(g.memory_mb) << 20;
    return s;
}

void cmd_sweep(const GlobalArgs& g, const SweepArgs& a) {
    if (g.format != "text" && g.format != "csv")
        throw validation_error("sweep emits CSV; use --format csv");
    DigitFunction f = make_function(g);
    CycleSet cycles = find_cycles(f);
    SweepResult sweep = density_sweep(f, cycles, a.n_max, sweep_options(g));
    if (g.out.empty())
        emit_series(sweep, std::cout, g.digits_out);
    else
        emit_series(sweep, g.out, g.digits_out);
}

struct TableArgs {
    long n_max = 0;
    std::vector<std::string> pin_upper; // "member=n"
    std::vector<std::string> pin_lower;
    long cert_precision = 256;
};

std::map<size_t, long> parse_pins(const CycleSet& cycles,
                                  const std::vector<std::string>& pins) {
    std::map<size_t, long> out;
    for (const auto& p : pins) {
        auto eq = p.find('=');
        if (eq == std::string::npos)
            throw validation_error("pin '" + p + "' is not member=n");
        auto member = parse_ll_list(p.substr(0, eq));
        auto n = parse_ll_list(p.substr(eq + 1));
        if (member.size() != 1 || n.size() != 1 || member[0] < 0)
            throw validation_error("pin '" + p + "' is not member=n");
        auto idx = cycles.index_of_member(static_cast<std::uint64_t>(member[0]));
        if (!idx)
            throw validation_error(std::to_string(member[0]) +
                                   " is not a member of any cycle");
        out[*idx] = n[0];
    }
    return out;
}

void cmd_table(const GlobalArgs& g, const TableArgs& a) {
    DigitFunction f = make_function(g);
    CycleSet cycles = find_cycles(f);
    SweepResult sweep = density_sweep(f, cycles, a.n_max, sweep_options(g));
    TableOptions topts;
    topts.pin_upper = parse_pins(cycles, a.pin_upper);
    topts.pin_lower = parse_pins(cycles, a.pin_lower);
    topts.cert_precision = static_cast<mpfr_prec_t>(a.cert_precision);
    auto rows = build_table(sweep, topts);
    if (g.format == "json")
        deliver(g, table_json(rows, g.digits_out) + "\n");
    else
        deliver(g, render_table(rows, 8));
}

struct CertifyArgs {
    bool upper = false;
    bool lower = false;
    long n = 0;
    SelectionArgs sel;
    long cert_precision = 256;
};

void cmd_certify(const GlobalArgs& g, const CertifyArgs& a) {
    if (a.upper == a.lower)
        throw validation_error("give exactly one of --upper or --lower");
    DigitFunction f = make_function(g);
    CycleSet cycles = find_cycles(f);
    CycleSelection sel = parse_selection(cycles, a.sel);
    const NumMode mode = resolve_mode(g, a.n);
    ComputeOptions copts = compute_options(g);
    TypeTable table = build_type_table(
        f, cycles,
        static_cast<std::uint64_t>(a.n) * static_cast<std::uint64_t>(f.alpha()));
    const auto prec = static_cast<mpfr_prec_t>(a.cert_precision);

    BoundCertificate cert;
    if (a.upper) {
        DensityValue band = band_density(f, table, sel, a.n, mode, copts);
        cert = certify_upper(f, cycles, sel, a.n, band, prec);
    } else {
        CycleSelection rest = CycleSelection::complement(cycles, sel);
        if (rest.indices().empty())
            throw validation_error(
                "lower bounds need a nonempty complement selection");
        DensityValue band = band_density(f, table, rest, a.n, mode, copts);
        cert = certify_lower(f, cycles, sel, a.n, band, prec);
    }

    if (!g.out.empty()) {
        std::ofstream file(g.out);
        if (!file) throw validation_error("cannot open output file " + g.out);
        file << cert.to_json(g.digits_out) << "\n";
        if (!file)
            throw validation_error("cannot write output file " + g.out);
    }
    if (g.format == "json" && g.out.empty())
        std::cout << cert.to_json(g.digits_out) << "\n";
    else
        std::cout << cert.to_text(g.digits_out);
}

struct DiagnoseArgs {
    long m = 100;
    double window = 2.0;
};

void cmd_diagnose(const GlobalArgs& g, const DiagnoseArgs& a) {
    DigitFunction f = make_function(g);
    double dev = local_limit_deviation(f, a.m, a.window, compute_options(g));
    std::ostringstream os;
    os << "m=" << a.m << " window=" << a.window
       << " max relative deviation from the Gaussian: " << dev << "\n";
    deliver(g, os.str());
}

// Config file support: a JSON object of long option names to values, applied
// to every option the command line left untouched.
struct ConfigBinding {
    CLI::Option* opt;
    std::function<void(const nlohmann::json&)> apply;
};

void apply_config(const std::string& path,
                  std::vector<ConfigBinding>& bindings) {
    if (path.empty()) return;
    std::ifstream file(path);
    if (!file) throw validation_error("cannot open config file " + path);
    nlohmann::json j;
    try {
        file >> j;
    } catch (const std::exception& e) {
        throw validation_error("config file " + path +
                               " is not valid JSON: " + e.what());
    }
    if (!j.is_object())
        throw validation_error("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto& b : bindings) {
            bool match = false;
            for (const auto& name : b.opt->get_lnames())
                if (name == key) match = true;
            if (!match) continue;
            known = true;
            if (b.opt->count() == 0) {
                try {
                    b.apply(value);
                } catch (const std::exception& e) {
                    throw validation_error("config key '" + key +
                                           "': " + e.what());
                }
            }
        }
        if (!known)
            throw validation_error("config key '" + key +
                                   "' matches no option");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"type densities and certified density bounds for digit-sum "
                 "maps"};
    app.require_subcommand(1);

    GlobalArgs g;
    std::vector<ConfigBinding> bindings;
    auto bind = [&bindings](CLI::Option* opt, auto& var) {
        bindings.push_back(
            {opt, [&var](const nlohmann::json& v) { v.get_to(var); }});
        return opt;
    };

    bind(app.add_option("--base", g.base, "number base (default 10)"), g.base);
    bind(app.add_option("--power", g.power,
                        "digit image i^power (default 2)"),
         g.power);
    auto* image_opt =
        bind(app.add_option("--image", g.image,
                            "explicit digit image, comma separated, wins over "
                            "--power"),
             g.image);
    bind(app.add_option("--mode", g.mode, "exact | interval | auto"), g.mode);
    bind(app.add_option("--exact-ceiling", g.exact_ceiling,
                        "auto mode switches to interval above this digit "
                        "count (default 1000)"),
         g.exact_ceiling);
    bind(app.add_option("--precision", g.precision,
                        "interval endpoint precision in bits (default 128)")
             ->envname("HAPPY_DENSITY_PRECISION"),
         g.precision);
    bind(app.add_option("--threads", g.threads, "worker threads (default 1)"),
         g.threads);
    bind(app.add_option("--memory-mb", g.memory_mb,
                        "row memory budget in MiB (default 8192)"),
         g.memory_mb);
    bind(app.add_option("--digits-out", g.digits_out,
                        "decimal digits in printed values (default 30)"),
         g.digits_out);
    app.add_option("--config", g.config,
                   "JSON config file; explicit flags win");
    bind(app.add_option("--out", g.out, "write output to this file"), g.out);
    bind(app.add_option("--format", g.format, "text | json (csv for sweep)"),
         g.format);

    auto add_selection = [&](CLI::App* cmd, SelectionArgs& sel) {
        bind(cmd->add_option("--cycle", sel.members,
                             "select the cycle containing this member; "
                             "repeatable, comma lists allowed"),
             sel.members);
        bind(cmd->add_option("--cycle-index", sel.indices,
                             "select a cycle by index; repeatable"),
             sel.indices);
        cmd->add_flag("--complement", sel.complement,
                      "use the complement of the selection");
    };

    auto* cmd_cycles_p =
        app.add_subcommand("cycles", "list every cycle of the map");

    DensityArgs da;
    auto* cmd_density_p = app.add_subcommand(
        "density", "type density over a prefix [0, b^m) or a band of "
                   "n-digit integers");
    bind(cmd_density_p->add_option("--prefix", da.prefix,
                                   "digit count m of the prefix [0, b^m)"),
         da.prefix);
    bind(cmd_density_p->add_option("--band", da.band,
                                   "digit count n of the band"),
         da.band);
    add_selection(cmd_density_p, da.sel);
    bind(cmd_density_p->add_option(
             "--dump", da.dump,
             "write the full distribution row to this CSV file"),
         da.dump);

    SweepArgs sa;
    auto* cmd_sweep_p = app.add_subcommand(
        "sweep", "emit prefix and band densities for every cycle, n = 1..n-max "
                 "(CSV)");
    bind(cmd_sweep_p->add_option("--n-max", sa.n_max, "largest digit count")
             ->required(),
         sa.n_max);

    TableArgs ta;
    auto* cmd_table_p = app.add_subcommand(
        "table", "certified upper/lower density bounds per cycle at the best "
                 "anchors");
    bind(cmd_table_p->add_option("--n-max", ta.n_max, "sweep range")
             ->required(),
         ta.n_max);
    bind(cmd_table_p->add_option("--pin-upper", ta.pin_upper,
                                 "member=n, pin the upper-bound anchor"),
         ta.pin_upper);
    bind(cmd_table_p->add_option("--pin-lower", ta.pin_lower,
                                 "member=n, pin the lower-bound anchor"),
         ta.pin_lower);
    bind(cmd_table_p->add_option("--cert-precision", ta.cert_precision,
                                 "certificate precision in bits (default 256)"),
         ta.cert_precision);

    CertifyArgs ca;
    auto* cmd_certify_p = app.add_subcommand(
        "certify", "emit a machine-checkable density bound certificate");
    cmd_certify_p->add_flag("--upper", ca.upper,
                            "lower bound on the upper density");
    cmd_certify_p->add_flag("--lower", ca.lower,
                            "upper bound on the lower density");
    bind(cmd_certify_p->add_option("--n", ca.n, "band digit count (4 | n)")
             ->required(),
         ca.n);
    add_selection(cmd_certify_p, ca.sel);
    bind(cmd_certify_p->add_option("--cert-precision", ca.cert_precision,
                                   "certificate precision in bits (default "
                                   "256)"),
         ca.cert_precision);

    DiagnoseArgs dga;
    auto* cmd_diagnose_p = app.add_subcommand(
        "diagnose", "compare a distribution row against its Gaussian limit");
    bind(cmd_diagnose_p->add_option("--m", dga.m, "digit count (default 100)"),
         dga.m);
    bind(cmd_diagnose_p->add_option(
             "--window", dga.window,
             "half width in standard deviations (default 2)"),
         dga.window);

    // Global options may appear after the subcommand name.
    for (CLI::App* sub : {cmd_cycles_p, cmd_density_p, cmd_sweep_p,
                          cmd_table_p, cmd_certify_p, cmd_diagnose_p})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
        apply_config(g.config, bindings);
        if (image_opt->count() > 0 && g.image.empty())
            throw validation_error("digit image is empty");
        if (cmd_cycles_p->parsed())
            cmd_cycles(g);
        else if (cmd_density_p->parsed())
            cmd_density(g, da);
        else if (cmd_sweep_p->parsed())
            cmd_sweep(g, sa);
        else if (cmd_table_p->parsed())
            cmd_table(g, ta);
        else if (cmd_certify_p->parsed())
            cmd_certify(g, ca);
        else if (cmd_diagnose_p->parsed())
            cmd_diagnose(g, dga);
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const resource_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const certification_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
