#include "happy/cycles.hpp"

#include "happy/errors.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace happy {

namespace {

// Walk [start, limit] coloring every visited value with the index of the
// cycle its trajectory reaches. flags must be sized limit+1 and initialized
// to kUnknown. New cycles are appended to cycles in discovery order.
constexpr std::int32_t kUnknown = -1;
constexpr std::int32_t kInProgress = -2;

void color_range(const DigitFunction& f, std::uint64_t limit,
                 std::vector<std::int32_t>& flags,
                 std::vector<std::vector<std::uint64_t>>& cycles) {
    std::vector<std::uint64_t> path;
    for (std::uint64_t start = 1; start <= limit; ++start) {
        if (flags[start] != kUnknown) continue;
        path.clear();
        std::uint64_t x = start;
        while (flags[x] == kUnknown) {
            flags[x] = kInProgress;
            path.push_back(x);
            x = f.apply_u64(x);
            // The map sends [0, limit] into itself once limit is at least
            // base^(d_star-1) - 1; build_type_table picks limits that way.
        }
        std::int32_t idx;
        if (flags[x] == kInProgress) {
            // Closed a new loop; everything from the first occurrence of x
            // onward is on the cycle.
            auto it = std::find(path.begin(), path.end(), x);
            idx = static_cast<std::int32_t>(cycles.size());
            cycles.emplace_back(it, path.end());
        } else {
            idx = flags[x];
        }
        for (std::uint64_t v : path) flags[v] = idx;
    }
}

std::uint64_t search_limit(const DigitFunction& f) {
    // base^(d_star-1) - 1 must fit comfortably; d_star is small for any sane
    // image but a hostile one (huge alpha) could overflow 64 bits.
    mpz_class lim = 1;
    for (int i = 1; i < f.d_star(); ++i) lim *= f.base();
    lim -= 1;
    if (!lim.fits_ulong_p() || lim.get_ui() > (1ULL << 40))
        throw resource_error(
            "cycle search range " + lim.get_str() +
            " is too large to enumerate");
    return lim.get_ui();
}

Cycle make_cycle(const DigitFunction& f, std::vector<std::uint64_t> members) {
    Cycle c;
    std::sort(members.begin(), members.end());
    c.members = members;
    c.orbit.reserve(members.size());
    std::uint64_t x = members[0];
    for (size_t i = 0; i < members.size(); ++i) {
        c.orbit.push_back(x);
        x = f.apply_u64(x);
    }
    return c;
}

} // namespace

CycleSet::CycleSet(std::vector<Cycle> cycles) : cycles_(std::move(cycles)) {
    std::sort(cycles_.begin(), cycles_.end(),
              [](const Cycle& a, const Cycle& b) {
                  return a.members[0] < b.members[0];
              });
}

const Cycle& CycleSet::at(size_t i) const {
    if (i >= cycles_.size())
        throw out_of_range_error("cycle index " + std::to_string(i) +
                                 " out of range, have " +
                                 std::to_string(cycles_.size()));
    return cycles_[i];
}

std::optional<size_t> CycleSet::index_of_member(std::uint64_t v) const {
    for (size_t i = 0; i < cycles_.size(); ++i)
        if (std::binary_search(cycles_[i].members.begin(),
                               cycles_[i].members.end(), v))
            return i;
    return std::nullopt;
}

std::vector<mpz_class> trajectory(const DigitFunction& f, const mpz_class& n) {
    if (n < 1)
        throw validation_error("trajectory starts from a positive integer");
    std::vector<mpz_class> out;
    std::set<mpz_class> seen;
    mpz_class x = n;
    // Values drop below base^(d_star-1) within d_star*digits(n) steps and the
    // tail is a finite orbit, so this terminates; the budget is a safety net.
    for (long steps = 0; steps < 1000000; ++steps) {
        out.push_back(x);
        if (!seen.insert(x).second) return out;
        x = f.apply(x);
    }
    throw internal_error("trajectory did not close after 1e6 steps");
}

CycleSet find_cycles(const DigitFunction& f) {
    std::uint64_t limit = search_limit(f);
    std::vector<std::int32_t> flags(limit + 1, kUnknown);
    std::vector<std::vector<std::uint64_t>> raw;
    color_range(f, limit, flags, raw);
    std::vector<Cycle> cycles;
    cycles.reserve(raw.size());
    for (auto& members : raw) cycles.push_back(make_cycle(f, std::move(members)));
    return CycleSet(std::move(cycles));
}

TypeTable::TypeTable(std::uint64_t bound, std::vector<std::int32_t> flags)
    : bound_(bound), flags_(std::move(flags)) {
    if (flags_.size() != bound_ + 1)
        throw internal_error("type table size does not match its bound");
}

std::int32_t TypeTable::flag(std::uint64_t i) const {
    if (i > bound_)
        throw out_of_range_error("type table lookup " + std::to_string(i) +
                                 " past bound " + std::to_string(bound_));
    return flags_[i];
}

TypeTable build_type_table(const DigitFunction& f, const CycleSet& cycles,
                           std::uint64_t bound) {
    // Extend the working range so it is closed under the map: below the cycle
    // search limit values can only move within that limit, above it they
    // strictly decrease.
    std::uint64_t limit = std::max(bound, search_limit(f));
    std::vector<std::int32_t> flags(limit + 1, kUnknown);
    std::vector<std::vector<std::uint64_t>> raw;
    color_range(f, limit, flags, raw);

    // color_range numbered cycles in discovery order; remap to the canonical
    // indices of the caller's CycleSet.
    std::vector<std::int32_t> remap(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        std::uint64_t member = *std::min_element(raw[i].begin(), raw[i].end());
        auto idx = cycles.index_of_member(member);
        if (!idx)
            throw internal_error("classification found a cycle missing from "
                                 "the cycle set, member " +
                                 std::to_string(member));
        remap[i] = static_cast<std::int32_t>(*idx);
    }
    flags.resize(bound + 1);
    for (auto& fl : flags)
        if (fl >= 0) fl = remap[static_cast<size_t>(fl)];
    // Entry 0 answers "what type is an integer whose image sum is 0". That is
    // the {0} cycle when the set records one and no type otherwise; the walk
    // only reaches 0 when some positive value maps to it, so pin the entry
    // instead of trusting walk coverage.
    if (auto zero = cycles.index_of_member(0))
        flags[0] = static_cast<std::int32_t>(*zero);
    else
        flags[0] = kUnknown;
    return TypeTable(bound, std::move(flags));
}

CycleSelection::CycleSelection(const CycleSet& cycles,
                               std::vector<size_t> indices)
    : indices_(std::move(indices)), mask_(cycles.size(), 0) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()),
                   indices_.end());
    for (size_t i : indices_) {
        if (i >= cycles.size())
            throw out_of_range_error("cycle index " + std::to_string(i) +
                                     " out of range, have " +
                                     std::to_string(cycles.size()));
        mask_[i] = 1;
    }
}

CycleSelection CycleSelection::complement(const CycleSet& cycles,
                                          const CycleSelection& sel) {
    std::vector<size_t> rest;
    for (size_t i = 0; i < cycles.size(); ++i)
        if (!sel.contains(i)) rest.push_back(i);
    return CycleSelection(cycles, std::move(rest));
}

bool CycleSelection::contains(size_t cycle_index) const {
    return cycle_index < mask_.size() && mask_[cycle_index] != 0;
}

std::string CycleSelection::describe(const CycleSet& cycles) const {
    std::ostringstream os;
    for (size_t k = 0; k < indices_.size(); ++k) {
        if (k) os << " u ";
        os << "{";
        const auto& orbit = cycles.at(indices_[k]).orbit;
        for (size_t j = 0; j < orbit.size(); ++j) {
            if (j) os << ",";
            os << orbit[j];
        }
        os << "}";
    }
    if (indices_.empty()) os << "{}";
    return os.str();
}

bool is_type(const TypeTable& table, const CycleSelection& sel,
             std::uint64_t i) {
    std::int32_t fl = table.flag(i);
    return fl >= 0 && sel.contains(static_cast<size_t>(fl));
}

} // namespace happy
