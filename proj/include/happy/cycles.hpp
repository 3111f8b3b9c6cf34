#pragma once
// Cycle structure of a digit-sum map and type classification.
//
// Every trajectory eventually enters [0, base^(d_star-1) - 1] and that range
// is closed under the map, so all cycles live there and can be enumerated by
// finite search. An integer is "type C" for a set of cycles C when its
// trajectory lands in one of them.

#include "happy/digit_function.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <vector>

namespace happy {

struct Cycle {
    // Members sorted ascending; the canonical identity of the cycle.
    std::vector<std::uint64_t> members;
    // Same members in orbit order, starting from the smallest.
    std::vector<std::uint64_t> orbit;
};

// All cycles, sorted by smallest member. Index into this order is the cycle
// index used everywhere else (type tables, selections, tables, CLI).
class CycleSet {
  public:
    explicit CycleSet(std::vector<Cycle> cycles);

    size_t size() const { return cycles_.size(); }
    const Cycle& at(size_t i) const;
    const std::vector<Cycle>& all() const { return cycles_; }

    // Index of the cycle containing value v as a member, or nullopt.
    std::optional<size_t> index_of_member(std::uint64_t v) const;

  private:
    std::vector<Cycle> cycles_;
};

// Trajectory of n under repeated application, up to and including the first
// repeated value (so the last element closes the loop into the cycle).
std::vector<mpz_class> trajectory(const DigitFunction& f, const mpz_class& n);

// Enumerate every cycle by walking trajectories of 1 .. base^(d_star-1) - 1.
// The fixed point 0 is recorded only if some positive integer reaches it,
// which requires a digit image with h(i) = 0 for some i >= 2.
CycleSet find_cycles(const DigitFunction& f);

// Memoized classification of [0, bound]: flag(i) is the index of the cycle
// reached from i. flag(0) is the {0} cycle's index when the set records one
// (digit images with h(i) = 0 for some i >= 2) and -1 otherwise. Density
// code that consumes the table must still exclude the integer 0 itself.
class TypeTable {
  public:
    TypeTable(std::uint64_t bound, std::vector<std::int32_t> flags);

    std::uint64_t bound() const { return bound_; }

    std::int32_t flag(std::uint64_t i) const;

    // Unchecked access for hot loops; caller guarantees i <= bound().
    std::int32_t flag_unchecked(std::uint64_t i) const {
        return flags_[i];
    }

  private:
    std::uint64_t bound_;
    std::vector<std::int32_t> flags_;
};

TypeTable build_type_table(const DigitFunction& f, const CycleSet& cycles,
                           std::uint64_t bound);

// Subset of a CycleSet's cycles, by index.
class CycleSelection {
  public:
    CycleSelection(const CycleSet& cycles, std::vector<size_t> indices);
    static CycleSelection complement(const CycleSet& cycles,
                                     const CycleSelection& sel);

    bool contains(size_t cycle_index) const;
    const std::vector<size_t>& indices() const { return indices_; }
    size_t universe_size() const { return mask_.size(); }

    std::string describe(const CycleSet& cycles) const;

  private:
    std::vector<size_t> indices_; // sorted
    std::vector<char> mask_;      // size = number of cycles in the set
};

// True when the trajectory of i lands in one of the selected cycles.
// Throws out_of_range_error past the table bound.
bool is_type(const TypeTable& table, const CycleSelection& sel,
             std::uint64_t i);

} // namespace happy
