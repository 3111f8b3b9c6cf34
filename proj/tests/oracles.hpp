#pragma once
// Slow reference implementations the tests compare the library against.
// Everything here favors obviousness over speed and shares no code with the
// library beyond the DigitFunction accessors.

#include "happy/cycles.hpp"
#include "happy/digit_function.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

namespace oracle {

inline std::uint64_t apply(const happy::DigitFunction& f, std::uint64_t n) {
    const auto& h = f.digit_image();
    const auto b = static_cast<std::uint64_t>(f.base());
    std::uint64_t s = 0;
    do {
        s += static_cast<std::uint64_t>(h[n % b]);
        n /= b;
    } while (n > 0);
    return s;
}

// Cycle sets found by walking every start value to its eventual loop.
inline std::set<std::vector<std::uint64_t>>
find_cycles_brute(const happy::DigitFunction& f, std::uint64_t limit) {
    std::set<std::vector<std::uint64_t>> out;
    for (std::uint64_t start = 1; start <= limit; ++start) {
        std::set<std::uint64_t> seen;
        std::uint64_t v = start;
        while (!seen.count(v)) {
            seen.insert(v);
            v = apply(f, v);
        }
        std::vector<std::uint64_t> cyc{v};
        for (std::uint64_t w = apply(f, v); w != v; w = apply(f, w))
            cyc.push_back(w);
        std::sort(cyc.begin(), cyc.end());
        out.insert(cyc);
    }
    return out;
}

// Cycle index of n, walking the trajectory with a memo for repeat visitors.
class Classifier {
  public:
    Classifier(const happy::DigitFunction& f, const happy::CycleSet& cycles)
        : f_(f), cycles_(cycles) {}

    size_t classify(std::uint64_t n) {
        if (n == 0) throw std::logic_error("0 has no type");
        std::vector<std::uint64_t> path;
        std::uint64_t v = n;
        for (int guard = 0; guard < 100000; ++guard) {
            auto hit = memo_.find(v);
            if (hit != memo_.end()) return settle(path, hit->second);
            if (auto idx = cycles_.index_of_member(v))
                return settle(path, *idx);
            path.push_back(v);
            v = apply(f_, v);
        }
        throw std::logic_error("trajectory failed to reach a cycle");
    }

  private:
    size_t settle(const std::vector<std::uint64_t>& path, size_t idx) {
        for (std::uint64_t v : path) memo_.emplace(v, idx);
        return idx;
    }

    const happy::DigitFunction& f_;
    const happy::CycleSet& cycles_;
    std::map<std::uint64_t, size_t> memo_;
};

// Per-cycle counts over [1, b^m - 1] by direct enumeration.
inline std::vector<std::uint64_t>
prefix_counts_brute(const happy::DigitFunction& f,
                    const happy::CycleSet& cycles, long m) {
    std::uint64_t total = 1;
    for (long i = 0; i < m; ++i) total *= static_cast<std::uint64_t>(f.base());
    Classifier cls(f, cycles);
    std::vector<std::uint64_t> counts(cycles.size(), 0);
    for (std::uint64_t v = 1; v < total; ++v) ++counts[cls.classify(v)];
    return counts;
}

// Image-sum counts over all base^m digit strings, as plain convolution of
// the single-digit histogram, iterated m times. Index i holds the number of
// strings with sum i.
inline std::vector<mpz_class> row_brute(const happy::DigitFunction& f,
                                        long m) {
    std::vector<mpz_class> row{mpz_class(1)};
    std::vector<mpz_class> next;
    for (long step = 0; step < m; ++step) {
        next.assign(row.size() + static_cast<size_t>(f.alpha()), mpz_class(0));
        for (size_t i = 0; i < row.size(); ++i) {
            if (row[i] == 0) continue;
            for (long long h : f.digit_image())
                next[i + static_cast<size_t>(h)] += row[i];
        }
        row.swap(next);
    }
    return row;
}

// Full convolution of two rows; row_a ** row_b as polynomial coefficients.
inline std::vector<mpz_class> convolve(const std::vector<mpz_class>& a,
                                       const std::vector<mpz_class>& b) {
    std::vector<mpz_class> out(a.size() + b.size() - 1, mpz_class(0));
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) {
            if (b[j] == 0) continue;
            mpz_addmul(out[i + j].get_mpz_t(), a[i].get_mpz_t(),
                       b[j].get_mpz_t());
        }
    }
    return out;
}

} // namespace oracle
