#ifndef HNRAD_FOLDS_HPP
#define HNRAD_FOLDS_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hnrad/errors.hpp"

namespace hnrad {

/// Cross-validation fold assignment. Fold 5 is a fixed-size random draw from
/// the held center (the one also present in the test cohort); the remaining
/// patients split into folds 1-4 with sizes differing by at most one.
struct FoldAssignment {
    std::map<std::string, int> fold_of; // patient_id -> 1..5
    uint64_t seed = 0;
    std::string held_center;
    std::vector<std::string> warnings;

    std::vector<int> sizes() const {
        std::vector<int> s(5, 0);
        for (const auto& [id, f] : fold_of) ++s[size_t(f - 1)];
        return s;
    }
};

inline FoldAssignment assign_folds(const std::vector<std::pair<std::string, std::string>>& patients,
                                   uint64_t seed, const std::string& held_center = "MDA",
                                   int fold5_size = 97) {
    if (patients.empty()) throw pipeline_error("assign_folds: empty manifest");
    FoldAssignment fa;
    fa.seed = seed;
    fa.held_center = held_center;

    std::vector<std::string> held, rest;
    for (const auto& [id, center] : patients) (center == held_center ? held : rest).push_back(id);

    std::mt19937_64 rng(seed);
    std::shuffle(held.begin(), held.end(), rng);
    const int take = std::min<int>(fold5_size, int(held.size()));
    if (take < fold5_size)
        fa.warnings.push_back("only " + std::to_string(held.size()) + " patients from center '" +
                              held_center + "'; fold 5 takes all of them");
    for (int i = 0; i < take; ++i) fa.fold_of[held[size_t(i)]] = 5;
    for (size_t i = size_t(take); i < held.size(); ++i) rest.push_back(held[i]);

    std::shuffle(rest.begin(), rest.end(), rng);
    const int64_t n = int64_t(rest.size());
    const int64_t base = n / 4, extra = n % 4;
    int64_t cursor = 0;
    for (int f = 0; f < 4; ++f) {
        const int64_t size = base + (f < extra ? 1 : 0);
        for (int64_t i = 0; i < size; ++i) fa.fold_of[rest[size_t(cursor++)]] = f + 1;
    }
    return fa;
}

} // namespace hnrad

#endif
