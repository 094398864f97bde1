#ifndef THERMOFUSE_DATA_SPLIT_HPP
#define THERMOFUSE_DATA_SPLIT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermofuse/core/rng.hpp"
#include "thermofuse/data/manifest.hpp"

namespace thermofuse::data {

inline constexpr int kNumFolds = 5;
inline constexpr double kTestFraction = 0.15;

struct TooFewSamples : std::runtime_error {
    explicit TooFewSamples(int grade, std::int64_t n)
        : std::runtime_error("TooFewSamples: class " + std::to_string(grade) + " has " +
                             std::to_string(n) + " samples, need at least 7") {}
};

struct EmptyManifest : std::runtime_error {
    EmptyManifest() : std::runtime_error("EmptyManifest: cannot split an empty manifest") {}
};

struct SplitPlan {
    std::uint64_t seed = 0;
    std::set<std::string> test_ids;
    std::map<std::string, int> fold_of;  // 1..5, non-test ids only

    bool is_test(const std::string& id) const { return test_ids.count(id) != 0; }

    std::vector<std::string> ids_in_fold(int fold) const {
        std::vector<std::string> out;
        for (const auto& [id, f] : fold_of)
            if (f == fold) out.push_back(id);
        return out;
    }

    // training pool for one cross-validation round: every fold but `fold`
    std::vector<std::string> train_ids(int fold) const {
        std::vector<std::string> out;
        for (const auto& [id, f] : fold_of)
            if (f != fold) out.push_back(id);
        return out;
    }

    std::vector<std::string> test_id_list() const {
        return {test_ids.begin(), test_ids.end()};
    }
};

namespace detail {

// Largest-remainder apportionment of `total` across quotas (D7: the global
// total wins; per-class counts stay within +-1 of the real quota).
inline std::vector<std::int64_t> apportion(const std::vector<double>& quota, std::int64_t total) {
    const std::size_t k = quota.size();
    std::vector<std::int64_t> base(k);
    std::vector<std::pair<double, std::size_t>> rem(k);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        base[i] = std::int64_t(std::floor(quota[i]));
        rem[i] = {quota[i] - double(base[i]), i};
        assigned += base[i];
    }
    // ties resolve toward the lower class index
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::int64_t leftover = total - assigned;
    std::size_t at = 0;
    while (leftover > 0) {
        ++base[rem[at].second];
        --leftover;
        at = (at + 1) % k;
    }
    while (leftover < 0) {  // unreachable for 0<fraction<1 quotas, kept for safety
        for (std::size_t i = k; i-- > 0 && leftover < 0;) {
            if (base[rem[i].second] > 0) {
                --base[rem[i].second];
                ++leftover;
            }
        }
    }
    return base;
}

}  // namespace detail

// Test set is carved once (frozen across folds, D6), then the remainder is
// dealt into 5 folds per class with a rotating start offset so the global
// fold sizes also balance to +-1.
inline SplitPlan make_split(const DatasetManifest& mf, Modality modality, std::uint64_t seed) {
    auto idx = mf.eligible_indices(modality);
    if (idx.empty()) throw EmptyManifest();

    std::vector<std::vector<std::string>> by_class(kNumGrades);
    for (std::size_t i : idx) by_class[std::size_t(mf.records[i].grade)].push_back(mf.records[i].id);
    for (int c = 0; c < kNumGrades; ++c)
        if (std::int64_t(by_class[std::size_t(c)].size()) < 7)
            throw TooFewSamples(c, std::int64_t(by_class[std::size_t(c)].size()));

    const std::int64_t n_total = std::int64_t(idx.size());
    const auto test_total = std::int64_t(std::llround(kTestFraction * double(n_total)));
    std::vector<double> quota(kNumGrades);
    for (int c = 0; c < kNumGrades; ++c)
        quota[std::size_t(c)] = kTestFraction * double(by_class[std::size_t(c)].size());
    const auto test_per_class = detail::apportion(quota, test_total);

    SplitPlan plan;
    plan.seed = seed;
    Rng rng(seed);
    int offset = 0;  // rotates so the per-class fold extras spread over folds
    for (int c = 0; c < kNumGrades; ++c) {
        auto& ids = by_class[std::size_t(c)];
        std::sort(ids.begin(), ids.end());  // independence from manifest row order
        rng.shuffle(ids);
        const auto t = std::size_t(test_per_class[std::size_t(c)]);
        for (std::size_t i = 0; i < t; ++i) plan.test_ids.insert(ids[i]);
        const std::size_t rest = ids.size() - t;
        for (std::size_t i = 0; i < rest; ++i)
            plan.fold_of[ids[t + i]] = 1 + (offset + int(i)) % kNumFolds;
        offset = (offset + int(rest % kNumFolds)) % kNumFolds;
    }
    return plan;
}

inline nlohmann::json split_to_json(const SplitPlan& plan) {
    nlohmann::json j;
    j["seed"] = plan.seed;
    j["test_ids"] = plan.test_id_list();
    nlohmann::json folds = nlohmann::json::object();
    for (int f = 1; f <= kNumFolds; ++f) folds[std::to_string(f)] = plan.ids_in_fold(f);
    j["folds"] = std::move(folds);
    return j;
}

inline SplitPlan split_from_json(const nlohmann::json& j) {
    SplitPlan plan;
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& id : j.at("test_ids")) plan.test_ids.insert(id.get<std::string>());
    for (const auto& [key, ids] : j.at("folds").items()) {
        const int f = std::stoi(key);
        if (f < 1 || f > kNumFolds) throw std::runtime_error("bad fold index in split JSON: " + key);
        for (const auto& id : ids) plan.fold_of[id.get<std::string>()] = f;
    }
    return plan;
}

inline void save_split(const SplitPlan& plan, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << split_to_json(plan).dump(2) << '\n';
}

inline SplitPlan load_split(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    nlohmann::json j;
    in >> j;
    return split_from_json(j);
}

}  // namespace thermofuse::data

#endif
