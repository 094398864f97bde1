#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "thermofuse/core/rng.hpp"
#include "thermofuse/data/split.hpp"

using namespace thermofuse;
namespace fs = std::filesystem;

namespace {

// In-memory manifest; make_split never touches the image paths.
data::DatasetManifest synthetic_manifest(const std::array<int, 6>& per_class) {
    data::DatasetManifest mf;
    for (int c = 0; c < 6; ++c) {
        for (int i = 0; i < per_class[std::size_t(c)]; ++i) {
            data::SampleRecord r;
            char buf[32];
            std::snprintf(buf, sizeof buf, "g%d_%05d", c, i);
            r.id = buf;
            r.rgb_path = "x.png";
            r.thermal_raw_path = "x.tif";
            r.grade = c;
            r.thermal_valid = true;
            mf.records.push_back(std::move(r));
        }
    }
    return mf;
}

constexpr std::array<int, 6> kCohort{134, 84, 456, 214, 179, 41};  // N = 1108

std::array<std::int64_t, 6> class_of_ids(const data::DatasetManifest& mf,
                                         const std::vector<std::string>& ids) {
    std::array<std::int64_t, 6> c{};
    for (const auto& id : ids) ++c[std::size_t(mf.find(id)->grade)];
    return c;
}

}  // namespace

TEST_CASE("1108-sample split: 166 test samples and near-equal folds") {
    const auto mf = synthetic_manifest(kCohort);
    const auto plan = data::make_split(mf, data::Modality::FUSED, 42);

    REQUIRE(plan.test_ids.size() == 166);

    std::vector<std::size_t> fold_sizes;
    std::size_t pooled = 0;
    for (int f = 1; f <= data::kNumFolds; ++f) fold_sizes.push_back(plan.ids_in_fold(f).size());
    for (auto s : fold_sizes) pooled += s;
    REQUIRE(pooled == 1108 - 166);
    const auto [mn, mx] = std::minmax_element(fold_sizes.begin(), fold_sizes.end());
    REQUIRE(*mx - *mn <= 1);
}

TEST_CASE("every eligible id lands in exactly one bucket") {
    const auto mf = synthetic_manifest({20, 20, 20, 20, 20, 20});
    const auto plan = data::make_split(mf, data::Modality::FUSED, 7);

    std::set<std::string> seen;
    for (const auto& id : plan.test_ids) REQUIRE(seen.insert(id).second);
    for (const auto& [id, f] : plan.fold_of) {
        REQUIRE(seen.insert(id).second);
        REQUIRE(f >= 1);
        REQUIRE(f <= 5);
        REQUIRE_FALSE(plan.is_test(id));
    }
    REQUIRE(seen.size() == mf.records.size());
    for (const auto& r : mf.records) REQUIRE(seen.count(r.id) == 1);
}

TEST_CASE("stratification holds per class within one sample") {
    const auto mf = synthetic_manifest(kCohort);
    for (std::uint64_t seed : {1ull, 9ull, 123ull, 7777ull, 50505ull}) {
        const auto plan = data::make_split(mf, data::Modality::FUSED, seed);
        const auto test_counts = class_of_ids(mf, plan.test_id_list());
        for (int c = 0; c < 6; ++c) {
            const double quota = 0.15 * kCohort[std::size_t(c)];
            REQUIRE(std::abs(double(test_counts[std::size_t(c)]) - quota) <= 1.0);
        }
        // per-class fold counts differ by at most one across the five folds
        for (int c = 0; c < 6; ++c) {
            std::array<std::int64_t, 5> per_fold{};
            for (int f = 1; f <= 5; ++f)
                per_fold[std::size_t(f - 1)] = class_of_ids(mf, plan.ids_in_fold(f))[std::size_t(c)];
            const auto [mn, mx] = std::minmax_element(per_fold.begin(), per_fold.end());
            REQUIRE(*mx - *mn <= 1);
        }
    }
}

TEST_CASE("same seed reproduces the split byte for byte") {
    const auto mf = synthetic_manifest(kCohort);
    const auto a = data::make_split(mf, data::Modality::FUSED, 99);
    const auto b = data::make_split(mf, data::Modality::FUSED, 99);
    REQUIRE(data::split_to_json(a).dump() == data::split_to_json(b).dump());

    const auto c = data::make_split(mf, data::Modality::FUSED, 100);
    REQUIRE(data::split_to_json(a).dump() != data::split_to_json(c).dump());
}

TEST_CASE("split ignores manifest row order") {
    auto mf = synthetic_manifest({15, 15, 15, 15, 15, 15});
    const auto before = data::split_to_json(data::make_split(mf, data::Modality::FUSED, 5)).dump();
    Rng rng(31);
    rng.shuffle(mf.records);
    const auto after = data::split_to_json(data::make_split(mf, data::Modality::FUSED, 5)).dump();
    REQUIRE(before == after);
}

TEST_CASE("modality filters eligibility") {
    auto mf = synthetic_manifest({10, 10, 10, 10, 10, 10});
    // knock the thermal channel out of a few records; RGB split still sees them
    for (std::size_t i = 0; i < mf.records.size(); i += 7) mf.records[i].thermal_valid = false;
    const auto rgb = data::make_split(mf, data::Modality::RGB, 3);
    std::size_t rgb_n = rgb.test_ids.size() + rgb.fold_of.size();
    REQUIRE(rgb_n == mf.records.size());

    const auto fused = data::make_split(mf, data::Modality::FUSED, 3);
    std::size_t fused_n = fused.test_ids.size() + fused.fold_of.size();
    REQUIRE(fused_n == std::size_t(mf.count(data::Modality::FUSED)));
    for (const auto& r : mf.records)
        if (!r.thermal_valid) {
            REQUIRE_FALSE(fused.is_test(r.id));
            REQUIRE(fused.fold_of.count(r.id) == 0);
        }
}

TEST_CASE("undersized classes are refused") {
    REQUIRE_THROWS_AS(data::make_split(synthetic_manifest({10, 10, 10, 10, 10, 6}),
                                       data::Modality::FUSED, 1),
                      data::TooFewSamples);
    data::DatasetManifest empty;
    REQUIRE_THROWS_AS(data::make_split(empty, data::Modality::FUSED, 1), data::EmptyManifest);
}

TEST_CASE("split file round-trips") {
    const auto mf = synthetic_manifest({12, 12, 12, 12, 12, 12});
    const auto plan = data::make_split(mf, data::Modality::FUSED, 17);
    const fs::path p = fs::temp_directory_path() / "tf_split_test.json";
    data::save_split(plan, p);
    const auto back = data::load_split(p);
    fs::remove(p);
    REQUIRE(back.seed == plan.seed);
    REQUIRE(back.test_ids == plan.test_ids);
    REQUIRE(back.fold_of == plan.fold_of);
}

TEST_CASE("train pool for fold k is everything outside fold k and the test set") {
    const auto mf = synthetic_manifest({9, 9, 9, 9, 9, 9});
    const auto plan = data::make_split(mf, data::Modality::FUSED, 2);
    for (int f = 1; f <= 5; ++f) {
        const auto val = plan.ids_in_fold(f);
        const auto train = plan.train_ids(f);
        REQUIRE(val.size() + train.size() == plan.fold_of.size());
        std::set<std::string> v(val.begin(), val.end());
        for (const auto& id : train) REQUIRE(v.count(id) == 0);
    }
}
