#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "groupinv/dataset.hpp"
#include "groupinv/errors.hpp"
#include "groupinv/generator.hpp"
#include "groupinv/rng.hpp"
#include "util.hpp"

using namespace groupinv;

namespace {

GenerativeSpec spec_with_depth(int depth, uint64_t seed = 7) {
    GenerativeSpec spec = GenerativeSpec::defaults(2, 2, 2, seed);
    spec.mixing_depth = depth;
    return spec;
}

}  // namespace

TEST_CASE("default spec layout: symmetric means, tight scales, valid rule") {
    const GenerativeSpec spec = GenerativeSpec::defaults(2, 2, 2, 7);
    REQUIRE(spec.group_style_means.size() == 2);
    CHECK(spec.group_style_means[0] == std::vector<double>{-1.0, -1.0});
    CHECK(spec.group_style_means[1] == std::vector<double>{1.0, 1.0});
    for (const auto& scales : spec.group_style_scales) {
        for (double s : scales) CHECK(s == 0.1);
    }
    CHECK(spec.mixing_depth == 1);
    CHECK(spec.obs_dim() == 4);
    CHECK_NOTHROW(spec.validate());

    // One group degenerates to a single centered style distribution.
    const GenerativeSpec single = GenerativeSpec::defaults(2, 2, 1, 7);
    CHECK(single.group_style_means[0] == std::vector<double>{0.0, 0.0});

    double norm = 0.0;
    for (double w : spec.label_rule.w) norm += w * w;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(spec.label_rule.b) <= 0.5);
}

TEST_CASE("spec validation rejects malformed fields") {
    GenerativeSpec spec = GenerativeSpec::defaults(2, 2, 2, 7);
    spec.group_style_means.pop_back();
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = GenerativeSpec::defaults(2, 2, 2, 7);
    spec.group_style_scales[0][1] = 0.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = GenerativeSpec::defaults(2, 2, 2, 7);
    spec.group_label_correlation = 1.5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = GenerativeSpec::defaults(2, 2, 2, 7);
    spec.label_rule.w.push_back(0.3);
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("label rules are unit-norm and keep both classes likely") {
    Rng rng(100);
    for (int trial = 0; trial < 5; ++trial) {
        const LabelRule rule = draw_label_rule(3, rng);
        double norm = 0.0;
        for (double w : rule.w) norm += w * w;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));

        Rng content_rng(trial + 1);
        int positives = 0;
        const int probes = 5000;
        for (int i = 0; i < probes; ++i) {
            double score = rule.b;
            for (double w : rule.w) score += w * content_rng.normal();
            positives += score > 0.0 ? 1 : 0;
        }
        const double rate = static_cast<double>(positives) / probes;
        CHECK(rate > 0.15);
        CHECK(rate < 0.85);
    }
}

TEST_CASE("generation is deterministic in (spec, seed)") {
    const GenerativeSpec spec = spec_with_depth(2);
    Rng a(33), b(33), c(34);
    const GroupedDataset da = generate(spec, 400, a);
    const GroupedDataset db = generate(spec, 400, b);
    const GroupedDataset dc = generate(spec, 400, c);
    REQUIRE(da.size() == db.size());
    CHECK(da.samples == db.samples);
    CHECK(da.samples != dc.samples);
}

TEST_CASE("generated data satisfies its structural contract") {
    const GenerativeSpec spec = spec_with_depth(1);
    Rng rng(55);
    const GroupedDataset ds = generate(spec, 3000, rng);
    REQUIRE(ds.size() == 3000);
    CHECK(ds.group_count == 2);
    CHECK(ds.dim() == 4);
    CHECK(ds.has_ground_truth());
    CHECK_NOTHROW(ds.validate());

    int n0 = 0, positives = 0;
    for (const Sample& s : ds.samples) {
        REQUIRE(s.group >= 0);
        REQUIRE(s.group < 2);
        REQUIRE((s.y == 0 || s.y == 1));
        REQUIRE(s.gt_content.size() == 2);
        REQUIRE(s.gt_style.size() == 2);
        n0 += s.group == 0 ? 1 : 0;
        positives += s.y;
    }
    // Uncorrelated groups are drawn uniformly; classes obey the rule's balance bound.
    CHECK(n0 > 1300);
    CHECK(n0 < 1700);
    CHECK(positives > 3000 / 5);
    CHECK(positives < 3000 * 4 / 5);
}

TEST_CASE("depth-0 mixing exposes the factors and the label rule exactly") {
    const GenerativeSpec spec = spec_with_depth(0);
    Rng rng(56);
    const GroupedDataset ds = generate(spec, 500, rng);
    for (const Sample& s : ds.samples) {
        REQUIRE(s.x.size() == 4);
        CHECK(s.x[0] == s.gt_content[0]);
        CHECK(s.x[1] == s.gt_content[1]);
        CHECK(s.x[2] == s.gt_style[0]);
        CHECK(s.x[3] == s.gt_style[1]);
        const double score = spec.label_rule.w[0] * s.gt_content[0] +
                             spec.label_rule.w[1] * s.gt_content[1] + spec.label_rule.b;
        CHECK(s.y == (score > 0.0 ? 1 : 0));
    }
}

TEST_CASE("per-group style statistics match the spec") {
    const GenerativeSpec spec = spec_with_depth(1);
    Rng rng(57);
    const GroupedDataset ds = generate(spec, 4000, rng);
    for (int g = 0; g < 2; ++g) {
        for (int j = 0; j < 2; ++j) {
            double mean = 0.0;
            int n = 0;
            for (const Sample& s : ds.samples) {
                if (s.group != g) continue;
                mean += s.gt_style[static_cast<size_t>(j)];
                ++n;
            }
            mean /= n;
            // scale 0.1 over ~2000 samples: 0.02 is roughly nine standard errors.
            CHECK(std::abs(mean - spec.group_style_means[static_cast<size_t>(g)]
                                                        [static_cast<size_t>(j)]) < 0.02);
        }
    }
}

TEST_CASE("group_label_correlation ties groups to labels") {
    GenerativeSpec spec = spec_with_depth(1);
    spec.group_label_correlation = 1.0;
    Rng rng(58);
    const GroupedDataset forced = generate(spec, 1000, rng);
    for (const Sample& s : forced.samples) CHECK(s.group == s.y % 2);

    spec.group_label_correlation = 0.8;
    Rng rng2(59);
    const GroupedDataset mixed = generate(spec, 4000, rng2);
    int matches = 0;
    for (const Sample& s : mixed.samples) matches += s.group == s.y % 2 ? 1 : 0;
    // Expected match rate is 0.8 + 0.2/K = 0.9.
    const double rate = static_cast<double>(matches) / 4000.0;
    CHECK(rate > 0.85);
    CHECK(rate < 0.95);
}

TEST_CASE("content coordinates are standard normal marginals") {
    const GenerativeSpec spec = spec_with_depth(1);
    Rng rng(60);
    const GroupedDataset ds = generate(spec, 6000, rng);
    for (int j = 0; j < 2; ++j) {
        double mean = 0.0, sq = 0.0;
        for (const Sample& s : ds.samples) {
            mean += s.gt_content[static_cast<size_t>(j)];
            sq += s.gt_content[static_cast<size_t>(j)] * s.gt_content[static_cast<size_t>(j)];
        }
        mean /= 6000.0;
        const double var = sq / 6000.0 - mean * mean;
        CHECK(std::abs(mean) < 0.06);
        CHECK(std::abs(var - 1.0) < 0.08);
    }
}

TEST_CASE("mixing stack is deterministic, seed-sensitive and injective in practice") {
    const MixingStack stack(4, 3, 12345);
    const MixingStack same(4, 3, 12345);
    const MixingStack other(4, 3, 54321);
    CHECK(stack.depth() == 3);

    Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(4), w(4);
        for (int j = 0; j < 4; ++j) {
            v[static_cast<size_t>(j)] = rng.normal();
            w[static_cast<size_t>(j)] = rng.normal();
        }
        const std::vector<double> fv = stack.apply(v);
        CHECK(fv == same.apply(v));
        CHECK(fv != other.apply(v));
        CHECK(fv != stack.apply(w));
        CHECK(fv.size() == 4);
        for (double x : fv) CHECK(std::isfinite(x));
    }
}

TEST_CASE("shifted spec extrapolates the last group's style mean") {
    GenerativeSpec spec = spec_with_depth(1);
    spec.group_label_correlation = 0.8;
    const GenerativeSpec shifted = shifted_group_spec(spec, 2.0);
    CHECK(shifted.groups == 1);
    REQUIRE(shifted.group_style_means.size() == 1);
    // last + 2 * (last - prev) with means -1 and +1 per dim: 1 + 2*2 = 5.
    CHECK(shifted.group_style_means[0] == std::vector<double>{5.0, 5.0});
    CHECK(shifted.group_style_scales[0] == spec.group_style_scales[1]);
    CHECK(shifted.group_label_correlation == 0.0);
    CHECK(shifted.mixing_seed == spec.mixing_seed);
    CHECK(shifted.label_rule.w == spec.label_rule.w);

    const GenerativeSpec one_group = GenerativeSpec::defaults(2, 2, 1, 7);
    CHECK_THROWS_AS(shifted_group_spec(one_group, 1.0), ConfigError);
}

TEST_CASE("stratified split partitions the dataset and hits every cell") {
    const GenerativeSpec spec = spec_with_depth(1);
    Rng rng(62);
    const GroupedDataset ds = generate(spec, 2000, rng);
    Rng split_rng(63);
    const DatasetSplits s = split(ds, SplitFractions{0.6, 0.2, 0.2}, split_rng);

    CHECK(s.train.size() + s.val.size() + s.test.size() == ds.size());
    CHECK(static_cast<double>(s.train.size()) > 0.55 * 2000);
    CHECK(static_cast<double>(s.train.size()) < 0.65 * 2000);
    CHECK(s.train.split_tag == "train");
    CHECK(s.val.split_tag == "val");
    CHECK(s.test.split_tag == "test");

    // Partition check: every sample lands in exactly one split.
    auto key = [](const Sample& smp) { return smp.x; };
    std::vector<std::vector<double>> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) {
        for (const Sample& smp : part->samples) all.push_back(key(smp));
    }
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    std::vector<std::vector<double>> source;
    for (const Sample& smp : ds.samples) source.push_back(key(smp));
    std::sort(source.begin(), source.end());
    CHECK(all == source);

    // Stratification: each split carries every (group, class) cell.
    for (const auto* part : {&s.train, &s.val, &s.test}) {
        for (int g = 0; g < 2; ++g) {
            for (int y = 0; y < 2; ++y) {
                const bool found = std::any_of(part->samples.begin(), part->samples.end(),
                                               [&](const Sample& smp) {
                                                   return smp.group == g && smp.y == y;
                                               });
                CHECK(found);
            }
        }
    }
}

TEST_CASE("split rejects bad fractions and starved cells") {
    const GenerativeSpec spec = spec_with_depth(1);
    Rng rng(64);
    const GroupedDataset ds = generate(spec, 400, rng);
    Rng split_rng(65);
    CHECK_THROWS_AS(split(ds, SplitFractions{0.5, 0.2, 0.2}, split_rng), ContractError);
    CHECK_THROWS_AS(split(ds, SplitFractions{-0.2, 0.6, 0.6}, split_rng), ContractError);

    GroupedDataset tiny;
    tiny.group_count = 2;
    Rng tiny_rng(66);
    // Group 1 / class 1 gets only two members: too few for three splits.
    for (int i = 0; i < 40; ++i) {
        Sample s;
        s.x = {tiny_rng.normal(), tiny_rng.normal()};
        s.y = i % 2;
        s.group = i < 38 ? 0 : 1;
        tiny.samples.push_back(s);
    }
    try {
        split(tiny, SplitFractions{0.6, 0.2, 0.2}, split_rng);
        FAIL("expected a starved-cell error");
    } catch (const ContractError& e) {
        CHECK(std::string(e.what()).find("group=1") != std::string::npos);
    }
}

TEST_CASE("csv round-trip preserves every bit, with and without ground truth") {
    const GenerativeSpec spec = spec_with_depth(2);
    Rng rng(67);
    GroupedDataset ds = generate(spec, 120, rng);
    ds.split_tag = "train";
    const testutil::TempDir tmp("groupinv-data");

    const std::string path = tmp.sub("roundtrip.csv");
    save_csv(ds, path);
    const GroupedDataset back = load_csv(path);
    CHECK(back.samples == ds.samples);
    CHECK(back.group_count == ds.group_count);
    CHECK(back.has_ground_truth());

    GroupedDataset bare = ds;
    for (Sample& s : bare.samples) {
        s.gt_content.clear();
        s.gt_style.clear();
    }
    const std::string bare_path = tmp.sub("bare.csv");
    save_csv(bare, bare_path);
    const GroupedDataset bare_back = load_csv(bare_path);
    CHECK(bare_back.samples == bare.samples);
    CHECK_FALSE(bare_back.has_ground_truth());
}

TEST_CASE("csv loader rejects malformed files with precise errors") {
    const testutil::TempDir tmp("groupinv-badcsv");

    CHECK_THROWS_AS(load_csv(tmp.sub("nope.csv")), MissingArtifactError);

    const std::string empty = tmp.sub("empty.csv");
    testutil::write_file(empty, "");
    CHECK_THROWS_AS(load_csv(empty), ParseError);

    const std::string bad_header = tmp.sub("bad_header.csv");
    testutil::write_file(bad_header, "a0,a1,y,group\n0,0,0,0\n");
    CHECK_THROWS_AS(load_csv(bad_header), ParseError);

    const std::string unknown_col = tmp.sub("unknown.csv");
    testutil::write_file(unknown_col, "x0,x1,y,group,zz\n0,0,0,0,0\n");
    CHECK_THROWS_AS(load_csv(unknown_col), ParseError);

    const std::string short_row = tmp.sub("short.csv");
    testutil::write_file(short_row, "x0,x1,y,group\n0.5,0.25,1\n");
    CHECK_THROWS_AS(load_csv(short_row), ParseError);

    const std::string bad_value = tmp.sub("value.csv");
    testutil::write_file(bad_value, "x0,x1,y,group\n0.5,abc,1,0\n");
    CHECK_THROWS_AS(load_csv(bad_value), ParseError);

    const std::string bad_label = tmp.sub("label.csv");
    testutil::write_file(bad_label, "x0,x1,y,group\n0.5,0.25,2,0\n");
    CHECK_THROWS_AS(load_csv(bad_label), ParseError);
}

TEST_CASE("gather helpers stack the requested rows in order") {
    GroupedDataset ds;
    ds.group_count = 2;
    for (int i = 0; i < 4; ++i) {
        Sample s;
        s.x = {static_cast<double>(i), static_cast<double>(10 * i)};
        s.y = i % 2;
        s.group = i / 2;
        s.gt_content = {static_cast<double>(i) + 0.5};
        s.gt_style = {static_cast<double>(i) - 0.5};
        ds.samples.push_back(s);
    }
    const std::vector<int> idx = {2, 0, 3};
    const Matrix x = ds.gather_x(idx);
    REQUIRE(x.rows == 3);
    REQUIRE(x.cols == 2);
    CHECK(x.at(0, 0) == 2.0);
    CHECK(x.at(1, 1) == 0.0);
    CHECK(x.at(2, 1) == 30.0);
    CHECK(ds.gather_y(idx) == std::vector<int>{0, 0, 1});
    CHECK(ds.gather_group(idx) == std::vector<int>{1, 0, 1});
    CHECK(ds.gather_content(idx).at(0, 0) == 2.5);
    CHECK(ds.gather_style(idx).at(2, 0) == 2.5);
}

TEST_CASE("dataset validation catches structural violations") {
    GroupedDataset ds;
    ds.group_count = 2;
    CHECK_THROWS_AS(ds.validate(), ContractError);  // empty

    Sample a;
    a.x = {0.0, 1.0};
    a.y = 0;
    a.group = 0;
    Sample b = a;
    b.group = 5;  // out of range
    b.y = 1;
    ds.samples = {a, b};
    CHECK_THROWS_AS(ds.validate(), ContractError);

    b.group = 1;
    b.x = {0.0};  // inconsistent dim
    ds.samples = {a, b};
    CHECK_THROWS_AS(ds.validate(), ContractError);

    b.x = {0.0, 2.0};
    ds.samples = {a, b};
    CHECK_NOTHROW(ds.validate());

    ds.group_count = 3;  // group 2 has no samples
    CHECK_THROWS_AS(ds.validate(), ContractError);
}
