// Copyright 2026 The qtlbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qtl/datasets.hpp"

#include <gtest/gtest.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <random>
#include <set>

#include "qtl/errors.hpp"

using namespace qtl;

namespace {

std::string sha256(const std::string &bytes) {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), out, &len, EVP_sha256(), nullptr);
    return std::string(reinterpret_cast<char *>(out), len);
}

FeatureBundle random_bundle(int n, int d, int c, bool logits, std::mt19937_64 &rng) {
    std::normal_distribution<float> g;
    FeatureBundle b{d, c, {}, ""};
    for (int i = 0; i < n; ++i) {
        FeatureRecord r;
        r.features.resize(d);
        for (auto &x : r.features) x = g(rng);
        r.label = i % c;
        if (logits) {
            r.teacher_logits = Eigen::VectorXf(c);
            for (auto &x : *r.teacher_logits) x = g(rng);
        }
        b.records.push_back(std::move(r));
    }
    return b;
}

std::uint32_t read_u32(const std::string &s, std::size_t at) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(s[at])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 3])) << 24;
}

}  // namespace

TEST(Bundle, HeaderOnlyLength) {
    FeatureBundle b{512, 2, {}, ""};
    const auto bytes = encode_bundle(b);
    EXPECT_EQ(bytes.size(), 4u + 2 + 2 + 4 + 4 + 8);
    EXPECT_EQ(bytes.size(), kBundleHeaderBytes);
    EXPECT_EQ(bytes.substr(0, 4), "QTLB");
    EXPECT_EQ(read_u32(bytes, 8), 512u);
    EXPECT_EQ(read_u32(bytes, 12), 2u);
    EXPECT_EQ(decode_bundle(bytes), b);
}

TEST(Bundle, OneRecordPayload) {
    FeatureBundle b{2, 2, {{Eigen::Vector2f(1.5f, -2.0f), 1, std::nullopt}}, ""};
    const auto bytes = encode_bundle(b);
    EXPECT_EQ(bytes.size() - kBundleHeaderBytes, 2u * 4 + 2);
    float first;
    std::memcpy(&first, bytes.data() + kBundleHeaderBytes, 4);
    EXPECT_EQ(first, 1.5f);
    EXPECT_EQ(bytes[kBundleHeaderBytes + 8], 1);
    EXPECT_EQ(bytes[kBundleHeaderBytes + 9], 0);
}

TEST(Bundle, RoundTripHashOracle) {
    std::mt19937_64 rng(100);
    const auto b = random_bundle(100, 32, 3, true, rng);
    const auto once = encode_bundle(b);
    const auto twice = encode_bundle(decode_bundle(once));
    EXPECT_EQ(sha256(once), sha256(twice));
    EXPECT_EQ(decode_bundle(once), b);
}

TEST(Bundle, RoundTripProperty) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 25; ++trial) {
        auto b = random_bundle(static_cast<int>(rng() % 20), 1 + static_cast<int>(rng() % 16),
                               2 + static_cast<int>(rng() % 4), trial % 2 == 0, rng);
        if (trial % 3 == 0) b.provenance = "synthetic trial " + std::to_string(trial);
        EXPECT_EQ(decode_bundle(encode_bundle(b)), b);
    }
}

TEST(Bundle, SpecialFloatsSurviveBitExactly) {
    FeatureBundle b{3, 2, {{Eigen::Vector3f(-0.0f, 1e-40f, 3.4e38f), 0, std::nullopt}}, ""};
    const auto back = decode_bundle(encode_bundle(b));
    for (int i = 0; i < 3; ++i) {
        std::uint32_t x, y;
        std::memcpy(&x, &b.records[0].features(i), 4);
        std::memcpy(&y, &back.records[0].features(i), 4);
        EXPECT_EQ(x, y);
    }
}

TEST(Bundle, DecodeErrors) {
    std::mt19937_64 rng(102);
    const auto bytes = encode_bundle(random_bundle(3, 4, 2, false, rng));
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_bundle(bad), FormatError);
    bad = bytes;
    bad[4] = 7;
    EXPECT_THROW(decode_bundle(bad), FormatError);
    bad = bytes;
    bad[6] = 0x40;
    EXPECT_THROW(decode_bundle(bad), FormatError);
    EXPECT_THROW(decode_bundle(bytes.substr(0, bytes.size() - 1)), CorruptionError);
    EXPECT_THROW(decode_bundle(bytes.substr(0, 10)), CorruptionError);
    EXPECT_THROW(decode_bundle(bytes + "zz"), CorruptionError);
    bad = bytes;
    bad[kBundleHeaderBytes + 16] = 9;  // label of record 0 >= C
    EXPECT_THROW(decode_bundle(bad), CorruptionError);
}

TEST(Bundle, ValidateRejectsMixedShapes) {
    std::mt19937_64 rng(103);
    auto b = random_bundle(4, 3, 2, true, rng);
    b.records[2].teacher_logits.reset();
    EXPECT_THROW(b.validate(), DataError);
    EXPECT_THROW(encode_bundle(b), DataError);
    b = random_bundle(4, 3, 2, false, rng);
    b.records[1].features.resize(2);
    EXPECT_THROW(b.validate(), DataError);
}

TEST(Bundle, FileRoundTrip) {
    std::mt19937_64 rng(104);
    const auto b = random_bundle(10, 8, 2, true, rng);
    const auto path = (std::filesystem::temp_directory_path() / "qtl_bundle_test.qtlb").string();
    save_bundle(b, path);
    EXPECT_EQ(load_bundle(path), b);
    std::filesystem::remove(path);
    EXPECT_THROW(load_bundle(path), DataError);
}

TEST(BalancedSubset, FullSelectionIsPermutation) {
    std::mt19937_64 rng(105);
    const auto b = random_bundle(12, 4, 3, false, rng);
    auto idx = balanced_subset_indices(b, 12, 1);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(idx[i], i);
}

TEST(BalancedSubset, TenThousandOverTenClasses) {
    FeatureBundle b{1, 10, {}, ""};
    for (int i = 0; i < 12000; ++i) b.records.push_back({Eigen::VectorXf::Zero(1), i % 10, {}});
    const auto sub = balanced_subset(b, 10000, 42);
    EXPECT_EQ(sub.size(), 10000u);
    for (auto c : sub.class_counts()) EXPECT_EQ(c, 1000u);
}

TEST(BalancedSubset, Determinism) {
    std::mt19937_64 rng(106);
    const auto b = random_bundle(200, 2, 4, false, rng);
    const auto a1 = balanced_subset_indices(b, 40, 7);
    EXPECT_EQ(a1, balanced_subset_indices(b, 40, 7));
    const auto a2 = balanced_subset_indices(b, 40, 8);
    EXPECT_NE(a1, a2);
    EXPECT_EQ(b.select(a1).class_counts(), b.select(a2).class_counts());
}

TEST(BalancedSubset, Errors) {
    std::mt19937_64 rng(107);
    auto b = random_bundle(10, 2, 2, false, rng);
    EXPECT_THROW(balanced_subset(b, 7, 1), DataError);
    try {
        balanced_subset(b, 12, 1);
        FAIL();
    } catch (const DataError &e) {
        EXPECT_NE(std::string(e.what()).find("5"), std::string::npos);
    }
}

TEST(Synthetic, ZeroSeparationMakesLabelsUninformative) {
    SynthOptions o{2, 16, 50, 0.0, 3, false};
    const auto means = synthetic_class_means(2, 16, 0.0, 3);
    EXPECT_EQ(means.cwiseAbs().maxCoeff(), 0.0);
    const auto b = synthesize_features(o);
    EXPECT_EQ(b.size(), 100u);
}

TEST(Synthetic, MeansHaveSeparationNorm) {
    const auto means = synthetic_class_means(3, 64, 10.0, 5);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(means.row(c).norm(), 10.0, 1e-12);
}

TEST(Synthetic, NearestMeanOracleOnFreshDraw) {
    SynthOptions o{2, 512, 200, 10.0, 11, false};
    const auto fresh = synthesize_features(o, 12345);
    // Estimate means from the training draw, classify the fresh draw.
    const auto train = synthesize_features(o);
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(2, 512);
    for (const auto &r : train.records) mu.row(r.label) += r.features.cast<double>().transpose();
    mu /= 200.0;
    int correct = 0;
    for (const auto &r : fresh.records) {
        const Eigen::VectorXd x = r.features.cast<double>();
        const double d0 = (x - mu.row(0).transpose()).squaredNorm();
        const double d1 = (x - mu.row(1).transpose()).squaredNorm();
        correct += (d1 < d0 ? 1 : 0) == r.label;
    }
    EXPECT_GE(correct / 400.0, 0.99);
}

TEST(Synthetic, DeterministicAndTeacherLogits) {
    SynthOptions o{3, 8, 5, 4.0, 9, true};
    const auto a = synthesize_features(o), b = synthesize_features(o);
    EXPECT_EQ(encode_bundle(a), encode_bundle(b));
    EXPECT_TRUE(a.has_teacher_logits());
    EXPECT_NE(encode_bundle(synthesize_features(o, 10)), encode_bundle(a));
    const auto mu = synthetic_class_means(3, 8, 4.0, 9);
    const auto &r = a.records[7];
    for (int c = 0; c < 3; ++c) {
        const double want = -4.0 * (r.features.cast<double>() - mu.row(c).transpose()).squaredNorm() / 8;
        EXPECT_NEAR((*r.teacher_logits)(c), want, 1e-5 * std::max(1.0, std::abs(want)));
    }
}

TEST(Split, ForcedSplit) {
    FeatureBundle b{1, 2, {}, ""};
    for (int i = 0; i < 4; ++i) b.records.push_back({Eigen::VectorXf::Zero(1), i % 2, {}});
    const auto m = split_assign(b, 0.5, 1);
    EXPECT_EQ(m.eval_indices.size(), 2u);
    EXPECT_NE(b.records[m.eval_indices[0]].label, b.records[m.eval_indices[1]].label);
}

TEST(Split, DeterministicDisjointStratified) {
    std::mt19937_64 rng(108);
    FeatureBundle b{1, 3, {}, ""};
    std::uniform_int_distribution<int> cls(0, 2);
    for (int i = 0; i < 1000; ++i) b.records.push_back({Eigen::VectorXf::Zero(1), cls(rng), {}});
    const auto m = split_assign(b, 0.2, 77);
    EXPECT_EQ(m, split_assign(b, 0.2, 77));
    std::set<std::size_t> train(m.train_indices.begin(), m.train_indices.end());
    std::set<std::size_t> eval(m.eval_indices.begin(), m.eval_indices.end());
    EXPECT_EQ(train.size(), m.train_indices.size());
    EXPECT_EQ(eval.size(), m.eval_indices.size());
    for (auto i : eval) EXPECT_EQ(train.count(i), 0u);
    EXPECT_EQ(train.size() + eval.size(), 1000u);
    EXPECT_TRUE(std::is_sorted(m.eval_indices.begin(), m.eval_indices.end()));
    const auto counts = b.class_counts();
    std::vector<int> eval_counts(3, 0);
    for (auto i : eval) eval_counts[b.records[i].label]++;
    for (int c = 0; c < 3; ++c) EXPECT_LE(std::abs(eval_counts[c] - 0.2 * counts[c]), 1.0);
}

TEST(Split, Errors) {
    FeatureBundle b{1, 2, {{Eigen::VectorXf::Zero(1), 0, {}}, {Eigen::VectorXf::Zero(1), 0, {}},
                           {Eigen::VectorXf::Zero(1), 1, {}}}, ""};
    EXPECT_THROW(split_assign(b, 0.5, 1), DataError);
    EXPECT_THROW(split_assign(b, 0.0, 1), ConfigError);
    EXPECT_THROW(split_assign(b, 1.0, 1), ConfigError);
}

TEST(Split, ManifestTextRoundTrip) {
    SplitManifest m{{0, 2, 5}, {1, 3}, 99};
    EXPECT_EQ(parse_manifest(format_manifest(m)), m);
    EXPECT_THROW(parse_manifest("garbage"), FormatError);
}
