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

/**
 * @file
 * Feature bundles: backbone feature vectors with labels and optional teacher
 * logits, stored in the QTLB binary format.
 *
 * QTLB layout (all integers and floats little-endian):
 *
 *   offset  size  field
 *   0       4     magic "QTLB"
 *   4       2     format version (1)
 *   6       2     flags: bit 0 teacher logits present, bit 1 provenance trailer
 *   8       4     feature dim D
 *   12      4     class count C
 *   16      8     record count N
 *   24            N records: D x f32 features, u16 label, [C x f32 logits]
 *                 [u32 length + UTF-8 provenance, iff flags bit 1]
 */

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qtl {

struct FeatureRecord {
    Eigen::VectorXf features;
    int label = 0;
    std::optional<Eigen::VectorXf> teacher_logits;

    friend bool operator==(const FeatureRecord &a, const FeatureRecord &b);
};

struct FeatureBundle {
    int feature_dim = 0;
    int num_classes = 0;
    std::vector<FeatureRecord> records;
    std::string provenance;

    [[nodiscard]] std::size_t size() const { return records.size(); }
    [[nodiscard]] bool has_teacher_logits() const;
    /// Record count per class.
    [[nodiscard]] std::vector<std::size_t> class_counts() const;
    /// Throws DataError when records disagree on shape or logits presence.
    void validate() const;

    /// Records at `indices`, in the given order.
    [[nodiscard]] FeatureBundle select(const std::vector<std::size_t> &indices) const;

    friend bool operator==(const FeatureBundle &a, const FeatureBundle &b);
};

inline constexpr std::uint16_t kBundleVersion = 1;
inline constexpr std::size_t kBundleHeaderBytes = 24;

std::string encode_bundle(const FeatureBundle &bundle);
FeatureBundle decode_bundle(std::string_view bytes);
void save_bundle(const FeatureBundle &bundle, const std::string &path);
FeatureBundle load_bundle(const std::string &path);

/// Exactly total / C records per class, chosen by a seeded within-class
/// shuffle. Selected records keep their original relative order.
std::vector<std::size_t> balanced_subset_indices(const FeatureBundle &bundle,
                                                 std::size_t total, std::uint64_t seed);
FeatureBundle balanced_subset(const FeatureBundle &bundle, std::size_t total,
                              std::uint64_t seed);

struct SynthOptions {
    int num_classes = 2;
    int feature_dim = 512;
    int per_class = 100;
    double class_separation = 10.0;
    std::uint64_t seed = 42;
    bool teacher_logits = false;
};

/// Class means of a synthetic draw: seeded random unit directions scaled by
/// the separation. Row c is the mean of class c.
Eigen::MatrixXd synthetic_class_means(int num_classes, int feature_dim,
                                      double class_separation, std::uint64_t seed);

/// Isotropic unit-variance Gaussian clusters around synthetic_class_means.
/// `sample_seed` drives the per-sample noise, so a fresh draw from the same
/// class means uses the same `seed` and a different `sample_seed`.
/// Teacher logits, when requested, are -separation * ||x - mu_c||^2 / D.
FeatureBundle synthesize_features(const SynthOptions &opts,
                                  std::optional<std::uint64_t> sample_seed = std::nullopt);

struct SplitManifest {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> eval_indices;
    std::uint64_t seed = 0;

    friend bool operator==(const SplitManifest &, const SplitManifest &) = default;
};

/// Stratified split; each class sends round(eval_fraction * class_size)
/// records to the eval side.
SplitManifest split_assign(const FeatureBundle &bundle, double eval_fraction,
                           std::uint64_t seed);

/// Two whitespace-separated index lines (train, eval) then the seed.
std::string format_manifest(const SplitManifest &manifest);
SplitManifest parse_manifest(std::string_view text);

}  // namespace qtl
