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

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "qtl/byteio.hpp"
#include "qtl/errors.hpp"

namespace qtl {

namespace {

constexpr std::string_view kMagic = "QTLB";
constexpr std::uint16_t kFlagTeacher = 1u << 0;
constexpr std::uint16_t kFlagProvenance = 1u << 1;

bool bit_equal(const Eigen::VectorXf &a, const Eigen::VectorXf &b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint32_t>(a(i)) != std::bit_cast<std::uint32_t>(b(i)))
            return false;
    }
    return true;
}

std::vector<std::vector<std::size_t>> indices_by_class(const FeatureBundle &b) {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(b.num_classes));
    for (std::size_t i = 0; i < b.records.size(); ++i) {
        out[static_cast<std::size_t>(b.records[i].label)].push_back(i);
    }
    return out;
}

std::string counts_string(const std::vector<std::size_t> &counts) {
    std::ostringstream ss;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        ss << (c ? ", " : "") << "class " << c << ": " << counts[c];
    }
    return ss.str();
}

}  // namespace

bool operator==(const FeatureRecord &a, const FeatureRecord &b) {
    if (a.label != b.label || !bit_equal(a.features, b.features)) return false;
    if (a.teacher_logits.has_value() != b.teacher_logits.has_value()) return false;
    return !a.teacher_logits || bit_equal(*a.teacher_logits, *b.teacher_logits);
}

bool operator==(const FeatureBundle &a, const FeatureBundle &b) {
    return a.feature_dim == b.feature_dim && a.num_classes == b.num_classes &&
           a.provenance == b.provenance && a.records == b.records;
}

bool FeatureBundle::has_teacher_logits() const {
    return !records.empty() && records.front().teacher_logits.has_value();
}

std::vector<std::size_t> FeatureBundle::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(num_classes, 0)), 0);
    for (const auto &r : records) {
        if (r.label >= 0 && r.label < num_classes) ++counts[static_cast<std::size_t>(r.label)];
    }
    return counts;
}

void FeatureBundle::validate() const {
    if (feature_dim < 1) throw DataError("bundle feature_dim must be >= 1");
    if (num_classes < 1 || num_classes > 65536) throw DataError("bundle num_classes out of range");
    const bool teacher = has_teacher_logits();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto &r = records[i];
        if (r.features.size() != feature_dim) {
            throw DataError("record " + std::to_string(i) + " has " +
                            std::to_string(r.features.size()) + " features, bundle D = " +
                            std::to_string(feature_dim));
        }
        if (r.label < 0 || r.label >= num_classes) {
            throw DataError("record " + std::to_string(i) + " label " +
                            std::to_string(r.label) + " outside [0, C)");
        }
        if (r.teacher_logits.has_value() != teacher) {
            throw DataError("teacher logits must be present on all records or none");
        }
        if (r.teacher_logits && r.teacher_logits->size() != num_classes) {
            throw DataError("record " + std::to_string(i) + " teacher logits length " +
                            std::to_string(r.teacher_logits->size()));
        }
    }
}

FeatureBundle FeatureBundle::select(const std::vector<std::size_t> &indices) const {
    FeatureBundle out;
    out.feature_dim = feature_dim;
    out.num_classes = num_classes;
    out.provenance = provenance;
    out.records.reserve(indices.size());
    for (auto i : indices) {
        if (i >= records.size()) throw DataError("select: index out of range");
        out.records.push_back(records[i]);
    }
    return out;
}

std::string encode_bundle(const FeatureBundle &bundle) {
    bundle.validate();
    const bool teacher = bundle.has_teacher_logits();
    std::uint16_t flags = 0;
    if (teacher) flags |= kFlagTeacher;
    if (!bundle.provenance.empty()) flags |= kFlagProvenance;

    io::ByteWriter w;
    w.put_bytes(kMagic);
    w.put_u16(kBundleVersion);
    w.put_u16(flags);
    w.put_u32(static_cast<std::uint32_t>(bundle.feature_dim));
    w.put_u32(static_cast<std::uint32_t>(bundle.num_classes));
    w.put_u64(bundle.records.size());
    for (const auto &r : bundle.records) {
        for (float v : r.features) w.put_f32(v);
        w.put_u16(static_cast<std::uint16_t>(r.label));
        if (teacher) {
            for (float v : *r.teacher_logits) w.put_f32(v);
        }
    }
    if (!bundle.provenance.empty()) {
        w.put_u32(static_cast<std::uint32_t>(bundle.provenance.size()));
        w.put_bytes(bundle.provenance);
    }
    return w.take();
}

FeatureBundle decode_bundle(std::string_view bytes) {
    if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
        throw FormatError("not a QTLB bundle (bad magic)");
    }
    io::ByteReader r(bytes);
    r.get_bytes(kMagic.size());
    const auto version = r.get_u16();
    if (version != kBundleVersion) {
        throw FormatError("unsupported QTLB version " + std::to_string(version));
    }
    const auto flags = r.get_u16();
    if (flags & ~(kFlagTeacher | kFlagProvenance)) {
        throw FormatError("unknown QTLB flag bits");
    }
    FeatureBundle b;
    const auto d = r.get_u32();
    const auto c = r.get_u32();
    if (d == 0 || c == 0 || c > 65536 || d > (1u << 24)) {
        throw FormatError("implausible QTLB header (D = " + std::to_string(d) +
                          ", C = " + std::to_string(c) + ")");
    }
    b.feature_dim = static_cast<int>(d);
    b.num_classes = static_cast<int>(c);
    const auto count = r.get_u64();
    const bool teacher = flags & kFlagTeacher;
    const std::uint64_t record_bytes = 4ull * d + 2 + (teacher ? 4ull * c : 0);
    if (count > r.remaining() / record_bytes) {
        throw CorruptionError("QTLB payload holds fewer than " + std::to_string(count) +
                              " records");
    }
    b.records.resize(count);
    for (auto &rec : b.records) {
        rec.features.resize(b.feature_dim);
        for (auto &v : rec.features) v = r.get_f32();
        rec.label = r.get_u16();
        if (rec.label >= b.num_classes) {
            throw CorruptionError("record label " + std::to_string(rec.label) +
                                  " outside [0, " + std::to_string(c) + ")");
        }
        if (teacher) {
            rec.teacher_logits.emplace(b.num_classes);
            for (auto &v : *rec.teacher_logits) v = r.get_f32();
        }
    }
    if (flags & kFlagProvenance) {
        const auto len = r.get_u32();
        b.provenance = std::string(r.get_bytes(len));
    }
    if (r.remaining() != 0) {
        throw CorruptionError("QTLB has " + std::to_string(r.remaining()) + " trailing bytes");
    }
    return b;
}

void save_bundle(const FeatureBundle &bundle, const std::string &path) {
    io::write_file_atomic(path, encode_bundle(bundle));
}

FeatureBundle load_bundle(const std::string &path) {
    return decode_bundle(io::read_file(path));
}

std::vector<std::size_t> balanced_subset_indices(const FeatureBundle &bundle,
                                                 std::size_t total, std::uint64_t seed) {
    const auto classes = static_cast<std::size_t>(bundle.num_classes);
    if (classes == 0 || total % classes != 0) {
        throw DataError("balanced_subset: total " + std::to_string(total) +
                        " is not divisible by " + std::to_string(classes) + " classes");
    }
    const std::size_t per_class = total / classes;
    const auto counts = bundle.class_counts();
    for (auto n : counts) {
        if (n < per_class) {
            throw DataError("balanced_subset: need " + std::to_string(per_class) +
                            " per class, have " + counts_string(counts));
        }
    }
    std::mt19937_64 rng(seed);
    auto by_class = indices_by_class(bundle);
    std::vector<std::size_t> chosen;
    chosen.reserve(total);
    for (auto &idx : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(per_class));
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

FeatureBundle balanced_subset(const FeatureBundle &bundle, std::size_t total,
                              std::uint64_t seed) {
    return bundle.select(balanced_subset_indices(bundle, total, seed));
}

Eigen::MatrixXd synthetic_class_means(int num_classes, int feature_dim,
                                      double class_separation, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd means(num_classes, feature_dim);
    for (int c = 0; c < num_classes; ++c) {
        for (int j = 0; j < feature_dim; ++j) means(c, j) = gauss(rng);
        means.row(c) *= class_separation / means.row(c).norm();
    }
    return means;
}

FeatureBundle synthesize_features(const SynthOptions &opts,
                                  std::optional<std::uint64_t> sample_seed) {
    if (opts.num_classes < 1 || opts.feature_dim < 1 || opts.per_class < 1 ||
        opts.class_separation < 0) {
        throw ConfigError("synthesize_features: sizes must be positive");
    }
    const Eigen::MatrixXd means = synthetic_class_means(
        opts.num_classes, opts.feature_dim, opts.class_separation, opts.seed);
    // Noise stream is independent of the stream that drew the means.
    std::mt19937_64 rng(sample_seed.value_or(opts.seed) ^ 0x9E3779B97F4A7C15ull);
    std::normal_distribution<double> gauss(0.0, 1.0);

    FeatureBundle b;
    b.feature_dim = opts.feature_dim;
    b.num_classes = opts.num_classes;
    b.provenance = "synthetic: classes=" + std::to_string(opts.num_classes) +
                   " dim=" + std::to_string(opts.feature_dim) +
                   " per_class=" + std::to_string(opts.per_class) +
                   " sep=" + std::to_string(opts.class_separation) +
                   " seed=" + std::to_string(opts.seed);
    if (sample_seed) b.provenance += " sample_seed=" + std::to_string(*sample_seed);
    b.records.reserve(static_cast<std::size_t>(opts.num_classes * opts.per_class));
    const double dim = opts.feature_dim;
    for (int c = 0; c < opts.num_classes; ++c) {
        for (int i = 0; i < opts.per_class; ++i) {
            FeatureRecord rec;
            rec.label = c;
            rec.features.resize(opts.feature_dim);
            for (int j = 0; j < opts.feature_dim; ++j) {
                rec.features(j) = static_cast<float>(means(c, j) + gauss(rng));
            }
            if (opts.teacher_logits) {
                const Eigen::RowVectorXd x = rec.features.cast<double>().transpose();
                rec.teacher_logits.emplace(opts.num_classes);
                for (int k = 0; k < opts.num_classes; ++k) {
                    (*rec.teacher_logits)(k) = static_cast<float>(
                        -opts.class_separation * (x - means.row(k)).squaredNorm() / dim);
                }
            }
            b.records.push_back(std::move(rec));
        }
    }
    return b;
}

SplitManifest split_assign(const FeatureBundle &bundle, double eval_fraction,
                           std::uint64_t seed) {
    if (!(eval_fraction > 0 && eval_fraction < 1)) {
        throw ConfigError("split_assign: eval_fraction must be in (0, 1)");
    }
    auto by_class = indices_by_class(bundle);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < 2) {
            throw DataError("split_assign: class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " record(s), need >= 2");
        }
    }
    std::mt19937_64 rng(seed);
    SplitManifest m;
    m.seed = seed;
    for (auto &idx : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_eval = static_cast<std::size_t>(
            std::llround(eval_fraction * static_cast<double>(idx.size())));
        m.eval_indices.insert(m.eval_indices.end(), idx.begin(),
                              idx.begin() + static_cast<std::ptrdiff_t>(n_eval));
        m.train_indices.insert(m.train_indices.end(),
                               idx.begin() + static_cast<std::ptrdiff_t>(n_eval), idx.end());
    }
    std::sort(m.train_indices.begin(), m.train_indices.end());
    std::sort(m.eval_indices.begin(), m.eval_indices.end());
    return m;
}

std::string format_manifest(const SplitManifest &m) {
    std::ostringstream ss;
    auto line = [&](const std::vector<std::size_t> &v) {
        for (std::size_t i = 0; i < v.size(); ++i) ss << (i ? " " : "") << v[i];
        ss << '\n';
    };
    line(m.train_indices);
    line(m.eval_indices);
    ss << m.seed << '\n';
    return ss.str();
}

SplitManifest parse_manifest(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string train_line, eval_line, seed_line;
    if (!std::getline(in, train_line) || !std::getline(in, eval_line) ||
        !std::getline(in, seed_line)) {
        throw FormatError("split manifest needs three lines");
    }
    auto parse_line = [](const std::string &s) {
        std::vector<std::size_t> out;
        std::istringstream ls(s);
        std::size_t v;
        while (ls >> v) out.push_back(v);
        if (!ls.eof()) throw FormatError("split manifest: bad index token");
        return out;
    };
    SplitManifest m;
    m.train_indices = parse_line(train_line);
    m.eval_indices = parse_line(eval_line);
    std::istringstream ss(seed_line);
    if (!(ss >> m.seed)) throw FormatError("split manifest: bad seed line");

    auto sorted_unique = [](const std::vector<std::size_t> &v) {
        return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
    };
    if (!sorted_unique(m.train_indices) || !sorted_unique(m.eval_indices)) {
        throw FormatError("split manifest indices must be sorted and duplicate-free");
    }
    std::vector<std::size_t> both;
    std::set_intersection(m.train_indices.begin(), m.train_indices.end(),
                          m.eval_indices.begin(), m.eval_indices.end(),
                          std::back_inserter(both));
    if (!both.empty()) throw FormatError("split manifest train/eval overlap");
    return m;
}

}  // namespace qtl
