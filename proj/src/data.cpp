#include "somkit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "somkit/error.hpp"

namespace somkit {

void Dataset::validate() const {
    const std::size_t n = size();
    if (!feature_names.empty() && feature_names.size() != dim()) {
        throw ShapeError(fmt::format("{} feature names for {} features", feature_names.size(), dim()));
    }
    if (target && target->size() != n) {
        throw ShapeError(fmt::format("target has {} values for {} samples", target->size(), n));
    }
    if (labels && labels->size() != n) {
        throw ShapeError(fmt::format("labels have {} values for {} samples", labels->size(), n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (double v : features.row(i)) {
            if (!std::isfinite(v)) throw InputError(fmt::format("non-finite feature in row {}", i));
        }
    }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.features = Matrix(indices.size(), dim());
    out.feature_names = feature_names;
    if (target) out.target.emplace();
    if (labels) out.labels.emplace();
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const std::size_t i = indices[r];
        if (i >= size()) throw BoundsError(fmt::format("row index {} out of range", i));
        std::copy_n(features.row(i).begin(), dim(), out.features.row(r).begin());
        if (target) out.target->push_back((*target)[i]);
        if (labels) out.labels->push_back((*labels)[i]);
    }
    return out;
}

Dataset make_blobs(const BlobSpec& spec) {
    if (spec.n_samples == 0 || spec.n_features == 0 || spec.n_centers == 0) {
        throw ParameterError("blob counts must be positive");
    }
    if (spec.cluster_std < 0.0 || !(spec.box_max > spec.box_min)) {
        throw ParameterError("blob spread must be >= 0 and box must be a nonempty interval");
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> box(spec.box_min, spec.box_max);
    Matrix centers(spec.n_centers, spec.n_features);
    for (double& v : centers.data()) v = box(rng);

    std::uniform_int_distribution<std::size_t> pick(0, spec.n_centers - 1);
    std::normal_distribution<double> noise(0.0, 1.0);

    Dataset out;
    out.features = Matrix(spec.n_samples, spec.n_features);
    out.labels.emplace(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        const std::size_t c = pick(rng);
        (*out.labels)[i] = static_cast<int>(c);
        auto row = out.features.row(i);
        for (std::size_t j = 0; j < spec.n_features; ++j) {
            row[j] = centers(c, j) + spec.cluster_std * noise(rng);
        }
    }
    for (std::size_t j = 0; j < spec.n_features; ++j) out.feature_names.push_back(fmt::format("x{}", j));
    return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
        if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    }
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& options, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    bool have_header = false;
    Dataset out;
    std::vector<std::size_t> feature_cols;
    std::optional<std::size_t> target_col, label_col;
    std::size_t data_row = 0;
    std::vector<double> values;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header) {
            if (line.empty()) continue;
            header = split_fields(line);
            have_header = true;
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (options.target_column && header[c] == *options.target_column) {
                    target_col = c;
                } else if (options.label_column && header[c] == *options.label_column) {
                    label_col = c;
                } else {
                    feature_cols.push_back(c);
                    out.feature_names.push_back(header[c]);
                }
            }
            if (options.target_column && !target_col) {
                throw InputError(fmt::format("{}: target column '{}' not found", source,
                                             *options.target_column));
            }
            if (options.label_column && !label_col) {
                throw InputError(fmt::format("{}: label column '{}' not found", source,
                                             *options.label_column));
            }
            if (feature_cols.empty()) throw InputError(fmt::format("{}: no feature columns", source));
            if (target_col) out.target.emplace();
            if (label_col) out.labels.emplace();
            continue;
        }
        if (line.empty()) continue;
        ++data_row;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw InputError(fmt::format("{}: row {} has {} fields, header has {}", source, data_row,
                                         fields.size(), header.size()));
        }
        values.clear();
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double v = 0;
            if (!parse_double(fields[c], v)) {
                throw InputError(fmt::format("{}: non-numeric cell '{}' at row {}, column {}", source,
                                             fields[c], data_row, c + 1));
            }
            if (target_col && c == *target_col) {
                out.target->push_back(v);
            } else if (label_col && c == *label_col) {
                if (v < 0 || v != std::floor(v)) {
                    throw InputError(fmt::format(
                        "{}: label '{}' at row {}, column {} is not a nonnegative integer", source,
                        fields[c], data_row, c + 1));
                }
                out.labels->push_back(static_cast<int>(v));
            } else {
                values.push_back(v);
            }
        }
        out.features.append_row(values);
    }
    if (!have_header) throw InputError(fmt::format("{}: missing header row", source));
    if (out.features.rows() == 0) out.features = Matrix(0, feature_cols.size());
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str(), options, path.string());
}

void save_csv(const Dataset& data, const std::filesystem::path& path, const std::string& target_name,
              const std::string& label_name) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
    std::vector<std::string> cols;
    for (std::size_t j = 0; j < data.dim(); ++j) {
        cols.push_back(j < data.feature_names.size() ? data.feature_names[j] : fmt::format("x{}", j));
    }
    if (data.target) cols.push_back(target_name);
    if (data.labels) cols.push_back(label_name);
    f << fmt::format("{}\n", fmt::join(cols, ","));
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::string line;
        for (std::size_t j = 0; j < data.dim(); ++j) {
            if (j) line += ',';
            line += fmt::format("{:.17g}", data.features(i, j));
        }
        if (data.target) line += fmt::format(",{:.17g}", (*data.target)[i]);
        if (data.labels) line += fmt::format(",{}", (*data.labels)[i]);
        f << line << '\n';
    }
}

Scaler fit_scaler(const Dataset& data) {
    if (data.size() == 0) throw InputError("cannot standardize an empty dataset");
    const std::size_t n = data.size(), k = data.dim();
    Scaler s;
    s.mean.assign(k, 0.0);
    s.stddev.assign(k, 0.0);
    s.constant.assign(k, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) s.mean[j] += data.features(i, j);
    }
    for (double& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double d = data.features(i, j) - s.mean[j];
            s.stddev[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        s.stddev[j] = std::sqrt(s.stddev[j] / static_cast<double>(n));
        if (!(s.stddev[j] > 1e-12 * std::max(1.0, std::abs(s.mean[j])))) {
            s.constant[j] = true;
            s.stddev[j] = 1.0;
        }
    }
    return s;
}

void Scaler::transform_row(std::span<double> row) const {
    if (row.size() != mean.size()) throw ShapeError("scaler width does not match row width");
    for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = constant[j] ? 0.0 : (row[j] - mean[j]) / stddev[j];
    }
}

Dataset Scaler::transform(const Dataset& data) const {
    Dataset out = data;
    for (std::size_t i = 0; i < out.size(); ++i) transform_row(out.features.row(i));
    return out;
}

Dataset Scaler::inverse_transform(const Dataset& data) const {
    if (data.dim() != mean.size()) throw ShapeError("scaler width does not match dataset width");
    Dataset out = data;
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto row = out.features.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = constant[j] ? mean[j] : row[j] * stddev[j] + mean[j];
        }
    }
    return out;
}

void Scaler::save(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
    f << "feature,mean,stddev,constant\n";
    for (std::size_t j = 0; j < mean.size(); ++j) {
        f << fmt::format("{},{:.17g},{:.17g},{}\n", j, mean[j], stddev[j], constant[j] ? 1 : 0);
    }
}

Scaler Scaler::load(const std::filesystem::path& path) {
    const Dataset d = load_csv(path);
    if (d.dim() != 4) throw InputError(fmt::format("'{}' is not a scaler file", path.string()));
    Scaler s;
    for (std::size_t j = 0; j < d.size(); ++j) {
        s.mean.push_back(d.features(j, 1));
        s.stddev.push_back(d.features(j, 2));
        s.constant.push_back(d.features(j, 3) != 0.0);
    }
    return s;
}

std::pair<Dataset, Scaler> standardize(const Dataset& data) {
    Scaler s = fit_scaler(data);
    return {s.transform(data), std::move(s)};
}

Split split(const Dataset& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ParameterError(fmt::format("test fraction must be in (0, 1), got {}", test_fraction));
    }
    const std::size_t n = data.size();
    const auto n_test = static_cast<std::size_t>(std::ceil(test_fraction * n - 1e-9));
    if (n_test == 0 || n_test >= n) {
        throw InputError(fmt::format("cannot split {} samples with test fraction {}", n, test_fraction));
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    Split s;
    s.test_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    s.train = data.subset(s.train_indices);
    s.test = data.subset(s.test_indices);
    return s;
}

}  // namespace somkit
