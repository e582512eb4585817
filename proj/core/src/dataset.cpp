#include "corsvm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

#include "corsvm/errors.hpp"
#include "corsvm/io.hpp"
#include "corsvm/jacobi.hpp"
#include "corsvm/json_util.hpp"
#include "corsvm/rng.hpp"

namespace corsvm {

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_feature(std::string_view tok, std::size_t line_no, std::size_t col) {
    tok = trim(tok);
    double value = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError("line " + std::to_string(line_no) + ": non-numeric feature in column " +
                         std::to_string(col) + " ('" + std::string(tok) + "')");
    if (!std::isfinite(value))
        throw ParseError("line " + std::to_string(line_no) + ": non-finite feature in column " +
                         std::to_string(col));
    return value;
}

int parse_label(std::string_view tok, std::size_t line_no) {
    tok = trim(tok);
    int value = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError("line " + std::to_string(line_no) + ": non-integer label ('" +
                         std::string(tok) + "')");
    return value;
}

struct CsvTable {
    Eigen::MatrixXd features;
    std::vector<int> labels;
};

CsvTable parse_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);

    std::vector<std::string_view> lines;
    {
        std::string_view rest = text;
        while (!rest.empty()) {
            const std::size_t pos = rest.find('\n');
            if (pos == std::string_view::npos) {
                lines.push_back(rest);
                break;
            }
            lines.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw ParseError(path.string() + ": empty file");

    const auto header = split_line(lines[0]);
    if (header.size() < 2 || trim(header.back()) != "label")
        throw ParseError(path.string() + ": header must be f_0,...,f_{D-1},label");
    const std::size_t dim = header.size() - 1;
    const std::size_t n = lines.size() - 1;
    if (n == 0) throw ParseError(path.string() + ": no data rows");

    CsvTable table;
    table.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    table.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t line_no = r + 2;  // header is line 1
        const auto fields = split_line(lines[r + 1]);
        if (fields.size() != dim + 1)
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(dim + 1) + " fields, got " +
                             std::to_string(fields.size()));
        for (std::size_t c = 0; c < dim; ++c)
            table.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_feature(fields[c], line_no, c);
        table.labels[r] = parse_label(fields[dim], line_no);
    }
    return table;
}

std::string csv_text(const Eigen::MatrixXd& features, const std::vector<int>& labels) {
    std::string out;
    const Eigen::Index dim = features.cols();
    for (Eigen::Index c = 0; c < dim; ++c) {
        out += "f_" + std::to_string(c) + ",";
    }
    out += "label\n";
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            out += format_double_sig(features(r, c), 17);
            out += ',';
        }
        out += std::to_string(labels[static_cast<std::size_t>(r)]);
        out += '\n';
    }
    return out;
}

struct ColumnStats {
    Eigen::VectorXd means;
    Eigen::VectorXd scales;
};

// z-scoring with the n-1 standard deviation; exactly-constant columns get
// mean = the constant and scale 1, so they map to exact zeros.
std::pair<Eigen::MatrixXd, ColumnStats> standardize_columns(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    const Eigen::Index dim = x.cols();
    if (n < 2) throw SizeError("standardize: need at least 2 rows");

    Eigen::MatrixXd out(n, dim);
    ColumnStats stats;
    stats.means.resize(dim);
    stats.scales.resize(dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        const auto col = x.col(c);
        const double lo = col.minCoeff();
        const double hi = col.maxCoeff();
        if (lo == hi) {
            stats.means(c) = lo;
            stats.scales(c) = 1.0;
            out.col(c).setZero();
            continue;
        }
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / static_cast<double>(n - 1);
        const double sd = std::sqrt(var);
        stats.means(c) = mean;
        stats.scales(c) = sd;
        out.col(c) = (col.array() - mean) / sd;
    }
    return {std::move(out), std::move(stats)};
}

struct PcaFit {
    Eigen::MatrixXd projected;
    Eigen::MatrixXd components;          // d x D
    Eigen::VectorXd explained_variance;  // d
    Eigen::VectorXd centers;             // D, column means removed pre-projection
};

PcaFit fit_pca(const Eigen::MatrixXd& x, int d) {
    const Eigen::Index n = x.rows();
    const Eigen::Index dim = x.cols();
    if (n < 2) throw SizeError("pca_reduce: need at least 2 rows");
    if (d < 1 || d > dim)
        throw DimensionError("pca_reduce: requested " + std::to_string(d) + " components from " +
                             std::to_string(dim) + " features");

    PcaFit fit;
    fit.centers = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - fit.centers.transpose();
    const Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(n - 1);

    const SymmetricEigen eig = jacobi_eigen(cov);

    fit.components.resize(d, dim);
    fit.explained_variance.resize(d);
    for (int i = 0; i < d; ++i) {
        Eigen::VectorXd v = eig.vectors.col(i);
        for (Eigen::Index k = 0; k < dim; ++k) {
            if (std::abs(v(k)) > 1e-12) {
                if (v(k) < 0.0) v = -v;
                break;
            }
        }
        fit.components.row(i) = v.transpose();
        fit.explained_variance(i) = eig.values(i);
    }
    fit.projected = centered * fit.components.transpose();
    return fit;
}

PcaTransform compose_transform(const PcaTransform& partial, const PcaFit& fit,
                               Eigen::Index dim) {
    PcaTransform t;
    if (partial.column_means.size() == 0) {
        t.column_means = fit.centers;
        t.column_scales = Eigen::VectorXd::Ones(dim);
    } else {
        if (partial.column_means.size() != dim || partial.column_scales.size() != dim)
            throw DimensionError("pca_reduce: partial transform width mismatch");
        t.column_means =
            partial.column_means + partial.column_scales.cwiseProduct(fit.centers);
        t.column_scales = partial.column_scales;
    }
    t.components = fit.components;
    t.explained_variance = fit.explained_variance;
    return t;
}

}  // namespace

void to_json(nlohmann::json& j, const PcaTransform& t) {
    j = nlohmann::json{{"means", vector_to_json(t.column_means)},
                       {"scales", vector_to_json(t.column_scales)},
                       {"components", matrix_to_json(t.components)},
                       {"explained_variance", vector_to_json(t.explained_variance)}};
}

void from_json(const nlohmann::json& j, PcaTransform& t) {
    t.column_means = vector_from_json(j.at("means"));
    t.column_scales = vector_from_json(j.at("scales"));
    t.components = matrix_from_json(j.at("components"));
    t.explained_variance = vector_from_json(j.at("explained_variance"));
    if (t.column_scales.size() != t.column_means.size())
        throw ParseError("PcaTransform: means/scales length mismatch");
    if (t.components.size() > 0 && t.components.cols() != t.column_means.size())
        throw ParseError("PcaTransform: components width mismatch");
}

RawDataset load_csv(const std::filesystem::path& path) {
    CsvTable table = parse_csv(path);
    for (std::size_t r = 0; r < table.labels.size(); ++r) {
        if (table.labels[r] < 1)
            throw ParseError("line " + std::to_string(r + 2) +
                             ": class id must be a positive integer, got " +
                             std::to_string(table.labels[r]));
    }
    RawDataset ds;
    ds.features = std::move(table.features);
    ds.labels = std::move(table.labels);
    for (int label : ds.labels) {
        if (!ds.class_names.count(label)) ds.class_names[label] = std::to_string(label);
    }
    return ds;
}

BinaryDataset load_binary_csv(const std::filesystem::path& path) {
    CsvTable table = parse_csv(path);
    for (std::size_t r = 0; r < table.labels.size(); ++r) {
        if (table.labels[r] != 1 && table.labels[r] != -1)
            throw ParseError("line " + std::to_string(r + 2) +
                             ": binary label must be +1 or -1, got " +
                             std::to_string(table.labels[r]));
    }
    BinaryDataset ds;
    ds.features = std::move(table.features);
    ds.labels = std::move(table.labels);
    ds.pair = {1, -1};
    return ds;
}

void write_csv(const std::filesystem::path& path, const RawDataset& ds) {
    write_file_atomic(path, csv_text(ds.features, ds.labels));
}

void write_csv(const std::filesystem::path& path, const BinaryDataset& ds) {
    write_file_atomic(path, csv_text(ds.features, ds.labels));
}

std::pair<RawDataset, PcaTransform> standardize(const RawDataset& ds) {
    auto [features, stats] = standardize_columns(ds.features);
    PcaTransform t;
    t.column_means = std::move(stats.means);
    t.column_scales = std::move(stats.scales);
    return {RawDataset{std::move(features), ds.labels, ds.class_names}, std::move(t)};
}

std::pair<BinaryDataset, PcaTransform> standardize(const BinaryDataset& ds) {
    auto [features, stats] = standardize_columns(ds.features);
    PcaTransform t;
    t.column_means = std::move(stats.means);
    t.column_scales = std::move(stats.scales);
    return {BinaryDataset{std::move(features), ds.labels, ds.pair}, std::move(t)};
}

std::pair<RawDataset, PcaTransform> pca_reduce(const RawDataset& ds, int d,
                                               const PcaTransform& partial) {
    PcaFit fit = fit_pca(ds.features, d);
    PcaTransform t = compose_transform(partial, fit, ds.dims());
    return {RawDataset{std::move(fit.projected), ds.labels, ds.class_names}, std::move(t)};
}

std::pair<RawDataset, PcaTransform> pca_reduce(const RawDataset& ds, int d) {
    return pca_reduce(ds, d, PcaTransform{});
}

std::pair<BinaryDataset, PcaTransform> pca_reduce(const BinaryDataset& ds, int d,
                                                  const PcaTransform& partial) {
    PcaFit fit = fit_pca(ds.features, d);
    PcaTransform t = compose_transform(partial, fit, ds.dims());
    return {BinaryDataset{std::move(fit.projected), ds.labels, ds.pair}, std::move(t)};
}

Eigen::VectorXd apply(const PcaTransform& t, const Eigen::VectorXd& x) {
    if (x.size() != t.column_means.size())
        throw DimensionError("apply: row width does not match transform");
    const Eigen::VectorXd z = (x - t.column_means).cwiseQuotient(t.column_scales);
    return t.components * z;
}

Eigen::MatrixXd apply(const PcaTransform& t, const Eigen::MatrixXd& rows) {
    if (rows.cols() != t.column_means.size())
        throw DimensionError("apply: row width does not match transform");
    Eigen::MatrixXd z = rows.rowwise() - t.column_means.transpose();
    z.array().rowwise() /= t.column_scales.transpose().array();
    return z * t.components.transpose();
}

BinaryDataset select_pair(const RawDataset& ds, int a, int b) {
    if (a == b) throw LookupError("select_pair: class ids must differ");
    bool seen_a = false;
    bool seen_b = false;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        const int label = ds.labels[static_cast<std::size_t>(i)];
        if (label == a) {
            seen_a = true;
            keep.push_back(i);
        } else if (label == b) {
            seen_b = true;
            keep.push_back(i);
        }
    }
    if (!seen_a) throw LookupError("select_pair: class id " + std::to_string(a) + " not present");
    if (!seen_b) throw LookupError("select_pair: class id " + std::to_string(b) + " not present");

    BinaryDataset out;
    out.features.resize(static_cast<Eigen::Index>(keep.size()), ds.dims());
    out.labels.resize(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(keep[r]);
        out.labels[r] = (ds.labels[static_cast<std::size_t>(keep[r])] == a) ? +1 : -1;
    }
    out.pair = {a, b};
    return out;
}

SplitResult split(const BinaryDataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error("split: test_fraction must lie in (0, 1)");
    const Eigen::Index n = ds.rows();
    if (n < 2) throw SizeError("split: need at least 2 rows");

    std::vector<char> in_test(static_cast<std::size_t>(n), 0);
    for (const int label : {+1, -1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.labels.size(); ++i)
            if (ds.labels[i] == label) idx.push_back(i);
        if (idx.empty()) continue;

        const auto count = static_cast<long long>(idx.size());
        long long want = std::llround(test_fraction * static_cast<double>(count));
        if (count >= 2)
            want = std::clamp(want, 1LL, count - 1);
        else
            want = 0;

        Rng rng(derive_seed(seed, label == +1 ? 1 : 2));
        for (std::size_t i = idx.size() - 1; i > 0; --i) {
            const std::size_t j = rng.next_index(i + 1);
            std::swap(idx[i], idx[j]);
        }
        for (long long k = 0; k < want; ++k) in_test[idx[static_cast<std::size_t>(k)]] = 1;
    }

    const auto gather = [&](bool test_side) {
        BinaryDataset part;
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < n; ++i)
            if ((in_test[static_cast<std::size_t>(i)] != 0) == test_side) rows.push_back(i);
        part.features.resize(static_cast<Eigen::Index>(rows.size()), ds.dims());
        part.labels.resize(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            part.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(rows[r]);
            part.labels[r] = ds.labels[static_cast<std::size_t>(rows[r])];
        }
        part.pair = ds.pair;
        return part;
    };

    return SplitResult{gather(false), gather(true)};
}

}  // namespace corsvm
