#include "relcomp/dataset.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "relcomp/rng.h"

namespace relcomp {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Comma-separated fields; double-quoted fields may contain commas and "".
std::vector<std::string> SplitCsvLine(std::string_view line, int line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t p = 0; p < line.size(); ++p) {
    char c = line[p];
    if (quoted) {
      if (c == '"') {
        if (p + 1 < line.size() && line[p + 1] == '"') {
          current.push_back('"');
          ++p;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && Trim(current).empty()) {
      quoted = true;
      was_quoted = true;
      current.clear();
    } else if (c == ',') {
      fields.emplace_back(was_quoted ? current : std::string(Trim(current)));
      current.clear();
      was_quoted = false;
    } else {
      current.push_back(c);
    }
  }
  if (quoted)
    throw DatasetError("line " + std::to_string(line_no) + ": unterminated quote");
  fields.emplace_back(was_quoted ? current : std::string(Trim(current)));
  return fields;
}

double ParseNumber(const std::string& text, int line_no, const std::string& column) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (text.empty() || end == begin || *end != '\0' || errno == ERANGE) {
    throw DatasetError("line " + std::to_string(line_no) + ", column '" + column +
                       "': cannot parse '" + text + "' as a number");
  }
  if (!std::isfinite(v)) {
    throw DatasetError("line " + std::to_string(line_no) + ", column '" + column +
                       "': non-finite feature");
  }
  return v;
}

}  // namespace

void Dataset::Validate() const {
  const int n = size();
  if (n < 3) throw DatasetError("dataset needs at least 3 instances, got " + std::to_string(n));
  if (dim() < 1) throw DatasetError("dataset needs at least one feature");
  if (!features.allFinite()) throw DatasetError("non-finite feature");
  if (static_cast<int>(ids.size()) != n) throw DatasetError("ids/features row mismatch");
  std::set<std::string_view> unique(ids.begin(), ids.end());
  if (static_cast<int>(unique.size()) != n) throw DatasetError("duplicate instance ids");
  if (labels) {
    if (static_cast<int>(labels->size()) != n)
      throw DatasetError("labels/features row mismatch");
    if (num_classes < 2) throw DatasetError("labeled dataset needs at least 2 classes");
    for (int y : *labels)
      if (y < 0 || y >= num_classes) throw DatasetError("label out of range");
  }
}

Dataset ParseCsv(std::string_view text, const CsvOptions& options) {
  std::vector<std::vector<std::string>> rows;
  int line_no = 0;
  std::size_t start = 0;
  std::vector<std::string> header;
  std::vector<int> row_lines;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (Trim(line).empty()) continue;
    auto fields = SplitCsvLine(line, line_no);
    if (header.empty()) {
      header = std::move(fields);
      continue;
    }
    if (fields.size() != header.size()) {
      throw DatasetError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " fields, got " +
                         std::to_string(fields.size()));
    }
    rows.push_back(std::move(fields));
    row_lines.push_back(line_no);
  }
  if (header.empty()) throw DatasetError("empty CSV");

  int label_col = -1;
  int id_col = -1;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (options.label_column && header[c] == *options.label_column) label_col = c;
    if (header[c] == options.id_column) id_col = c;
  }
  if (options.label_column && label_col < 0)
    throw DatasetError("label column '" + *options.label_column + "' not in header");

  Dataset ds;
  std::vector<int> feature_cols;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (c == label_col || c == id_col) continue;
    feature_cols.push_back(c);
    ds.feature_names.push_back(header[c]);
  }
  const int n = static_cast<int>(rows.size());
  if (n < 3) throw DatasetError("dataset needs at least 3 rows, got " + std::to_string(n));
  if (feature_cols.empty()) throw DatasetError("no feature columns");

  ds.features.resize(n, static_cast<int>(feature_cols.size()));
  ds.ids.reserve(n);
  for (int r = 0; r < n; ++r) {
    for (int f = 0; f < static_cast<int>(feature_cols.size()); ++f) {
      ds.features(r, f) = ParseNumber(rows[r][feature_cols[f]], row_lines[r],
                                      header[feature_cols[f]]);
    }
    ds.ids.push_back(id_col >= 0 ? rows[r][id_col] : std::to_string(r));
  }

  if (label_col >= 0) {
    std::set<std::string> distinct;
    for (const auto& row : rows) distinct.insert(row[label_col]);
    ds.class_names.assign(distinct.begin(), distinct.end());
    std::map<std::string, int> code;
    for (int c = 0; c < static_cast<int>(ds.class_names.size()); ++c)
      code[ds.class_names[c]] = c;
    std::vector<int> labels(n);
    for (int r = 0; r < n; ++r) labels[r] = code[rows[r][label_col]];
    ds.labels = std::move(labels);
    ds.num_classes = static_cast<int>(ds.class_names.size());
  }
  ds.Validate();
  return ds;
}

Dataset LoadCsv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return ParseCsv(buf.str(), options);
  } catch (const DatasetError& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
}

void WriteCsv(const Dataset& dataset, const std::filesystem::path& path,
              const std::string& label_column) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << "id";
  for (int f = 0; f < dataset.dim(); ++f) {
    out << ',';
    if (f < static_cast<int>(dataset.feature_names.size()))
      out << dataset.feature_names[f];
    else
      out << 'f' << f;
  }
  if (dataset.labels) out << ',' << label_column;
  out << '\n';
  char buf[64];
  for (int r = 0; r < dataset.size(); ++r) {
    out << dataset.ids[r];
    for (int f = 0; f < dataset.dim(); ++f) {
      std::snprintf(buf, sizeof(buf), "%.17g", dataset.features(r, f));
      out << ',' << buf;
    }
    if (dataset.labels) {
      int y = (*dataset.labels)[r];
      out << ',';
      if (y < static_cast<int>(dataset.class_names.size()))
        out << dataset.class_names[y];
      else
        out << y;
    }
    out << '\n';
  }
  if (!out) throw DatasetError("write failed for " + path.string());
}

Dataset MakeSyntheticGaussians(const SyntheticSpec& spec) {
  if (spec.num_classes < 2 || spec.per_class < 1 || spec.dim < 1 ||
      spec.informative_dims < 0 || spec.informative_dims > spec.dim ||
      !(spec.separation > 0.0)) {
    throw std::invalid_argument("MakeSyntheticGaussians: invalid parameters");
  }
  const int n = spec.num_classes * spec.per_class;
  Dataset ds;
  ds.features.resize(n, spec.dim);
  ds.labels = std::vector<int>(n);
  ds.num_classes = spec.num_classes;
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  int r = 0;
  for (int c = 0; c < spec.num_classes; ++c) {
    for (int p = 0; p < spec.per_class; ++p, ++r) {
      for (int f = 0; f < spec.dim; ++f) {
        double mean = f < spec.informative_dims
                          ? spec.separation * ((c + f) % spec.num_classes)
                          : 0.0;
        ds.features(r, f) = mean + normal(rng);
      }
      (*ds.labels)[r] = c;
      ds.ids.push_back("s" + std::to_string(r));
    }
  }
  for (int c = 0; c < spec.num_classes; ++c) ds.class_names.push_back(std::to_string(c));
  for (int f = 0; f < spec.dim; ++f) ds.feature_names.push_back("f" + std::to_string(f));
  if (n < 3) throw std::invalid_argument("MakeSyntheticGaussians: fewer than 3 instances");
  return ds;
}

Split SplitDataset(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  Rng rng(DeriveSeed(seed, kStreamSplit));
  const int n = dataset.size();
  std::vector<std::vector<int>> groups;
  if (dataset.labels) {
    groups.resize(dataset.num_classes);
    for (int h = 0; h < n; ++h) groups[(*dataset.labels)[h]].push_back(h);
  } else {
    groups.emplace_back(n);
    std::iota(groups[0].begin(), groups[0].end(), 0);
  }
  // Largest-remainder allocation: the test fold gets round(f n) rows in
  // total, spread over the groups in proportion (ties to the lower group).
  const auto total_test = static_cast<std::size_t>(std::lround(test_fraction * n));
  std::vector<std::size_t> n_test(groups.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double exact = test_fraction * static_cast<double>(groups[g].size());
    n_test[g] = static_cast<std::size_t>(std::floor(exact));
    assigned += n_test[g];
    remainders.emplace_back(-(exact - std::floor(exact)), g);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t r = 0; assigned < total_test && r < remainders.size(); ++r, ++assigned)
    ++n_test[remainders[r].second];

  Split split;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& group = groups[g];
    std::shuffle(group.begin(), group.end(), rng);
    const auto cut = group.begin() + static_cast<std::ptrdiff_t>(n_test[g]);
    split.test_indices.insert(split.test_indices.end(), group.begin(), cut);
    split.train_indices.insert(split.train_indices.end(), cut, group.end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  if (split.train_indices.empty() || split.test_indices.empty())
    throw std::invalid_argument("split leaves an empty fold");
  return split;
}

Dataset Subset(const Dataset& dataset, std::span<const int> indices) {
  Dataset out;
  out.features.resize(static_cast<int>(indices.size()), dataset.dim());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.features.row(static_cast<int>(r)) = dataset.features.row(indices[r]);
    out.ids.push_back(dataset.ids[indices[r]]);
  }
  if (dataset.labels) {
    std::vector<int> labels;
    labels.reserve(indices.size());
    for (int h : indices) labels.push_back((*dataset.labels)[h]);
    out.labels = std::move(labels);
  }
  out.num_classes = dataset.num_classes;
  out.class_names = dataset.class_names;
  out.feature_names = dataset.feature_names;
  return out;
}

Standardizer Standardizer::Fit(const FeatureMatrix& features) {
  Standardizer s;
  const double n = static_cast<double>(features.rows());
  s.mean_ = features.colwise().mean();
  s.scale_.resize(features.cols());
  for (int f = 0; f < features.cols(); ++f) {
    double var = (features.col(f).array() - s.mean_[f]).square().sum() / n;
    double sd = std::sqrt(var);
    s.scale_[f] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

FeatureMatrix Standardizer::Apply(const FeatureMatrix& features) const {
  FeatureMatrix out = features;
  for (int r = 0; r < out.rows(); ++r)
    out.row(r) = (out.row(r) - mean_).cwiseQuotient(scale_);
  return out;
}

void Standardizer::ApplyInPlace(Dataset& dataset) const {
  dataset.features = Apply(dataset.features);
}

PreparedData PrepareData(const Dataset& dataset, double test_fraction,
                         std::uint64_t seed, bool standardize) {
  PreparedData out;
  if (test_fraction == 0.0) {
    out.split.train_indices.resize(dataset.size());
    std::iota(out.split.train_indices.begin(), out.split.train_indices.end(), 0);
  } else {
    out.split = SplitDataset(dataset, test_fraction, seed);
  }
  out.train = Subset(dataset, out.split.train_indices);
  out.test = Subset(dataset, out.split.test_indices);
  if (standardize) {
    Standardizer s = Standardizer::Fit(out.train.features);
    s.ApplyInPlace(out.train);
    if (out.test.size() > 0) s.ApplyInPlace(out.test);
  }
  return out;
}

std::uint64_t FeatureFingerprint(const FeatureMatrix& features) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(features.rows()));
  mix(static_cast<std::uint64_t>(features.cols()));
  for (int r = 0; r < features.rows(); ++r)
    for (int c = 0; c < features.cols(); ++c) {
      std::uint64_t bits;
      double v = features(r, c);
      std::memcpy(&bits, &v, sizeof(bits));
      mix(bits);
    }
  return h;
}

}  // namespace relcomp
