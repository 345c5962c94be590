#include "proelm/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "proelm/errors.hpp"
#include "proelm/hidden_layer.hpp"

namespace proelm {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

double parse_number(const std::string& cell, long line_no) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  double value = 0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("non-numeric cell '" + cell + "'", line_no);
  return value;
}

double parse_label_cell(const std::string& cell, long line_no) {
  double v = parse_number(cell, line_no);
  if (v == 0.0) return -1.0;
  if (v == 1.0 || v == -1.0) return v;
  throw ParseError("label cell '" + cell + "' must be 0/1 or -1/+1", line_no);
}

std::string format_double(double v) {
  char buf[32];
  int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf, static_cast<std::size_t>(n));
  // Shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[32];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    double back = 0;
    std::from_chars(probe, probe + std::strlen(probe), back);
    if (back == v) return probe;
  }
  return s;
}

std::ifstream open_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  return in;
}

// Reads a logical line, tolerating CRLF endings.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

Dataset parse_csv(const std::filesystem::path& path, const LabelSelector& selector) {
  std::ifstream in = open_file(path);
  std::string line;
  long line_no = 0;

  if (!next_line(in, line)) throw ParseError("empty file: " + path.string(), 1);
  ++line_no;
  std::vector<std::string> header = split_csv_line(line);
  const Index total_cols = static_cast<Index>(header.size());

  // Resolve which columns are labels.
  std::vector<bool> is_label(header.size(), false);
  std::vector<Index> label_cols;
  if (!selector.names.empty()) {
    std::unordered_map<std::string, Index> by_name;
    for (Index i = 0; i < total_cols; ++i) by_name.emplace(header[i], i);
    for (const auto& name : selector.names) {
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw ParseError("unknown label column '" + name + "'", 1);
      if (is_label[static_cast<std::size_t>(it->second)])
        throw ParseError("label column '" + name + "' listed twice", 1);
      is_label[static_cast<std::size_t>(it->second)] = true;
      label_cols.push_back(it->second);
    }
  } else {
    if (selector.trailing < 1 || selector.trailing >= total_cols)
      throw InvalidArgumentError("trailing label count must be in [1, " +
                                 std::to_string(total_cols - 1) + "], got " +
                                 std::to_string(selector.trailing));
    for (Index i = total_cols - selector.trailing; i < total_cols; ++i) {
      is_label[static_cast<std::size_t>(i)] = true;
      label_cols.push_back(i);
    }
  }

  std::vector<Index> feature_cols;
  for (Index i = 0; i < total_cols; ++i)
    if (!is_label[static_cast<std::size_t>(i)]) feature_cols.push_back(i);

  std::vector<std::vector<double>> feat_rows;
  std::vector<std::vector<double>> label_rows;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (static_cast<Index>(cells.size()) != total_cols)
      throw ParseError("expected " + std::to_string(total_cols) + " fields, got " +
                       std::to_string(cells.size()), line_no);
    std::vector<double> f, l;
    f.reserve(feature_cols.size());
    l.reserve(label_cols.size());
    for (Index c : feature_cols)
      f.push_back(parse_number(cells[static_cast<std::size_t>(c)], line_no));
    for (Index c : label_cols)
      l.push_back(parse_label_cell(cells[static_cast<std::size_t>(c)], line_no));
    feat_rows.push_back(std::move(f));
    label_rows.push_back(std::move(l));
  }

  Dataset ds;
  const Index n_rows = static_cast<Index>(feat_rows.size());
  ds.features.resize(n_rows, static_cast<Index>(feature_cols.size()));
  ds.targets.resize(n_rows, static_cast<Index>(label_cols.size()));
  for (Index r = 0; r < n_rows; ++r) {
    for (Index c = 0; c < ds.features.cols(); ++c)
      ds.features(r, c) = feat_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    for (Index c = 0; c < ds.targets.cols(); ++c)
      ds.targets(r, c) = label_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  for (Index c : feature_cols) ds.feature_names.push_back(header[static_cast<std::size_t>(c)]);
  for (Index c : label_cols) ds.label_names.push_back(header[static_cast<std::size_t>(c)]);
  return ds;
}

void write_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path.string());
  for (Index c = 0; c < ds.features.cols(); ++c) {
    if (c > 0) out << ',';
    out << (c < static_cast<Index>(ds.feature_names.size())
                ? ds.feature_names[static_cast<std::size_t>(c)]
                : "f" + std::to_string(c));
  }
  for (Index c = 0; c < ds.targets.cols(); ++c) {
    if (ds.features.cols() > 0 || c > 0) out << ',';
    out << ds.label_names[static_cast<std::size_t>(c)];
  }
  out << '\n';
  for (Index r = 0; r < ds.features.rows(); ++r) {
    for (Index c = 0; c < ds.features.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(ds.features(r, c));
    }
    for (Index c = 0; c < ds.targets.cols(); ++c) {
      if (ds.features.cols() > 0 || c > 0) out << ',';
      out << (ds.targets(r, c) > 0 ? "1" : "-1");
    }
    out << '\n';
  }
}

Dataset generate_synthetic(Index samples, Index features, Index labels,
                           double lc_target, Seed seed) {
  if (samples < 1 || features < 1 || labels < 1)
    throw InvalidArgumentError("generate_synthetic: sizes must be >= 1");
  if (!(lc_target > 0) || lc_target > static_cast<double>(labels))
    throw InvalidArgumentError("generate_synthetic: lc_target must be in (0, m]");

  std::mt19937 gen(static_cast<std::mt19937::result_type>(seed));
  Dataset ds;
  ds.features.resize(samples, features);
  for (Index r = 0; r < samples; ++r)
    for (Index c = 0; c < features; ++c) ds.features(r, c) = detail::uniform_pm1(gen);

  MatrixXd teacher(labels, features);
  for (Index r = 0; r < labels; ++r)
    for (Index c = 0; c < features; ++c) teacher(r, c) = detail::uniform_pm1(gen);

  MatrixXd scores = ds.features * teacher.transpose();  // N x m

  // Per label, mark the top (N * lc_target / m) scores positive so the mean
  // label cardinality matches lc_target.
  const Index positives_per_label = static_cast<Index>(
      std::llround(static_cast<double>(samples) * lc_target / static_cast<double>(labels)));
  ds.targets = MatrixXd::Constant(samples, labels, -1.0);
  std::vector<Index> order(static_cast<std::size_t>(samples));
  for (Index j = 0; j < labels; ++j) {
    std::iota(order.begin(), order.end(), Index(0));
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      if (scores(a, j) != scores(b, j)) return scores(a, j) > scores(b, j);
      return a < b;
    });
    for (Index k = 0; k < positives_per_label && k < samples; ++k)
      ds.targets(order[static_cast<std::size_t>(k)], j) = 1.0;
  }

  for (Index j = 0; j < labels; ++j) ds.label_names.push_back("L" + std::to_string(j));
  for (Index c = 0; c < features; ++c) ds.feature_names.push_back("f" + std::to_string(c));
  return ds;
}

}  // namespace proelm
