#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "proelm/dataset.hpp"
#include "proelm/errors.hpp"

namespace proelm {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                        (s.front() == '"' && s.back() == '"')))
    return s.substr(1, s.size() - 2);
  return s;
}

double parse_number(const std::string& cell, long line_no) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  double value = 0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("non-numeric value '" + cell + "'", line_no);
  return value;
}

struct ArffAttribute {
  std::string name;
  bool nominal01 = false;  // {0,1} nominal; otherwise numeric
};

struct ArffHeader {
  std::vector<ArffAttribute> attributes;
  long data_line = 0;  // line number of @data
};

ArffHeader read_header(std::istream& in, const std::filesystem::path& path,
                       long& line_no) {
  ArffHeader header;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    std::string lt = lower(t);
    if (lt.rfind("@relation", 0) == 0) continue;
    if (lt.rfind("@data", 0) == 0) {
      header.data_line = line_no;
      return header;
    }
    if (lt.rfind("@attribute", 0) == 0) {
      std::string rest = trim(t.substr(std::string("@attribute").size()));
      // Name is either quoted or runs to the first whitespace.
      std::string name;
      std::size_t pos = 0;
      if (!rest.empty() && (rest[0] == '\'' || rest[0] == '"')) {
        char q = rest[0];
        std::size_t close = rest.find(q, 1);
        if (close == std::string::npos)
          throw ParseError("unterminated quoted attribute name", line_no);
        name = rest.substr(1, close - 1);
        pos = close + 1;
      } else {
        std::size_t sp = rest.find_first_of(" \t");
        if (sp == std::string::npos)
          throw ParseError("attribute declaration missing a type", line_no);
        name = rest.substr(0, sp);
        pos = sp;
      }
      std::string type = trim(rest.substr(pos));
      ArffAttribute attr;
      attr.name = name;
      std::string type_l = lower(type);
      if (type_l == "numeric" || type_l == "real" || type_l == "integer") {
        attr.nominal01 = false;
      } else if (!type.empty() && type[0] == '{') {
        if (type.back() != '}')
          throw ParseError("unterminated nominal value list", line_no);
        std::string body = type.substr(1, type.size() - 2);
        std::vector<std::string> values;
        std::string cur;
        for (char ch : body) {
          if (ch == ',') {
            values.push_back(unquote(trim(cur)));
            cur.clear();
          } else {
            cur += ch;
          }
        }
        values.push_back(unquote(trim(cur)));
        std::sort(values.begin(), values.end());
        if (values != std::vector<std::string>{"0", "1"})
          throw ParseError("attribute '" + name +
                           "': only numeric and {0,1} nominal attributes are supported",
                           line_no);
        attr.nominal01 = true;
      } else {
        throw ParseError("attribute '" + name + "': unsupported type '" + type + "'",
                         line_no);
      }
      header.attributes.push_back(std::move(attr));
      continue;
    }
    throw ParseError("unexpected line before @data: '" + t + "'", line_no);
  }
  throw ParseError("missing @data section in " + path.string(), line_no);
}

double parse_attr_value(const ArffAttribute& attr, const std::string& cell, long line_no) {
  if (cell == "?")
    throw ParseError("missing value ('?') in attribute '" + attr.name +
                     "' is not supported", line_no);
  std::string v = unquote(cell);
  if (attr.nominal01) {
    if (v == "0") return 0.0;
    if (v == "1") return 1.0;
    throw ParseError("attribute '" + attr.name + "': nominal value '" + cell +
                     "' is not 0 or 1", line_no);
  }
  return parse_number(v, line_no);
}

}  // namespace

std::vector<std::string> arff_attribute_names(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  long line_no = 0;
  ArffHeader header = read_header(in, path, line_no);
  std::vector<std::string> names;
  names.reserve(header.attributes.size());
  for (const auto& a : header.attributes) names.push_back(a.name);
  return names;
}

Dataset parse_arff(const std::filesystem::path& path,
                   const std::vector<std::string>& label_names) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  long line_no = 0;
  ArffHeader header = read_header(in, path, line_no);
  const Index n_attrs = static_cast<Index>(header.attributes.size());
  if (n_attrs == 0) throw ParseError("no attributes declared in " + path.string());

  std::unordered_map<std::string, Index> attr_index;
  for (Index i = 0; i < n_attrs; ++i) attr_index.emplace(header.attributes[i].name, i);

  std::vector<Index> label_cols;
  std::vector<bool> is_label(static_cast<std::size_t>(n_attrs), false);
  for (const auto& name : label_names) {
    auto it = attr_index.find(name);
    if (it == attr_index.end())
      throw ParseError("label attribute '" + name + "' is not declared in " +
                       path.string());
    if (is_label[static_cast<std::size_t>(it->second)])
      throw ParseError("label attribute '" + name + "' listed twice");
    is_label[static_cast<std::size_t>(it->second)] = true;
    label_cols.push_back(it->second);
  }
  std::vector<Index> feature_cols;
  for (Index i = 0; i < n_attrs; ++i)
    if (!is_label[static_cast<std::size_t>(i)]) feature_cols.push_back(i);

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;

    std::vector<double> row(static_cast<std::size_t>(n_attrs), 0.0);
    if (t[0] == '{') {
      // Sparse row: {index value, index value, ...}; omitted entries are 0.
      if (t.back() != '}') throw ParseError("unterminated sparse row", line_no);
      std::string body = trim(t.substr(1, t.size() - 2));
      if (!body.empty()) {
        std::size_t start = 0;
        while (start <= body.size()) {
          std::size_t comma = body.find(',', start);
          std::string entry = trim(body.substr(
              start, comma == std::string::npos ? std::string::npos : comma - start));
          if (entry.empty()) throw ParseError("empty sparse entry", line_no);
          std::size_t sp = entry.find_first_of(" \t");
          if (sp == std::string::npos)
            throw ParseError("sparse entry '" + entry + "' missing a value", line_no);
          long idx = 0;
          const std::string idx_str = entry.substr(0, sp);
          auto [p, ec] = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
          if (ec != std::errc() || p != idx_str.data() + idx_str.size())
            throw ParseError("sparse entry index '" + idx_str + "' is not an integer",
                             line_no);
          if (idx < 0 || idx >= n_attrs)
            throw ParseError("sparse entry index " + std::to_string(idx) +
                             " out of range [0, " + std::to_string(n_attrs) + ")",
                             line_no);
          row[static_cast<std::size_t>(idx)] = parse_attr_value(
              header.attributes[static_cast<std::size_t>(idx)], trim(entry.substr(sp)),
              line_no);
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
      }
    } else {
      std::vector<std::string> cells;
      std::string cur;
      for (char ch : t) {
        if (ch == ',') {
          cells.push_back(trim(cur));
          cur.clear();
        } else {
          cur += ch;
        }
      }
      cells.push_back(trim(cur));
      if (static_cast<Index>(cells.size()) != n_attrs)
        throw ParseError("expected " + std::to_string(n_attrs) + " values, got " +
                         std::to_string(cells.size()), line_no);
      for (Index i = 0; i < n_attrs; ++i)
        row[static_cast<std::size_t>(i)] = parse_attr_value(
            header.attributes[static_cast<std::size_t>(i)],
            cells[static_cast<std::size_t>(i)], line_no);
    }
    rows.push_back(std::move(row));
  }

  Dataset ds;
  const Index n_rows = static_cast<Index>(rows.size());
  ds.features.resize(n_rows, static_cast<Index>(feature_cols.size()));
  ds.targets.resize(n_rows, static_cast<Index>(label_cols.size()));
  for (Index r = 0; r < n_rows; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    for (Index c = 0; c < ds.features.cols(); ++c)
      ds.features(r, c) = row[static_cast<std::size_t>(feature_cols[static_cast<std::size_t>(c)])];
    for (Index c = 0; c < ds.targets.cols(); ++c) {
      double v = row[static_cast<std::size_t>(label_cols[static_cast<std::size_t>(c)])];
      if (v != 0.0 && v != 1.0 && v != -1.0)
        throw ParseError("label attribute '" +
                         header.attributes[static_cast<std::size_t>(
                             label_cols[static_cast<std::size_t>(c)])].name +
                         "' has non-binary value");
      ds.targets(r, c) = (v == 0.0) ? -1.0 : v;
    }
  }
  for (Index c : feature_cols)
    ds.feature_names.push_back(header.attributes[static_cast<std::size_t>(c)].name);
  for (Index c : label_cols)
    ds.label_names.push_back(header.attributes[static_cast<std::size_t>(c)].name);
  return ds;
}

}  // namespace proelm
