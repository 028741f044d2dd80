#include "pfnts/classification.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "pfnts/errors.hpp"

namespace pfnts::envs {

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        record.clear();
        field.clear();
        any = false;
        break;
      default:
        field.push_back(c);
        any = true;
    }
  }
  if (quoted) throw SchemaError("unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) throw SchemaError("CSV has no header row");

  CsvTable table;
  table.header = std::move(records.front());
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) table.header[0].erase(0, 3);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw SchemaError("row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                        " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

ClassificationEnv::ClassificationEnv(std::string name, Matrix features, std::vector<std::size_t> labels,
                                     std::size_t num_classes, std::size_t horizon_cap)
    : name_(std::move(name)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      horizon_(std::min<std::size_t>(labels_.size(), horizon_cap)) {
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw ParamError("features and labels differ in row count");
  }
  for (auto l : labels_) {
    if (l >= num_classes_) throw ParamError("label out of range");
  }
}

void ClassificationEnv::check_round(std::size_t t) const {
  if (t == 0 || t > horizon_) {
    throw HorizonExhausted("round " + std::to_string(t) + " beyond horizon " + std::to_string(horizon_));
  }
}

Context ClassificationEnv::context(std::size_t t) {
  check_round(t);
  return features_.row(static_cast<Eigen::Index>(t - 1)).transpose();
}

std::vector<double> ClassificationEnv::arm_means(std::size_t t) {
  check_round(t);
  std::vector<double> out(num_classes_, 0.0);
  out[labels_[t - 1]] = 1.0;
  return out;
}

double ClassificationEnv::classification_step(std::size_t t, std::size_t arm) const {
  check_round(t);
  if (arm >= num_classes_) throw ArmIndexError("arm out of range");
  return labels_[t - 1] == arm ? 1.0 : 0.0;
}

double ClassificationEnv::reward(std::size_t t, std::size_t arm) { return classification_step(t, arm); }

namespace {

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  std::string_view s(cell);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(row, column, "non-numeric value '" + cell + "'");
  }
  return v;
}

}  // namespace

ClassificationEnv ingest_table(const CsvTable& table, std::string name, const std::string& label_column,
                               const std::vector<std::string>& categorical_columns,
                               std::size_t horizon_cap) {
  const std::size_t label_idx = table.column(label_column);
  std::vector<bool> categorical(table.header.size(), false);
  for (const auto& c : categorical_columns) categorical[table.column(c)] = true;

  const std::size_t n = table.rows.size();
  std::vector<Vector> columns;

  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == label_idx) continue;
    if (categorical[c]) {
      std::vector<std::string> levels;
      std::unordered_map<std::string, std::size_t> index;
      for (const auto& row : table.rows) {
        if (index.emplace(row[c], levels.size()).second) levels.push_back(row[c]);
      }
      const std::size_t first = columns.size();
      for (std::size_t l = 0; l < levels.size(); ++l) columns.emplace_back(Vector::Zero(n));
      for (std::size_t r = 0; r < n; ++r) columns[first + index.at(table.rows[r][c])](r) = 1.0;
      continue;
    }
    Vector col(n);
    for (std::size_t r = 0; r < n; ++r) col(r) = parse_number(table.rows[r][c], r + 1, table.header[c]);
    if (n > 0) {
      const double mean = col.mean();
      double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n));
      if (sd == 0.0) sd = 1.0;
      col = (col.array() - mean) / sd;
    }
    columns.push_back(std::move(col));
  }

  Matrix features(n, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) features.col(j) = columns[j];

  std::vector<std::string> class_names;
  std::unordered_map<std::string, std::size_t> class_index;
  std::vector<std::size_t> labels;
  labels.reserve(n);
  for (const auto& row : table.rows) {
    const auto [it, inserted] = class_index.emplace(row[label_idx], class_names.size());
    if (inserted) class_names.push_back(row[label_idx]);
    labels.push_back(it->second);
  }
  ClassificationEnv env(std::move(name), std::move(features), std::move(labels), class_names.size(),
                        horizon_cap);
  env.set_class_names(std::move(class_names));
  return env;
}

ClassificationEnv ingest_csv(const std::filesystem::path& path, const std::string& label_column,
                             const std::vector<std::string>& categorical_columns, std::size_t horizon_cap) {
  return ingest_table(read_csv(path), path.stem().string(), label_column, categorical_columns, horizon_cap);
}

}  // namespace pfnts::envs
