#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pfnts/environment.hpp"

namespace pfnts::envs {

// Minimal RFC 4180 reader: comma separator, header row, double-quoted fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws SchemaError when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

// Classification data turned into a bandit: one arm per class, reward 1 for
// the row's class and 0 otherwise. Rows are played in file order.
class ClassificationEnv final : public Environment {
 public:
  static constexpr std::size_t kDefaultHorizonCap = 10'000;

  ClassificationEnv(std::string name, Matrix features, std::vector<std::size_t> labels,
                    std::size_t num_classes, std::size_t horizon_cap = kDefaultHorizonCap);

  std::string name() const override { return name_; }
  std::size_t num_arms() const override { return num_classes_; }
  std::size_t dim() const override { return static_cast<std::size_t>(features_.cols()); }
  std::size_t horizon_limit() const override { return horizon_; }

  Context context(std::size_t t) override;
  std::vector<double> arm_means(std::size_t t) override;
  double reward(std::size_t t, std::size_t arm) override;

  // 1 iff arm equals the label of row t; HorizonExhausted past the horizon.
  double classification_step(std::size_t t, std::size_t arm) const;

  const Matrix& features() const noexcept { return features_; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  void set_class_names(std::vector<std::string> names) { class_names_ = std::move(names); }

 private:
  void check_round(std::size_t t) const;

  std::string name_;
  Matrix features_;
  std::vector<std::size_t> labels_;
  std::size_t num_classes_;
  std::size_t horizon_;
  std::vector<std::string> class_names_;
};

// Reads a labelled table: numeric columns are z-scored with full-data mean
// and population SD (constant columns use SD 1), declared categorical columns
// are one-hot expanded in place (levels in first-appearance order), labels
// are mapped to 0..K-1 in first-appearance order. Row order is preserved.
ClassificationEnv ingest_csv(const std::filesystem::path& path, const std::string& label_column,
                             const std::vector<std::string>& categorical_columns,
                             std::size_t horizon_cap = ClassificationEnv::kDefaultHorizonCap);

ClassificationEnv ingest_table(const CsvTable& table, std::string name, const std::string& label_column,
                               const std::vector<std::string>& categorical_columns,
                               std::size_t horizon_cap = ClassificationEnv::kDefaultHorizonCap);

}  // namespace pfnts::envs
