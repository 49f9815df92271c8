#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tlf {

enum class AttributeKind { numeric, categorical };
enum class DomainTag { source, target };

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  std::vector<std::string> categories;  // categorical only, first-appearance order

  bool operator==(const AttributeSchema&) const = default;
};

using Schema = std::vector<AttributeSchema>;

// A labeled table. Categorical cells hold the category index as a double.
// Missing cells are tracked in an explicit mask; the stored value of a missing
// cell is unspecified and must not be read.
class Dataset {
 public:
  Dataset(Schema schema, Eigen::MatrixXd cells, std::vector<std::uint8_t> missing,
          std::vector<int> labels, std::vector<std::string> class_names,
          DomainTag domain = DomainTag::target, std::string label_name = "label");

  // Convenience for fully observed tables.
  Dataset(Schema schema, Eigen::MatrixXd cells, std::vector<int> labels,
          std::vector<std::string> class_names, DomainTag domain = DomainTag::target,
          std::string label_name = "label");

  std::size_t size() const noexcept { return static_cast<std::size_t>(cells_.rows()); }
  std::size_t dims() const noexcept { return schema_.size(); }
  std::size_t num_classes() const noexcept { return class_names_.size(); }

  const Schema& schema() const noexcept { return schema_; }
  const Eigen::MatrixXd& cells() const noexcept { return cells_; }
  double cell(std::size_t row, std::size_t col) const { return cells_(row, col); }
  bool is_missing(std::size_t row, std::size_t col) const {
    return !missing_.empty() && missing_[row * dims() + col] != 0;
  }
  bool has_missing() const noexcept { return !missing_.empty(); }
  std::size_t missing_count() const;
  const std::vector<std::uint8_t>& missing_mask() const noexcept { return missing_; }

  int label(std::size_t row) const { return labels_[row]; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const std::string& label_name() const noexcept { return label_name_; }
  DomainTag domain() const noexcept { return domain_; }

  bool all_numeric() const;

  // Rows in the given order (duplicates allowed).
  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_domain(DomainTag tag) const;

  bool operator==(const Dataset& other) const;

 private:
  Schema schema_;
  Eigen::MatrixXd cells_;
  std::vector<std::uint8_t> missing_;  // row-major n*d, empty when fully observed
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  DomainTag domain_;
  std::string label_name_;
};

struct CsvOptions {
  std::vector<std::string> missing_tokens{"?", ""};
  char delimiter = ',';
};

struct SplitSpec {
  double target_fraction = 0.05;
  std::uint64_t seed = 0;
};

enum class RepairMode { srd, impute };

// Reads a header-first CSV. Columns are numeric when every non-missing cell
// parses as a number, otherwise categorical. `schema_hint` entries override
// inference for the columns they name.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::optional<Schema>& schema_hint = std::nullopt,
                 const CsvOptions& options = {});
Dataset read_csv(std::istream& in, const std::string& label_column,
                 const std::optional<Schema>& schema_hint = std::nullopt,
                 const CsvOptions& options = {});

// Writes features followed by the label column. Missing cells become the
// first missing token.
void write_csv(const Dataset& ds, std::ostream& out, const CsvOptions& options = {});
void save_csv(const Dataset& ds, const std::filesystem::path& path,
              const CsvOptions& options = {});

// Sidecar format: one `column: numeric|categorical` per line, `#` comments.
Schema read_schema_sidecar(const std::filesystem::path& path);
Schema parse_schema_sidecar(std::istream& in);

Dataset one_hot_encode(const Dataset& ds);
std::size_t one_hot_width(const Schema& schema);
Schema one_hot_schema(const Schema& schema);

struct SplitResult {
  Dataset target;
  Dataset test;
};
SplitResult split_target(const Dataset& ds, const SplitSpec& spec);
std::size_t split_target_size(std::size_t n, double target_fraction);

Dataset repair_missing(const Dataset& ds, RepairMode mode);

Dataset inject_missing(const Dataset& ds, double record_ratio, std::uint64_t seed);
// Number of cells blanked in a record of `dims` attributes when y% is drawn.
std::size_t missing_cells_for(std::size_t dims, int y_percent);

// Re-indexes labels against `class_names`, which must contain every class of
// `ds`. Used to line a test file up with the training file's class order.
Dataset with_class_order(const Dataset& ds, const std::vector<std::string>& class_names);

// Stacks rows of `b` under `a`. Schemas and class names must match.
Dataset concat(const Dataset& a, const Dataset& b);

const char* to_string(AttributeKind kind);
const char* to_string(RepairMode mode);
RepairMode parse_repair_mode(const std::string& text);

}  // namespace tlf
