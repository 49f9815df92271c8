#include "tlf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tlf/errors.hpp"

namespace tlf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

struct CsvReader {
  std::istream& in;
  char delimiter;
  std::size_t line = 0;  // physical line of the last character consumed

  // Returns false at end of input. `start_line` receives the line on which the
  // record began. Quoted fields may span lines.
  bool next(std::vector<std::string>& fields, std::vector<bool>& quoted,
            std::size_t& start_line) {
    fields.clear();
    quoted.clear();
    std::string raw;
    while (true) {
      if (!std::getline(in, raw)) return false;
      ++line;
      if (!trim(raw).empty()) break;
    }
    start_line = line;
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    std::size_t i = 0;
    while (true) {
      if (i == raw.size()) {
        if (in_quotes) {
          std::string more;
          if (!std::getline(in, more)) {
            throw ParseError("unterminated quoted field", start_line);
          }
          ++line;
          field.push_back('\n');
          raw = std::move(more);
          i = 0;
          continue;
        }
        break;
      }
      const char c = raw[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < raw.size() && raw[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && trim(field).empty()) {
        field.clear();
        in_quotes = true;
        was_quoted = true;
      } else if (c == delimiter) {
        fields.push_back(was_quoted ? field : std::string(trim(field)));
        quoted.push_back(was_quoted);
        field.clear();
        was_quoted = false;
      } else {
        field.push_back(c);
      }
      ++i;
    }
    fields.push_back(was_quoted ? field : std::string(trim(field)));
    quoted.push_back(was_quoted);
    return true;
  }
};

bool needs_quotes(std::string_view s, char delimiter) {
  return s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos ||
         (!s.empty() && (s.front() == ' ' || s.back() == ' '));
}

void write_field(std::ostream& out, std::string_view s, char delimiter) {
  if (!needs_quotes(s, delimiter)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

int mode_index(std::span<const std::size_t> counts) {
  // ties resolve to the lowest index
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(Schema schema, Eigen::MatrixXd cells, std::vector<std::uint8_t> missing,
                 std::vector<int> labels, std::vector<std::string> class_names,
                 DomainTag domain, std::string label_name)
    : schema_(std::move(schema)),
      cells_(std::move(cells)),
      missing_(std::move(missing)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)),
      domain_(domain),
      label_name_(std::move(label_name)) {
  const auto n = static_cast<std::size_t>(cells_.rows());
  const auto d = schema_.size();
  if (n == 0) throw DataError("dataset must contain at least one record");
  if (static_cast<std::size_t>(cells_.cols()) != d) {
    throw SchemaError("cell matrix has " + std::to_string(cells_.cols()) +
                      " columns but schema has " + std::to_string(d));
  }
  if (labels_.size() != n) throw SchemaError("label count does not match record count");
  if (class_names_.empty()) throw SchemaError("dataset has no class names");
  {
    std::set<std::string> names;
    for (const auto& a : schema_) {
      if (!names.insert(a.name).second) throw SchemaError("duplicate attribute name: " + a.name);
      if (a.kind == AttributeKind::categorical && a.categories.empty()) {
        throw SchemaError("categorical attribute without categories: " + a.name);
      }
    }
    if (names.count(label_name_) != 0) {
      throw SchemaError("label column name collides with an attribute: " + label_name_);
    }
  }
  for (int y : labels_) {
    if (y < 0 || static_cast<std::size_t>(y) >= class_names_.size()) {
      throw SchemaError("label index out of range");
    }
  }
  if (!missing_.empty()) {
    if (missing_.size() != n * d) throw SchemaError("missing mask has the wrong size");
    if (std::none_of(missing_.begin(), missing_.end(), [](auto m) { return m != 0; })) {
      missing_.clear();
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const auto& a = schema_[j];
    for (std::size_t i = 0; i < n; ++i) {
      if (is_missing(i, j)) {
        cells_(i, j) = 0.0;
        continue;
      }
      const double v = cells_(i, j);
      if (!std::isfinite(v)) {
        throw DataError("non-finite value in observed cell of attribute " + a.name);
      }
      if (a.kind == AttributeKind::categorical) {
        if (v != std::floor(v) || v < 0 || v >= static_cast<double>(a.categories.size())) {
          throw SchemaError("invalid category index in attribute " + a.name);
        }
      }
    }
  }
}

Dataset::Dataset(Schema schema, Eigen::MatrixXd cells, std::vector<int> labels,
                 std::vector<std::string> class_names, DomainTag domain, std::string label_name)
    : Dataset(std::move(schema), std::move(cells), {}, std::move(labels),
              std::move(class_names), domain, std::move(label_name)) {}

std::size_t Dataset::missing_count() const {
  return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), 1));
}

bool Dataset::all_numeric() const {
  return std::all_of(schema_.begin(), schema_.end(),
                     [](const auto& a) { return a.kind == AttributeKind::numeric; });
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  const auto d = dims();
  Eigen::MatrixXd cells(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  std::vector<int> labels;
  labels.reserve(rows.size());
  std::vector<std::uint8_t> missing;
  if (has_missing()) missing.resize(rows.size() * d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = rows[r];
    if (src >= size()) throw DataError("subset row index out of range");
    cells.row(static_cast<Eigen::Index>(r)) = cells_.row(static_cast<Eigen::Index>(src));
    labels.push_back(labels_[src]);
    if (has_missing()) {
      std::copy_n(missing_.begin() + static_cast<std::ptrdiff_t>(src * d), d,
                  missing.begin() + static_cast<std::ptrdiff_t>(r * d));
    }
  }
  return Dataset(schema_, std::move(cells), std::move(missing), std::move(labels),
                 class_names_, domain_, label_name_);
}

Dataset Dataset::with_domain(DomainTag tag) const {
  Dataset copy = *this;
  copy.domain_ = tag;
  return copy;
}

bool Dataset::operator==(const Dataset& other) const {
  if (schema_ != other.schema_ || labels_ != other.labels_ ||
      class_names_ != other.class_names_ || domain_ != other.domain_ ||
      label_name_ != other.label_name_ || missing_ != other.missing_) {
    return false;
  }
  return cells_.rows() == other.cells_.rows() && cells_ == other.cells_;
}

// ---------------------------------------------------------------------------
// CSV

Dataset read_csv(std::istream& in, const std::string& label_column,
                 const std::optional<Schema>& schema_hint, const CsvOptions& options) {
  CsvReader reader{in, options.delimiter};
  std::vector<std::string> header;
  std::vector<bool> quoted;
  std::size_t line = 0;
  if (!reader.next(header, quoted, line)) throw ParseError("missing header row", 1);
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw SchemaError("unknown label column: " + label_column);
  const auto label_pos = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t width = header.size();

  auto is_missing_token = [&](const std::string& field, bool was_quoted) {
    if (was_quoted && !field.empty()) return false;
    return std::find(options.missing_tokens.begin(), options.missing_tokens.end(), field) !=
           options.missing_tokens.end();
  };

  std::vector<std::vector<std::string>> rows;
  std::vector<std::vector<std::uint8_t>> row_missing;
  std::vector<std::size_t> row_lines;
  std::vector<std::string> fields;
  while (reader.next(fields, quoted, line)) {
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields but found " +
                           std::to_string(fields.size()),
                       line);
    }
    std::vector<std::uint8_t> miss(width);
    for (std::size_t j = 0; j < width; ++j) miss[j] = is_missing_token(fields[j], quoted[j]);
    if (miss[label_pos]) throw ParseError("missing class label", line);
    rows.push_back(fields);
    row_missing.push_back(std::move(miss));
    row_lines.push_back(line);
  }
  if (rows.empty()) throw DataError("CSV contains no records");

  std::map<std::string, const AttributeSchema*> hints;
  if (schema_hint) {
    for (const auto& a : *schema_hint) hints[a.name] = &a;
  }

  Schema schema;
  std::vector<std::size_t> columns;
  for (std::size_t j = 0; j < width; ++j) {
    if (j == label_pos) continue;
    columns.push_back(j);
    AttributeSchema attr;
    attr.name = header[j];
    if (auto h = hints.find(attr.name); h != hints.end()) {
      attr.kind = h->second->kind;
      attr.categories = h->second->categories;
    } else {
      bool numeric = true;
      for (std::size_t i = 0; i < rows.size() && numeric; ++i) {
        if (!row_missing[i][j] && !parse_number(rows[i][j])) numeric = false;
      }
      attr.kind = numeric ? AttributeKind::numeric : AttributeKind::categorical;
    }
    schema.push_back(std::move(attr));
  }

  const auto n = rows.size();
  const auto d = schema.size();
  Eigen::MatrixXd cells = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(d));
  std::vector<std::uint8_t> missing(n * d, 0);
  for (std::size_t k = 0; k < d; ++k) {
    auto& attr = schema[k];
    const auto j = columns[k];
    std::unordered_map<std::string, int> index;
    for (std::size_t c = 0; c < attr.categories.size(); ++c) {
      index.emplace(attr.categories[c], static_cast<int>(c));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (row_missing[i][j]) {
        missing[i * d + k] = 1;
        continue;
      }
      const auto& text = rows[i][j];
      if (attr.kind == AttributeKind::numeric) {
        auto v = parse_number(text);
        if (!v) throw ParseError("non-numeric value '" + text + "' in " + attr.name, row_lines[i]);
        if (!std::isfinite(*v)) {
          throw ParseError("non-finite value '" + text + "' in " + attr.name, row_lines[i]);
        }
        cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = *v;
      } else {
        auto [it, inserted] = index.emplace(text, static_cast<int>(attr.categories.size()));
        if (inserted) attr.categories.push_back(text);
        cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = it->second;
      }
    }
  }

  std::vector<std::string> class_names;
  std::unordered_map<std::string, int> class_index;
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& name = rows[i][label_pos];
    auto [it, inserted] = class_index.emplace(name, static_cast<int>(class_names.size()));
    if (inserted) class_names.push_back(name);
    labels.push_back(it->second);
  }

  return Dataset(std::move(schema), std::move(cells), std::move(missing), std::move(labels),
                 std::move(class_names), DomainTag::target, label_column);
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::optional<Schema>& schema_hint, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in, label_column, schema_hint, options);
}

void write_csv(const Dataset& ds, std::ostream& out, const CsvOptions& options) {
  const std::string missing_token =
      options.missing_tokens.empty() ? std::string("?") : options.missing_tokens.front();
  const char delim = options.delimiter;
  for (const auto& a : ds.schema()) {
    write_field(out, a.name, delim);
    out << delim;
  }
  write_field(out, ds.label_name(), delim);
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dims(); ++j) {
      if (ds.is_missing(i, j)) {
        out << missing_token;
      } else if (ds.schema()[j].kind == AttributeKind::numeric) {
        out << format_number(ds.cell(i, j));
      } else {
        write_field(out, ds.schema()[j].categories[static_cast<std::size_t>(ds.cell(i, j))], delim);
      }
      out << delim;
    }
    write_field(out, ds.class_names()[static_cast<std::size_t>(ds.label(i))], delim);
    out << '\n';
  }
}

void save_csv(const Dataset& ds, const std::filesystem::path& path, const CsvOptions& options) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(ds, out, options);
}

Schema parse_schema_sidecar(std::istream& in) {
  Schema schema;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ParseError("expected 'column: kind'", line);
    const auto name = trim(text.substr(0, colon));
    const auto kind = trim(text.substr(colon + 1));
    AttributeSchema attr;
    attr.name = std::string(name);
    if (kind == "numeric") {
      attr.kind = AttributeKind::numeric;
    } else if (kind == "categorical") {
      attr.kind = AttributeKind::categorical;
    } else {
      throw ParseError("unknown attribute kind '" + std::string(kind) + "'", line);
    }
    schema.push_back(std::move(attr));
  }
  return schema;
}

Schema read_schema_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_schema_sidecar(in);
}

// ---------------------------------------------------------------------------
// Encoding

std::size_t one_hot_width(const Schema& schema) {
  std::size_t width = 0;
  for (const auto& a : schema) {
    width += a.kind == AttributeKind::numeric ? 1 : a.categories.size();
  }
  return width;
}

Schema one_hot_schema(const Schema& schema) {
  Schema out;
  out.reserve(one_hot_width(schema));
  for (const auto& a : schema) {
    if (a.kind == AttributeKind::numeric) {
      out.push_back(a);
      continue;
    }
    for (const auto& c : a.categories) {
      out.push_back({a.name + "=" + c, AttributeKind::numeric, {}});
    }
  }
  return out;
}

Dataset one_hot_encode(const Dataset& ds) {
  if (ds.has_missing()) throw PreconditionError("one_hot_encode requires a dataset without missing cells");
  if (ds.all_numeric()) return ds;
  const auto n = static_cast<Eigen::Index>(ds.size());
  Eigen::MatrixXd cells = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(one_hot_width(ds.schema())));
  Eigen::Index out = 0;
  for (std::size_t j = 0; j < ds.dims(); ++j) {
    const auto& a = ds.schema()[j];
    const auto col = static_cast<Eigen::Index>(j);
    if (a.kind == AttributeKind::numeric) {
      cells.col(out++) = ds.cells().col(col);
      continue;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      cells(i, out + static_cast<Eigen::Index>(ds.cells()(i, col))) = 1.0;
    }
    out += static_cast<Eigen::Index>(a.categories.size());
  }
  return Dataset(one_hot_schema(ds.schema()), std::move(cells), ds.labels(), ds.class_names(),
                 ds.domain(), ds.label_name());
}

// ---------------------------------------------------------------------------
// Splitting and missing values

std::size_t split_target_size(std::size_t n, double target_fraction) {
  auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * target_fraction));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

SplitResult split_target(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.target_fraction > 0.0 && spec.target_fraction < 1.0)) {
    throw PreconditionError("target fraction must lie in (0, 1)");
  }
  const auto n = ds.size();
  if (n < 2) throw DataError("split_target needs at least 2 records");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto k = split_target_size(n, spec.target_fraction);
  std::vector<std::size_t> target(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  std::sort(target.begin(), target.end());
  std::sort(test.begin(), test.end());
  return {ds.subset(target), ds.subset(test)};
}

Dataset repair_missing(const Dataset& ds, RepairMode mode) {
  if (!ds.has_missing()) return ds;
  const auto n = ds.size();
  const auto d = ds.dims();
  if (mode == RepairMode::srd) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
      bool complete = true;
      for (std::size_t j = 0; j < d && complete; ++j) complete = !ds.is_missing(i, j);
      if (complete) keep.push_back(i);
    }
    if (keep.empty()) throw DataError("deleting records with missing values left no records");
    return ds.subset(keep);
  }

  Eigen::MatrixXd cells = ds.cells();
  for (std::size_t j = 0; j < d; ++j) {
    const auto& a = ds.schema()[j];
    const auto col = static_cast<Eigen::Index>(j);
    double fill = 0.0;
    if (a.kind == AttributeKind::numeric) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!ds.is_missing(i, j)) {
          sum += ds.cell(i, j);
          ++count;
        }
      }
      if (count == 0) throw DataError("attribute " + a.name + " has no observed values to impute from");
      fill = sum / static_cast<double>(count);
    } else {
      std::vector<std::size_t> counts(a.categories.size(), 0);
      std::size_t observed = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!ds.is_missing(i, j)) {
          ++counts[static_cast<std::size_t>(ds.cell(i, j))];
          ++observed;
        }
      }
      if (observed == 0) throw DataError("attribute " + a.name + " has no observed values to impute from");
      fill = mode_index(counts);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (ds.is_missing(i, j)) cells(static_cast<Eigen::Index>(i), col) = fill;
    }
  }
  return Dataset(ds.schema(), std::move(cells), ds.labels(), ds.class_names(), ds.domain(),
                 ds.label_name());
}

std::size_t missing_cells_for(std::size_t dims, int y_percent) {
  const auto k = static_cast<std::size_t>(
      std::llround(static_cast<double>(dims) * static_cast<double>(y_percent) / 100.0));
  return std::clamp<std::size_t>(k, 1, dims);
}

Dataset inject_missing(const Dataset& ds, double record_ratio, std::uint64_t seed) {
  if (!(record_ratio >= 0.0 && record_ratio <= 0.5)) {
    throw PreconditionError("missing-record ratio must lie in [0, 0.5]");
  }
  const auto n = ds.size();
  const auto d = ds.dims();
  const auto chosen =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * record_ratio));
  if (chosen == 0 || d == 0) return ds;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> records(n);
  std::iota(records.begin(), records.end(), 0);
  std::shuffle(records.begin(), records.end(), rng);

  std::vector<std::uint8_t> missing = ds.missing_mask();
  if (missing.empty()) missing.assign(n * d, 0);
  std::uniform_int_distribution<int> percent(1, 50);
  std::vector<std::size_t> columns(d);
  for (std::size_t r = 0; r < chosen; ++r) {
    const auto row = records[r];
    const auto blank = missing_cells_for(d, percent(rng));
    std::iota(columns.begin(), columns.end(), 0);
    std::shuffle(columns.begin(), columns.end(), rng);
    for (std::size_t c = 0; c < blank; ++c) missing[row * d + columns[c]] = 1;
  }
  return Dataset(ds.schema(), ds.cells(), std::move(missing), ds.labels(), ds.class_names(),
                 ds.domain(), ds.label_name());
}

Dataset with_class_order(const Dataset& ds, const std::vector<std::string>& class_names) {
  std::vector<int> remap(ds.num_classes(), -1);
  for (std::size_t c = 0; c < ds.num_classes(); ++c) {
    const auto it = std::find(class_names.begin(), class_names.end(), ds.class_names()[c]);
    if (it == class_names.end()) throw SchemaError("class '" + ds.class_names()[c] + "' is not known");
    remap[c] = static_cast<int>(it - class_names.begin());
  }
  std::vector<int> labels;
  labels.reserve(ds.size());
  for (int y : ds.labels()) labels.push_back(remap[static_cast<std::size_t>(y)]);
  return Dataset(ds.schema(), ds.cells(), ds.missing_mask(), std::move(labels), class_names, ds.domain(),
                 ds.label_name());
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.schema() != b.schema()) throw SchemaError("cannot concatenate datasets with different schemas");
  if (a.class_names() != b.class_names()) {
    throw SchemaError("cannot concatenate datasets with different class sets");
  }
  const auto n = a.size() + b.size();
  const auto d = a.dims();
  Eigen::MatrixXd cells(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  cells.topRows(static_cast<Eigen::Index>(a.size())) = a.cells();
  cells.bottomRows(static_cast<Eigen::Index>(b.size())) = b.cells();
  std::vector<int> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  std::vector<std::uint8_t> missing;
  if (a.has_missing() || b.has_missing()) {
    missing.assign(n * d, 0);
    if (a.has_missing()) std::copy(a.missing_mask().begin(), a.missing_mask().end(), missing.begin());
    if (b.has_missing()) {
      std::copy(b.missing_mask().begin(), b.missing_mask().end(),
                missing.begin() + static_cast<std::ptrdiff_t>(a.size() * d));
    }
  }
  return Dataset(a.schema(), std::move(cells), std::move(missing), std::move(labels),
                 a.class_names(), a.domain(), a.label_name());
}

const char* to_string(AttributeKind kind) {
  return kind == AttributeKind::numeric ? "numeric" : "categorical";
}

const char* to_string(RepairMode mode) { return mode == RepairMode::srd ? "srd" : "impute"; }

RepairMode parse_repair_mode(const std::string& text) {
  if (text == "srd") return RepairMode::srd;
  if (text == "impute") return RepairMode::impute;
  throw UsageError("unknown missing-value mode '" + text + "' (expected srd or impute)");
}

}  // namespace tlf
