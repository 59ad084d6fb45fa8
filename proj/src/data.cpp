#include "rror/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rror/error.hpp"

namespace rror {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_constant_column(const MatrixXd& covariates) {
  if (covariates.cols() < 1)
    throw InputError("covariate matrix needs at least the constant column");
  for (Index t = 0; t < covariates.rows(); ++t) {
    if (covariates(t, 0) != 1.0)
      throw InputError("first covariate column must be identically 1 (period " +
                       std::to_string(t + 1) + ")");
  }
  if (!covariates.allFinite()) throw InputError("covariates contain non-finite values");
}

std::vector<std::string> default_names(Index n) {
  std::vector<std::string> names{"const"};
  for (Index i = 1; i < n; ++i) names.push_back("c" + std::to_string(i + 1));
  return names;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

Table read_table(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  Table table;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw InputError(source + ": row " + std::to_string(table.rows.size() + 1) +
                       " (line " + std::to_string(line_no) + ") has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw InputError(source + ": missing header row");
  return table;
}

std::size_t column_index(const Table& table, const std::string& name,
                         const std::string& source) {
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == name) return i;
  throw InputError(source + ": missing column '" + name + "'");
}

// Empty cells map to `missing` when given, otherwise they are an error.
double parse_cell(const std::string& cell, std::size_t row, const std::string& column,
                  const std::string& source, std::optional<double> missing = std::nullopt) {
  if (cell.empty()) {
    if (missing) return *missing;
    throw InputError(source + ": empty cell in column '" + column + "' at row " +
                     std::to_string(row));
  }
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw InputError(source + ": non-numeric value '" + cell + "' in column '" + column +
                     "' at row " + std::to_string(row));
  }
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ObservationSet::ObservationSet(VectorXd prices, VectorXd dividends, MatrixXd covariates,
                               std::vector<std::string> covariate_names,
                               std::vector<std::string> labels)
    : prices_(std::move(prices)),
      dividends_(std::move(dividends)),
      covariates_(std::move(covariates)),
      covariate_names_(std::move(covariate_names)),
      labels_(std::move(labels)) {
  const Index T = dividends_.size();
  if (T < 1) throw InputError("need at least one period (T >= 1)");
  if (prices_.size() != T + 1)
    throw InputError("length mismatch: " + std::to_string(prices_.size()) +
                     " prices for " + std::to_string(T) + " dividends (expected T+1 prices)");
  if (covariates_.rows() != T)
    throw InputError("length mismatch: covariate matrix has " +
                     std::to_string(covariates_.rows()) + " rows, expected " +
                     std::to_string(T));
  for (Index t = 0; t <= T; ++t) {
    if (!std::isfinite(prices_(t)) || prices_(t) <= 0.0)
      throw InputError("non-positive price at period " + std::to_string(t));
  }
  for (Index t = 0; t < T; ++t) {
    if (!std::isfinite(dividends_(t)) || dividends_(t) < 0.0)
      throw InputError("negative dividend at period " + std::to_string(t + 1));
  }
  check_constant_column(covariates_);
  if (covariate_names_.empty()) covariate_names_ = default_names(covariates_.cols());
  if (static_cast<Index>(covariate_names_.size()) != covariates_.cols())
    throw InputError("covariate name count does not match covariate columns");
  if (!labels_.empty() && static_cast<Index>(labels_.size()) != T)
    throw InputError("label count must equal T");
}

ObservationSet::ObservationSet(VectorXd prices, VectorXd dividends)
    : ObservationSet(prices, dividends, MatrixXd::Ones(dividends.size(), 1)) {}

PrivateObservationSet::PrivateObservationSet(VectorXd book_growth, VectorXd div_to_book,
                                             MatrixXd covariates, bool paying,
                                             std::vector<std::string> covariate_names,
                                             std::vector<std::string> labels)
    : book_growth_(std::move(book_growth)),
      div_to_book_(std::move(div_to_book)),
      covariates_(std::move(covariates)),
      paying_(paying),
      covariate_names_(std::move(covariate_names)),
      labels_(std::move(labels)) {
  const Index T = book_growth_.size();
  if (T < 1) throw InputError("need at least one period (T >= 1)");
  if (paying_) {
    if (div_to_book_.size() != T)
      throw InputError("length mismatch: " + std::to_string(div_to_book_.size()) +
                       " dividend-to-book values for " + std::to_string(T) + " periods");
    for (Index t = 0; t < T; ++t) {
      if (!std::isfinite(div_to_book_(t)) || div_to_book_(t) < 0.0)
        throw InputError("negative dividend-to-book ratio at period " +
                         std::to_string(t + 1));
    }
  } else if (div_to_book_.size() != 0) {
    throw InputError("non-paying company must not carry dividend-to-book ratios");
  }
  for (Index t = 0; t < T; ++t) {
    if (!std::isfinite(book_growth_(t)) || book_growth_(t) <= -1.0)
      throw InputError("book growth must exceed -1 (period " + std::to_string(t + 1) + ")");
  }
  if (covariates_.rows() != T)
    throw InputError("length mismatch: covariate matrix has " +
                     std::to_string(covariates_.rows()) + " rows, expected " +
                     std::to_string(T));
  check_constant_column(covariates_);
  if (covariate_names_.empty()) covariate_names_ = default_names(covariates_.cols());
  if (static_cast<Index>(covariate_names_.size()) != covariates_.cols())
    throw InputError("covariate name count does not match covariate columns");
  if (!labels_.empty() && static_cast<Index>(labels_.size()) != T)
    throw InputError("label count must equal T");
}

ObservationSet parse_public_csv(const std::string& text, const PublicCsvSchema& schema,
                                const std::string& source) {
  const Table table = read_table(text, source);
  const std::size_t rows = table.rows.size();
  if (rows < 2) throw InputError(source + ": need at least two price rows (T >= 1)");
  const Index T = static_cast<Index>(rows) - 1;

  const std::size_t price_col = column_index(table, schema.price_column, source);
  std::optional<std::size_t> div_col;
  if (schema.dividend_column) {
    // An absent dividend column means a non-dividend-paying stock.
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == *schema.dividend_column) div_col = i;
  }
  std::vector<std::size_t> cov_cols;
  for (const auto& name : schema.covariate_columns)
    cov_cols.push_back(column_index(table, name, source));
  std::optional<std::size_t> label_col;
  if (schema.label_column) label_col = column_index(table, *schema.label_column, source);

  VectorXd prices(T + 1);
  VectorXd dividends = VectorXd::Zero(T);
  MatrixXd covariates = MatrixXd::Ones(T, 1 + static_cast<Index>(cov_cols.size()));
  std::vector<std::string> labels;

  for (std::size_t r = 0; r < rows; ++r) {
    const auto& cells = table.rows[r];
    const std::size_t row_no = r + 1;
    const double price = parse_cell(cells[price_col], row_no, schema.price_column, source);
    if (price <= 0.0)
      throw InputError(source + ": non-positive price " + cells[price_col] + " at row " +
                       std::to_string(row_no));
    prices(static_cast<Index>(r)) = price;
    if (r == 0) continue;
    const Index t = static_cast<Index>(r) - 1;
    if (div_col) {
      const double d =
          parse_cell(cells[*div_col], row_no, *schema.dividend_column, source, 0.0);
      if (d < 0.0)
        throw InputError(source + ": negative dividend at row " + std::to_string(row_no));
      dividends(t) = d;
    }
    for (std::size_t j = 0; j < cov_cols.size(); ++j) {
      covariates(t, static_cast<Index>(j) + 1) =
          parse_cell(cells[cov_cols[j]], row_no, schema.covariate_columns[j], source);
    }
    if (label_col) labels.push_back(cells[*label_col]);
  }
  std::vector<std::string> names{"const"};
  names.insert(names.end(), schema.covariate_columns.begin(), schema.covariate_columns.end());
  return ObservationSet(std::move(prices), std::move(dividends), std::move(covariates),
                        std::move(names), std::move(labels));
}

PrivateObservationSet parse_private_csv(const std::string& text,
                                        const PrivateCsvSchema& schema,
                                        const std::string& source) {
  const Table table = read_table(text, source);
  const std::size_t rows = table.rows.size();
  if (rows < 1) throw InputError(source + ": no data rows");
  const Index T = static_cast<Index>(rows);

  const std::size_t growth_col = column_index(table, schema.growth_column, source);
  std::optional<std::size_t> dtb_col;
  if (schema.div_to_book_column)
    dtb_col = column_index(table, *schema.div_to_book_column, source);
  std::vector<std::size_t> cov_cols;
  for (const auto& name : schema.covariate_columns)
    cov_cols.push_back(column_index(table, name, source));
  std::optional<std::size_t> label_col;
  if (schema.label_column) label_col = column_index(table, *schema.label_column, source);

  VectorXd growth(T);
  VectorXd dtb = dtb_col ? VectorXd(VectorXd::Zero(T)) : VectorXd();
  MatrixXd covariates = MatrixXd::Ones(T, 1 + static_cast<Index>(cov_cols.size()));
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& cells = table.rows[r];
    const std::size_t row_no = r + 1;
    const Index t = static_cast<Index>(r);
    growth(t) = parse_cell(cells[growth_col], row_no, schema.growth_column, source);
    if (growth(t) <= -1.0)
      throw InputError(source + ": book growth must exceed -1 at row " +
                       std::to_string(row_no));
    if (dtb_col) {
      dtb(t) = parse_cell(cells[*dtb_col], row_no, *schema.div_to_book_column, source, 0.0);
      if (dtb(t) < 0.0)
        throw InputError(source + ": negative dividend-to-book ratio at row " +
                         std::to_string(row_no));
    }
    for (std::size_t j = 0; j < cov_cols.size(); ++j) {
      covariates(t, static_cast<Index>(j) + 1) =
          parse_cell(cells[cov_cols[j]], row_no, schema.covariate_columns[j], source);
    }
    if (label_col) labels.push_back(cells[*label_col]);
  }
  std::vector<std::string> names{"const"};
  names.insert(names.end(), schema.covariate_columns.begin(), schema.covariate_columns.end());
  const bool paying = dtb_col.has_value();
  return PrivateObservationSet(std::move(growth), std::move(dtb), std::move(covariates),
                               paying, std::move(names), std::move(labels));
}

ObservationSet load_public_csv(const std::string& path, const PublicCsvSchema& schema) {
  return parse_public_csv(read_file(path), schema, path);
}

PrivateObservationSet load_private_csv(const std::string& path,
                                       const PrivateCsvSchema& schema) {
  return parse_private_csv(read_file(path), schema, path);
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string write_public_csv(const ObservationSet& obs) {
  std::ostringstream out;
  const bool labelled = !obs.labels().empty();
  if (labelled) out << "label,";
  out << "price,dividend";
  for (Index j = 1; j < obs.num_covariates(); ++j) out << ',' << obs.covariate_names()[j];
  out << '\n';
  for (Index r = 0; r <= obs.periods(); ++r) {
    if (labelled) out << (r == 0 ? std::string() : obs.labels()[r - 1]) << ',';
    out << format_double(obs.prices()(r)) << ',';
    if (r > 0) out << format_double(obs.dividends()(r - 1));
    for (Index j = 1; j < obs.num_covariates(); ++j) {
      out << ',';
      if (r > 0) out << format_double(obs.covariates()(r - 1, j));
    }
    out << '\n';
  }
  return out.str();
}

std::string write_private_csv(const PrivateObservationSet& obs) {
  std::ostringstream out;
  const bool labelled = !obs.labels().empty();
  if (labelled) out << "label,";
  out << "book_growth";
  if (obs.paying()) out << ",div_to_book";
  for (Index j = 1; j < obs.num_covariates(); ++j) out << ',' << obs.covariate_names()[j];
  out << '\n';
  for (Index t = 0; t < obs.periods(); ++t) {
    if (labelled) out << obs.labels()[t] << ',';
    out << format_double(obs.book_growth()(t));
    if (obs.paying()) out << ',' << format_double(obs.div_to_book()(t));
    for (Index j = 1; j < obs.num_covariates(); ++j)
      out << ',' << format_double(obs.covariates()(t, j));
    out << '\n';
  }
  return out.str();
}

VectorXd realized_returns(const ObservationSet& obs) {
  const Index T = obs.periods();
  const auto& p = obs.prices();
  return (p.tail(T) + obs.dividends()).cwiseQuotient(p.head(T)).array() - 1.0;
}

}  // namespace rror
