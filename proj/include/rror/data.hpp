#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace rror {

// Prices P_0..P_T, dividends d_1..d_T and the T x n covariate matrix whose
// first column is identically one. Validated on construction, immutable after.
class ObservationSet {
 public:
  ObservationSet(Eigen::VectorXd prices, Eigen::VectorXd dividends,
                 Eigen::MatrixXd covariates,
                 std::vector<std::string> covariate_names = {},
                 std::vector<std::string> labels = {});

  // Constant-covariate convenience constructor.
  ObservationSet(Eigen::VectorXd prices, Eigen::VectorXd dividends);

  Eigen::Index periods() const { return dividends_.size(); }
  Eigen::Index num_covariates() const { return covariates_.cols(); }
  const Eigen::VectorXd& prices() const { return prices_; }
  const Eigen::VectorXd& dividends() const { return dividends_; }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Eigen::VectorXd prices_;
  Eigen::VectorXd dividends_;
  Eigen::MatrixXd covariates_;
  std::vector<std::string> covariate_names_;
  std::vector<std::string> labels_;
};

// Book growth b_t, dividend-to-book Delta_t (empty for a non-paying company)
// and covariates, all indexed t = 1..T.
class PrivateObservationSet {
 public:
  PrivateObservationSet(Eigen::VectorXd book_growth, Eigen::VectorXd div_to_book,
                        Eigen::MatrixXd covariates, bool paying,
                        std::vector<std::string> covariate_names = {},
                        std::vector<std::string> labels = {});

  Eigen::Index periods() const { return book_growth_.size(); }
  Eigen::Index num_covariates() const { return covariates_.cols(); }
  bool paying() const { return paying_; }
  const Eigen::VectorXd& book_growth() const { return book_growth_; }
  const Eigen::VectorXd& div_to_book() const { return div_to_book_; }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Eigen::VectorXd book_growth_;
  Eigen::VectorXd div_to_book_;
  Eigen::MatrixXd covariates_;
  bool paying_;
  std::vector<std::string> covariate_names_;
  std::vector<std::string> labels_;
};

// Column mapping for the public-company file. One row per period t = 0..T;
// the dividend and covariate cells of the first row are ignored.
struct PublicCsvSchema {
  std::string price_column = "price";
  std::optional<std::string> dividend_column = "dividend";
  std::vector<std::string> covariate_columns;
  std::optional<std::string> label_column;
};

// Column mapping for the private-company file, one row per period t = 1..T.
// No dividend-to-book column means a non-paying company.
struct PrivateCsvSchema {
  std::string growth_column = "book_growth";
  std::optional<std::string> div_to_book_column = "div_to_book";
  std::vector<std::string> covariate_columns;
  std::optional<std::string> label_column;
};

ObservationSet load_public_csv(const std::string& path, const PublicCsvSchema& schema);
PrivateObservationSet load_private_csv(const std::string& path,
                                       const PrivateCsvSchema& schema);

// Parsing from in-memory text; `source` only names the input in messages.
ObservationSet parse_public_csv(const std::string& text, const PublicCsvSchema& schema,
                                const std::string& source = "<memory>");
PrivateObservationSet parse_private_csv(const std::string& text,
                                        const PrivateCsvSchema& schema,
                                        const std::string& source = "<memory>");

// Writers emit shortest round-trip decimal representations, so
// parse(write(x)) reproduces every double bit-exactly.
std::string write_public_csv(const ObservationSet& obs);
std::string write_private_csv(const PrivateObservationSet& obs);

// k_t = (P_t + d_t) / P_{t-1} - 1, t = 1..T.
Eigen::VectorXd realized_returns(const ObservationSet& obs);

// Shortest round-trip formatting of a double ("nan"/"inf" never produced for finite input).
std::string format_double(double value);

}  // namespace rror
