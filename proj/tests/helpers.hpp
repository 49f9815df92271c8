#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tlf/dataset.hpp"

namespace tlf::testing {

inline Dataset read_text(const std::string& csv, const std::string& label = "label") {
  std::istringstream in(csv);
  return read_csv(in, label);
}

inline Schema numeric_schema(std::size_t d, const std::string& prefix = "x") {
  Schema s;
  for (std::size_t j = 0; j < d; ++j) s.push_back({prefix + std::to_string(j), AttributeKind::numeric, {}});
  return s;
}

inline std::vector<std::string> class_list(std::size_t c) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < c; ++k) out.push_back("c" + std::to_string(k));
  return out;
}

inline Dataset numeric_dataset(const Eigen::MatrixXd& x, std::vector<int> y, std::size_t classes,
                               DomainTag domain = DomainTag::target, const std::string& prefix = "x") {
  return Dataset(numeric_schema(static_cast<std::size_t>(x.cols()), prefix), x, std::move(y), class_list(classes),
                 domain);
}

// Random probability vector; roughly one entry in four is an exact zero.
inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t c) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(c);
  double total = 0.0;
  for (auto& v : p) {
    v = u(rng) < 0.25 ? 0.0 : u(rng);
    total += v;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

// Gaussian blobs: `classes` centres in `dims` dimensions, unit noise.
struct Blobs {
  Eigen::MatrixXd centres;
  Dataset sample(std::size_t n, std::mt19937_64& rng, DomainTag domain = DomainTag::target,
                 const Eigen::MatrixXd* rotation = nullptr, const std::string& prefix = "x") const {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(centres.rows()) - 1);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), centres.cols());
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = pick(rng);
      for (Eigen::Index j = 0; j < centres.cols(); ++j) {
        x(static_cast<Eigen::Index>(i), j) = centres(y[i], j) + noise(rng);
      }
    }
    if (rotation) x = x * *rotation;
    return numeric_dataset(x, std::move(y), static_cast<std::size_t>(centres.rows()), domain, prefix);
  }
};

inline Blobs make_blobs(std::size_t classes, std::size_t dims, double spread, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, spread);
  Blobs b;
  b.centres.resize(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dims));
  for (Eigen::Index i = 0; i < b.centres.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.centres.cols(); ++j) b.centres(i, j) = g(rng);
  }
  return b;
}

// Haar-random orthogonal matrix via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix column signs so the result is uniquely determined by `a`.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(TLF_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tlf::testing
