#include "topemb/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "topemb/csv.hpp"
#include "topemb/error.hpp"

namespace topemb {

Matrix covariance(const Matrix& points) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "covariance needs at least 2 points");
  const auto mean = column_means(points);
  Matrix c(d, d);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = points.row(r);
    for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - mean[j];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) c(i, j) += ci * centered[j];
    }
  }
  const double scale = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      c(i, j) *= scale;
      c(j, i) = c(i, j);
    }
  }
  return c;
}

SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  Matrix a = symmetric;
  Matrix v = Matrix::identity(n);

  auto rotate = [](double& x, double& y, double s, double tau) {
    const double g = x;
    const double h = y;
    x = g - s * (h + g * tau);
    y = h + s * (g - h * tau);
  };

  int sweep = 1;
  for (;; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off == 0.0) break;
    if (sweep > max_sweeps)
      throw Error(ErrorCode::NoConvergence,
                  "Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
    // Early sweeps only rotate the large entries.
    const double threshold = sweep < 4 ? 0.2 * off / static_cast<double>(n * n) : 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double g = 100.0 * std::abs(apq);
        const double app = a(p, p);
        const double aqq = a(q, q);
        if (sweep > 4 && std::abs(app) + g == std::abs(app) &&
            std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        if (std::abs(apq) <= threshold) continue;
        const double h = aqq - app;
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          rotate(a(r, p), a(r, q), s, tau);
          a(p, r) = a(r, p);
          a(q, r) = a(r, q);
        }
        for (std::size_t r = 0; r < n; ++r) rotate(v(r, p), v(r, q), s, tau);
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out;
  out.sweeps = sweep - 1;  // the final pass only checked convergence
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    std::size_t pivot = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (std::abs(v(r, src)) > std::abs(v(pivot, src))) pivot = r;
    const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = sign * v(r, src);
  }
  return out;
}

double log10_floored(double value) {
  if (!(value > 0.0)) return kLog10Floor;
  return std::max(kLog10Floor, std::log10(value));
}

double auc_of_spectrum(std::span<const double> sigma) {
  if (sigma.empty() || !(sigma[0] > 0.0)) return 0.0;
  double sum = 0.0;
  for (double s : sigma) sum += s / sigma[0];
  return sum / static_cast<double>(sigma.size());
}

double auc_log_of_spectrum(std::span<const double> sigma) {
  if (sigma.empty()) return 0.0;
  const double top = log10_floored(sigma[0]) - kLog10Floor;
  if (!(top > 0.0)) return 0.0;
  double sum = 0.0;
  for (double s : sigma) sum += (log10_floored(s) - kLog10Floor) / top;
  return sum / static_cast<double>(sigma.size());
}

std::size_t effective_dim(std::span<const double> sigma, double epsilon) {
  if (sigma.empty() || !(sigma[0] > 0.0)) return 0;
  const double cut = epsilon * sigma[0];
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [cut](double s) { return s >= cut; }));
}

SpectrumReport singular_spectrum(const Matrix& cov, std::string source, std::size_t n_points,
                                 double epsilon) {
  const std::size_t d = cov.rows();
  if (cov.cols() != d) throw Error(ErrorCode::NotSymmetric, "covariance is not square");
  double scale = 1.0;
  for (double x : cov.data()) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-10 * scale)
        throw Error(ErrorCode::NotSymmetric, "covariance asymmetric at (" + std::to_string(i) +
                                                 "," + std::to_string(j) + ")");
  const auto eig = jacobi_eigen(cov);
  SpectrumReport r;
  r.source = std::move(source);
  r.n_points = n_points;
  r.epsilon = epsilon;
  r.sigma.resize(d);
  r.log10_sigma.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    r.sigma[k] = std::max(0.0, eig.values[k]);
    r.log10_sigma[k] = log10_floored(r.sigma[k]);
  }
  r.effective_dim = effective_dim(r.sigma, epsilon);
  r.auc = auc_of_spectrum(r.sigma);
  r.auc_log = auc_log_of_spectrum(r.sigma);
  return r;
}

SpectrumReport spectrum_of_points(const Matrix& points, std::string source, double epsilon) {
  return singular_spectrum(covariance(points), std::move(source), points.rows(), epsilon);
}

std::vector<SpectrumReport> per_cluster_spectra(const EmbeddingSet& set,
                                                const Clustering& clustering,
                                                const PerClusterOptions& options) {
  if (clustering.labels.size() != set.count())
    throw Error(ErrorCode::InvalidArgument, "clustering does not cover the set");
  std::vector<std::vector<std::size_t>> members(clustering.n_clusters);
  for (std::size_t i = 0; i < set.count(); ++i) {
    const int label = clustering.labels[i];
    if (label >= 0) members[static_cast<std::size_t>(label)].push_back(i);
  }
  std::vector<SpectrumReport> reports(members.size());
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& rows = members[c];
    const std::string source = std::to_string(c);
    if (rows.size() < 2) {
      SpectrumReport r;
      r.source = source;
      r.n_points = rows.size();
      r.epsilon = options.epsilon;
      r.sigma.assign(set.dim(), 0.0);
      r.log10_sigma.assign(set.dim(), kLog10Floor);
      r.degenerate = true;
      reports[c] = std::move(r);
      continue;
    }
    reports[c] = spectrum_of_points(select_rows(set.vectors, rows), source, options.epsilon);
    reports[c].degenerate = rows.size() < options.min_points;
  }
  return reports;
}

void write_spectra_csv(std::ostream& out, std::span<const SpectrumReport> reports) {
  out << "source,k,sigma,log10_sigma,effective_dim,auc,n_points\n";
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.sigma.size(); ++k)
      out << csv_escape(r.source) << ',' << k << ',' << format_double(r.sigma[k]) << ','
          << format_double(r.log10_sigma[k]) << ",,,\n";
    out << csv_escape(r.source) << ",summary,,," << r.effective_dim << ','
        << format_double(r.auc) << ',' << r.n_points << '\n';
  }
}

std::vector<SpectrumReport> read_spectra_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  table.require_columns({"source", "k", "sigma", "log10_sigma", "effective_dim", "auc", "n_points"});
  std::vector<SpectrumReport> reports;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& source = table.at(r, "source");
    auto it = index.find(source);
    if (it == index.end()) {
      it = index.emplace(source, reports.size()).first;
      reports.emplace_back().source = source;
    }
    SpectrumReport& rep = reports[it->second];
    if (table.at(r, "k") == "summary") {
      rep.effective_dim = static_cast<std::size_t>(parse_int(table.at(r, "effective_dim")));
      rep.auc = parse_double(table.at(r, "auc"));
      rep.n_points = static_cast<std::size_t>(parse_int(table.at(r, "n_points")));
      rep.auc_log = auc_log_of_spectrum(rep.sigma);
    } else {
      rep.sigma.push_back(parse_double(table.at(r, "sigma")));
      rep.log10_sigma.push_back(parse_double(table.at(r, "log10_sigma")));
    }
  }
  return reports;
}

}  // namespace topemb
