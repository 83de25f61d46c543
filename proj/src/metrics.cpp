#include "usar/metrics.hpp"

#include "usar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace usar {

double data_mismatch(const ForwardModel& model, const RVector& rho_star, const CVector& d) {
  if (rho_star.size() != model.pixel_count() || d.size() != model.measurement_count())
    throw DimensionError("data_mismatch: size mismatch");
  const double denom = d.squaredNorm();
  if (denom == 0.0) throw UsarError("data_mismatch: zero measurement");
  return (model.entries * rho_star.cast<Complex>() - d).squaredNorm() / denom;
}

double image_error(const RVector& rho_star, const RVector& rho_true) {
  if (rho_star.size() != rho_true.size()) throw DimensionError("image_error: size mismatch");
  const double denom = rho_true.squaredNorm();
  if (denom == 0.0) throw UsarError("image_error: zero reference image");
  return (rho_star - rho_true).squaredNorm() / denom;
}

ContrastValue contrast(const RVector& rho_star, const std::vector<bool>& foreground_mask) {
  if (static_cast<std::size_t>(rho_star.size()) != foreground_mask.size())
    throw DimensionError("contrast: mask size mismatch");
  double fg_sum = 0.0, bg_sum = 0.0;
  long fg_n = 0, bg_n = 0;
  for (Eigen::Index i = 0; i < rho_star.size(); ++i) {
    if (foreground_mask[static_cast<std::size_t>(i)]) {
      fg_sum += rho_star(i);
      ++fg_n;
    } else {
      bg_sum += rho_star(i);
      ++bg_n;
    }
  }
  if (fg_n == 0) throw UsarError("contrast: empty foreground");
  if (bg_n < 2) throw UsarError("contrast: background needs at least two pixels");

  const double fg_mean = fg_sum / static_cast<double>(fg_n);
  const double bg_mean = bg_sum / static_cast<double>(bg_n);
  double bg_var = 0.0;  // population variance
  for (Eigen::Index i = 0; i < rho_star.size(); ++i)
    if (!foreground_mask[static_cast<std::size_t>(i)]) {
      const double dev = rho_star(i) - bg_mean;
      bg_var += dev * dev;
    }
  bg_var /= static_cast<double>(bg_n);

  ContrastValue out;
  if (bg_var == 0.0) return out;  // flat background: contrast undefined
  out.value = (fg_mean - bg_mean) * (fg_mean - bg_mean) / bg_var;
  out.defined = true;
  return out;
}

namespace {

RVector sup_normalize(const RVector& image) {
  const double peak = image.cwiseAbs().maxCoeff();
  return peak > 0.0 ? RVector(image / peak) : image;
}

}  // namespace

MetricsReport evaluate(const Reconstructor& method, const ForwardModel& f_mismatch,
                       const ForwardModel& f_true, const Scene& phantom,
                       const EvalProtocol& protocol) {
  if (protocol.realizations < 1) throw UsarError("evaluate: need at least one realization");
  phantom.validate();
  if (phantom.reflectivity.size() != f_true.pixel_count())
    throw DimensionError("evaluate: phantom does not match the model grid");

  const Measurement clean = synthesize(f_true, phantom);
  std::vector<bool> mask(static_cast<std::size_t>(phantom.reflectivity.size()));
  for (Eigen::Index i = 0; i < phantom.reflectivity.size(); ++i)
    mask[static_cast<std::size_t>(i)] = phantom.reflectivity(i) != 0.0;

  MetricsReport report;
  double sum_ld = 0.0, sum_lr = 0.0, sum_c = 0.0;
  int defined = 0;
  for (int r = 0; r < protocol.realizations; ++r) {
    const Measurement noisy =
        add_noise(clean, protocol.snr_db, derive_seed(protocol.seed, static_cast<std::uint64_t>(r)));
    const RVector image = sup_normalize(method(noisy));
    if (image.size() != phantom.reflectivity.size())
      throw DimensionError("evaluate: method returned an image of the wrong size");

    RealizationMetrics row;
    row.realization = r;
    row.L_d = data_mismatch(f_mismatch, image, noisy.data);
    row.L_rho = image_error(image, phantom.reflectivity);
    row.C_rho = contrast(image, mask);
    report.rows.push_back(row);

    sum_ld += row.L_d;
    sum_lr += row.L_rho;
    if (row.C_rho.defined) {
      sum_c += row.C_rho.value;
      ++defined;
    } else {
      ++report.undefined_contrast;
    }
  }
  report.mean_L_d = sum_ld / protocol.realizations;
  report.mean_L_rho = sum_lr / protocol.realizations;
  if (defined > 0) {
    report.mean_C_rho.value = sum_c / defined;
    report.mean_C_rho.defined = true;
  }
  return report;
}

std::vector<SweepRow> sweep(const std::vector<double>& values, const SweepRunner& runner) {
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double v : values) {
    const MetricsReport report = runner(v);
    SweepRow row;
    row.value = v;
    row.mean_L_rho = report.mean_L_rho;
    row.mean_C_rho = report.mean_C_rho;
    row.mean_L_d = report.mean_L_d;
    rows.push_back(row);
  }
  return rows;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw DimensionError("spearman: need two equal-length series of length >= 2");
  const auto ranks = [](const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
      i = j + 1;
    }
    return rank;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) throw UsarError("spearman: constant series has no rank correlation");
  return cov / std::sqrt(va * vb);
}

}  // namespace usar
