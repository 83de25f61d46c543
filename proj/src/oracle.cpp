#include "usar/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

// Everything in this file is written with plain index loops over
// std::complex scalars on purpose: it is the reference the optimized
// training-side implementation is validated against, so it shares no code
// with it beyond the parameter struct.

namespace usar::oracle {

namespace {

using std::complex;

// ---- scalar-loop forward pass -------------------------------------------

struct NaiveForward {
  std::vector<std::vector<double>> rho;            // rho[0..L], each size M
  std::vector<std::vector<complex<double>>> z;     // z[k], k = 0..L-1 for layer k+1
  double sup_norm = 0.0;
  int argmax = 0;
  bool degenerate = false;
  std::vector<double> rho_star;
};

double threshold_of(const EncoderParams& p) {
  return p.penalty == Penalty::L1 ? p.tau : std::sqrt(p.tau);
}

NaiveForward naive_forward(const EncoderParams& p, const CVector& d) {
  const int M = static_cast<int>(p.Q.rows());
  const int N = static_cast<int>(d.size());
  const double level = threshold_of(p);

  // bias_i = alpha * sum_n conj(F_{n i}) d_n
  std::vector<complex<double>> bias(M);
  for (int i = 0; i < M; ++i) {
    complex<double> acc = 0.0;
    for (int n = 0; n < N; ++n) acc += std::conj(p.F.entries(n, i)) * d(n);
    bias[i] = p.alpha * acc;
  }

  NaiveForward fw;
  fw.rho.assign(1, std::vector<double>(M, 0.0));
  for (int k = 0; k < p.layers; ++k) {
    std::vector<complex<double>> zk(M);
    std::vector<double> rk(M, 0.0);
    for (int i = 0; i < M; ++i) {
      complex<double> acc = bias[i];
      for (int j = 0; j < M; ++j) acc += p.Q(i, j) * fw.rho.back()[j];
      zk[i] = acc;
      const double mag = std::abs(acc);
      if (p.penalty == Penalty::L1) {
        rk[i] = mag > level ? mag - level : 0.0;
      } else {
        rk[i] = mag > level ? (mag - level) + (1.0 - p.c) * level : 0.0;
      }
    }
    fw.z.push_back(std::move(zk));
    fw.rho.push_back(std::move(rk));
  }

  for (int i = 0; i < M; ++i) {
    const double mag = std::abs(fw.rho.back()[i]);
    if (mag > fw.sup_norm) {
      fw.sup_norm = mag;
      fw.argmax = i;
    }
  }
  fw.rho_star.assign(M, 0.0);
  if (fw.sup_norm == 0.0) {
    fw.degenerate = true;
  } else {
    for (int i = 0; i < M; ++i) fw.rho_star[i] = fw.rho.back()[i] / fw.sup_norm;
  }
  return fw;
}

double naive_loss(const EncoderParams& p, const CVector& d) {
  const NaiveForward fw = naive_forward(p, d);
  const int M = static_cast<int>(p.Q.rows());
  const int N = static_cast<int>(d.size());
  double loss = 0.0;
  for (int n = 0; n < N; ++n) {
    complex<double> dn = 0.0;
    for (int m = 0; m < M; ++m) dn += p.F.entries(n, m) * fw.rho_star[m];
    loss += std::norm(dn - d(n));
  }
  return loss;
}

}  // namespace

GradientBundle naive_gradients(const EncoderParams& p, const Measurement& meas) {
  const CVector& d = meas.data;
  const int M = static_cast<int>(p.Q.rows());
  const int N = static_cast<int>(d.size());
  const double level = threshold_of(p);

  GradientBundle out;
  out.grad_Q = CMatrix::Zero(M, M);
  out.grad_F = CMatrix::Zero(N, M);
  out.sample_loss.assign(1, std::numeric_limits<double>::quiet_NaN());
  out.sample_mismatch.assign(1, 1.0);
  out.skipped.assign(1, 0);

  const NaiveForward fw = naive_forward(p, d);
  if (fw.degenerate) {
    out.skipped[0] = 1;
    return out;
  }

  // residual r_n = d*_n - d_n with d* = F rho_star
  std::vector<complex<double>> r(N);
  double loss = 0.0;
  for (int n = 0; n < N; ++n) {
    complex<double> dn = 0.0;
    for (int m = 0; m < M; ++m) dn += p.F.entries(n, m) * fw.rho_star[m];
    r[n] = dn - d(n);
    loss += std::norm(r[n]);
  }

  // v = 2 Re{F^H r}
  std::vector<double> v(M);
  for (int m = 0; m < M; ++m) {
    complex<double> acc = 0.0;
    for (int n = 0; n < N; ++n) acc += std::conj(p.F.entries(n, m)) * r[n];
    v[m] = 2.0 * acc.real();
  }

  // g = (-(1/a^2) e_m (rho^L)^T + (1/a) I) v
  std::vector<double> g(M);
  const double a = fw.sup_norm;
  double rho_dot_v = 0.0;
  for (int m = 0; m < M; ++m) rho_dot_v += fw.rho.back()[m] * v[m];
  for (int m = 0; m < M; ++m) g[m] = v[m] / a;
  g[fw.argmax] -= rho_dot_v / (a * a);

  double g_tau = 0.0;
  for (int k = 1; k <= p.layers; ++k) {
    const auto& zk = fw.z[static_cast<std::size_t>(k - 1)];
    const auto& rho_prev = fw.rho[static_cast<std::size_t>(k - 1)];
    for (int i = 0; i < M; ++i) {
      const double f = std::abs(zk[static_cast<std::size_t>(i)]);
      if (!(f > level)) continue;
      const complex<double> dir = zk[static_cast<std::size_t>(i)] / f;
      for (int j = 0; j < M; ++j)
        out.grad_Q(i, j) += (g[i] / 2.0) * dir * rho_prev[static_cast<std::size_t>(j)];
      for (int n = 0; n < N; ++n)
        out.grad_F(n, i) += (p.alpha * g[i] / 2.0) * std::conj(dir) * d(n);
      g_tau -= g[i];
    }
  }
  if (p.penalty == Penalty::L0) g_tau *= p.c;

  for (int n = 0; n < N; ++n)
    for (int m = 0; m < M; ++m) out.grad_F(n, m) += r[static_cast<std::size_t>(n)] * fw.rho_star[static_cast<std::size_t>(m)];

  out.grad_tau = g_tau;
  out.sample_loss[0] = loss;
  double dn2 = 0.0;
  for (int n = 0; n < N; ++n) dn2 += std::norm(d(n));
  out.sample_mismatch[0] = dn2 > 0.0 ? loss / dn2 : std::numeric_limits<double>::quiet_NaN();
  return out;
}

FiniteDiffResult finite_diff_gradients(const EncoderParams& params, const Measurement& meas,
                                       double step) {
  FiniteDiffResult out;
  const int M = static_cast<int>(params.Q.rows());
  const int N = static_cast<int>(meas.data.size());
  out.grad_Q.resize(M, M);
  out.grad_F.resize(N, M);
  out.loss = naive_loss(params, meas.data);

  const auto probe = [&](EncoderParams& p, double* slot) {
    const double saved = *slot;
    *slot = saved + step;
    const double up = naive_loss(p, meas.data);
    *slot = saved - step;
    const double dn = naive_loss(p, meas.data);
    *slot = saved;
    return (up - dn) / (2.0 * step);
  };

  EncoderParams p = params;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      complex<double>& q = p.Q(i, j);
      const double d_re = probe(p, &reinterpret_cast<double(&)[2]>(q)[0]);
      const double d_im = probe(p, &reinterpret_cast<double(&)[2]>(q)[1]);
      out.grad_Q(i, j) = Complex(d_re / 2.0, d_im / 2.0);
    }
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < M; ++m) {
      complex<double>& fe = p.F.entries(n, m);
      const double d_re = probe(p, &reinterpret_cast<double(&)[2]>(fe)[0]);
      const double d_im = probe(p, &reinterpret_cast<double(&)[2]>(fe)[1]);
      out.grad_F(n, m) = Complex(d_re / 2.0, d_im / 2.0);
    }
  out.grad_tau = probe(p, &p.tau);
  return out;
}

double gradient_deviation(const GradientBundle& a, const GradientBundle& b, double floor) {
  double worst = 0.0;
  const auto update = [&](double ref, double err) {
    const double rel = err / std::max(std::abs(ref), floor);
    worst = std::max(worst, rel);
  };
  if (a.grad_Q.rows() != b.grad_Q.rows() || a.grad_Q.cols() != b.grad_Q.cols() ||
      a.grad_F.rows() != b.grad_F.rows() || a.grad_F.cols() != b.grad_F.cols())
    throw DimensionError("gradient_deviation: shape mismatch");
  for (Eigen::Index j = 0; j < a.grad_Q.cols(); ++j)
    for (Eigen::Index i = 0; i < a.grad_Q.rows(); ++i)
      update(std::abs(a.grad_Q(i, j)), std::abs(a.grad_Q(i, j) - b.grad_Q(i, j)));
  for (Eigen::Index j = 0; j < a.grad_F.cols(); ++j)
    for (Eigen::Index i = 0; i < a.grad_F.rows(); ++i)
      update(std::abs(a.grad_F(i, j)), std::abs(a.grad_F(i, j) - b.grad_F(i, j)));
  update(a.grad_tau, std::abs(a.grad_tau - b.grad_tau));
  return worst;
}

int near_boundary_count(const EncoderParams& params, const Measurement& d, double margin) {
  const NaiveForward fw = naive_forward(params, d.data);
  const double level = threshold_of(params);
  int flagged = 0;
  for (const auto& zk : fw.z)
    for (const auto& zi : zk)
      if (std::abs(std::abs(zi) - level) <= margin) ++flagged;
  return flagged;
}

void write_comparison_report(const std::string& path, const EncoderParams& params,
                             const Measurement& d, const GradientBundle& fast,
                             const GradientBundle& naive) {
  const auto block_dev = [](const CMatrix& ref, const CMatrix& other, double floor) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < ref.cols(); ++j)
      for (Eigen::Index i = 0; i < ref.rows(); ++i) {
        const double rel =
            std::abs(ref(i, j) - other(i, j)) / std::max(std::abs(ref(i, j)), floor);
        worst = std::max(worst, rel);
      }
    return worst;
  };
  const double floor = 1e-12;
  const int flagged = near_boundary_count(params, d);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsarError("cannot open " + path + " for writing");
  out.precision(17);
  out << "block,max_relative_deviation,near_boundary_count\n";
  out << "Q," << block_dev(naive.grad_Q, fast.grad_Q, floor) << "," << flagged << "\n";
  out << "F," << block_dev(naive.grad_F, fast.grad_F, floor) << "," << flagged << "\n";
  out << "tau,"
      << std::abs(naive.grad_tau - fast.grad_tau) /
             std::max(std::abs(naive.grad_tau), floor)
      << "," << flagged << "\n";
  if (!out) throw UsarError("failed writing " + path);
}

}  // namespace usar::oracle
