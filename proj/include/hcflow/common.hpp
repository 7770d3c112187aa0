#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorKind {
  DegenerateMetric,
  RankDeficient,
  DegenerateProfile,
  Extinct,
  BadShape,
  ZeroMeanCurvature,
  BlowUp,
  OutOfDomain,
  SmallnessViolated,
  NotANeck,
  AuditFailed,
  NeckTooShort,
  NoSuitableSite,
  PreconditionCurvatureTooLow,
  TangencyLoss,
  IncompleteRun,
  UnknownSuite,
  ConfigError,
  Internal,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DegenerateProfile: return "DegenerateProfile";
    case ErrorKind::Extinct: return "Extinct";
    case ErrorKind::BadShape: return "BadShape";
    case ErrorKind::ZeroMeanCurvature: return "ZeroMeanCurvature";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::SmallnessViolated: return "SmallnessViolated";
    case ErrorKind::NotANeck: return "NotANeck";
    case ErrorKind::AuditFailed: return "AuditFailed";
    case ErrorKind::NeckTooShort: return "NeckTooShort";
    case ErrorKind::NoSuitableSite: return "NoSuitableSite";
    case ErrorKind::PreconditionCurvatureTooLow: return "PreconditionCurvatureTooLow";
    case ErrorKind::TangencyLoss: return "TangencyLoss";
    case ErrorKind::IncompleteRun: return "IncompleteRun";
    case ErrorKind::UnknownSuite: return "UnknownSuite";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::Internal: return "Internal";
  }
  return "?";
}

class FlowError : public std::runtime_error {
 public:
  FlowError(ErrorKind k, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(k)) + ": " + what), kind_(k) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& what) { throw FlowError(k, what); }

inline void require(bool cond, ErrorKind k, const std::string& what) {
  if (!cond) fail(k, what);
}

/// Area of the unit k-sphere S^k in R^{k+1}: 2 pi^{(k+1)/2} / Gamma((k+1)/2).
inline double unit_sphere_area(int k) {
  require(k >= 0, ErrorKind::BadShape, "sphere dimension");
  const double p = 0.5 * (k + 1);
  return 2.0 * std::pow(M_PI, p) / std::tgamma(p);
}

/// Fornberg finite-difference weights: for nodes x[0..nn-1] and evaluation
/// point x0, fills w(j, d) with the weight of node j in the order-d derivative,
/// d = 0..maxder. Works on arbitrary (distinct) node sets.
inline Mat fd_weights(double x0, const std::vector<double>& x, int maxder) {
  const int nn = static_cast<int>(x.size());
  require(nn >= maxder + 1, ErrorKind::BadShape, "not enough nodes for derivative order");
  Mat w = Mat::Zero(nn, maxder + 1);
  double c1 = 1.0, c4 = x[0] - x0;
  w(0, 0) = 1.0;
  for (int i = 1; i < nn; ++i) {
    const int mn = std::min(i, maxder);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int d = mn; d >= 1; --d) w(i, d) = c1 * (d * w(i - 1, d - 1) - c5 * w(i - 1, d)) / c2;
        w(i, 0) = -c1 * c5 * w(i - 1, 0) / c2;
      }
      for (int d = mn; d >= 1; --d) w(j, d) = (c4 * w(j, d) - d * w(j, d - 1)) / c3;
      w(j, 0) = c4 * w(j, 0) / c3;
    }
    c1 = c2;
  }
  return w;
}

/// Least-squares slope of log(y) against log(x); x, y > 0.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::BadShape, "slope fit needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Shape-preserving cubic (Fritsch-Carlson) interpolant on a strictly
/// increasing abscissa. Used for re-gridding; monotone data stay monotone and
/// positive data stay positive.
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const int n = static_cast<int>(x_.size());
    require(n >= 2 && y_.size() == x_.size(), ErrorKind::BadShape, "pchip input");
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), del(n - 1);
    for (int i = 0; i < n - 1; ++i) {
      h[i] = x_[i + 1] - x_[i];
      require(h[i] > 0, ErrorKind::BadShape, "pchip abscissa not increasing");
      del[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
      d_[0] = d_[1] = del[0];
    } else {
      for (int i = 1; i < n - 1; ++i) {
        if (del[i - 1] * del[i] > 0) {
          const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
          d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
      }
      d_[0] = edge_slope(h[0], h[1], del[0], del[1]);
      d_[n - 1] = edge_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }
  }

  double operator()(double t) const {
    const int n = static_cast<int>(x_.size());
    int lo = 0, hi = n - 1;
    if (t <= x_[0]) lo = 0;
    else if (t >= x_[n - 1]) lo = n - 2;
    else {
      while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (x_[mid] <= t ? lo : hi) = mid;
      }
    }
    const double h = x_[lo + 1] - x_[lo];
    const double s = (t - x_[lo]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return y_[lo] * (2 * s3 - 3 * s2 + 1) + h * d_[lo] * (s3 - 2 * s2 + s) +
           y_[lo + 1] * (-2 * s3 + 3 * s2) + h * d_[lo + 1] * (s3 - s2);
  }

 private:
  static double edge_slope(double h0, double h1, double del0, double del1) {
    double d = ((2 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (d * del0 <= 0) d = 0;
    else if (del0 * del1 < 0 && std::abs(d) > 3 * std::abs(del0)) d = 3 * del0;
    return d;
  }
  std::vector<double> x_, y_;
  std::vector<double> d_;
};

}  // namespace hcflow
