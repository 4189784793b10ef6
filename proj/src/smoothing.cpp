#include "lpoco/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "lpoco/errors.hpp"
#include "lpoco/normal.hpp"

namespace lpoco {

std::string to_string(SmoothingFamily family) {
  switch (family) {
    case SmoothingFamily::TruncatedGaussianPaper:
      return "truncated-paper";
    case SmoothingFamily::TruncatedGaussianInterval:
      return "truncated-interval";
    case SmoothingFamily::StandardGaussian:
      return "gaussian";
    case SmoothingFamily::SphereBernoulli:
      return "bernoulli";
  }
  return "?";
}

double truncation_bound(int dim, int memory) {
  if (dim < 1 || memory < 1) throw ParameterError("truncation_bound: need d >= 1 and h >= 1");
  const double dd = static_cast<double>(dim);
  return std::pow(2.0 * dd * dd * (2.0 * memory - 1.0), -0.25);
}

SmoothingSpec SmoothingSpec::truncated_paper(int dim, int memory) {
  SmoothingSpec s;
  s.family_ = SmoothingFamily::TruncatedGaussianPaper;
  s.dim_ = dim;
  s.memory_ = memory;
  const double b = truncation_bound(dim, memory);
  s.lower_ = -b;
  s.upper_ = b;
  s.finalize();
  return s;
}

SmoothingSpec SmoothingSpec::truncated_interval(int dim, double lower, double upper) {
  if (dim < 1) throw ParameterError("smoothing dimension must be >= 1");
  if (!(lower < upper)) throw ParameterError("truncation interval is empty");
  SmoothingSpec s;
  s.family_ = SmoothingFamily::TruncatedGaussianInterval;
  s.dim_ = dim;
  s.lower_ = lower;
  s.upper_ = upper;
  s.finalize();
  return s;
}

SmoothingSpec SmoothingSpec::standard_gaussian(int dim) {
  if (dim < 1) throw ParameterError("smoothing dimension must be >= 1");
  SmoothingSpec s;
  s.family_ = SmoothingFamily::StandardGaussian;
  s.dim_ = dim;
  s.finalize();
  return s;
}

SmoothingSpec SmoothingSpec::sphere(int dim) {
  if (dim < 1) throw ParameterError("smoothing dimension must be >= 1");
  SmoothingSpec s;
  s.family_ = SmoothingFamily::SphereBernoulli;
  s.dim_ = dim;
  s.finalize();
  return s;
}

bool SmoothingSpec::truncated() const {
  return family_ == SmoothingFamily::TruncatedGaussianPaper ||
         family_ == SmoothingFamily::TruncatedGaussianInterval;
}

void SmoothingSpec::finalize() {
  switch (family_) {
    case SmoothingFamily::StandardGaussian:
      kappa_ = 1.0;
      sigma2_ = 1.0;
      return;
    case SmoothingFamily::SphereBernoulli:
      kappa_ = 1.0;
      sigma2_ = 1.0 / dim_;
      return;
    default:
      break;
  }
  // Mass of N(0,1) on [lower, upper], integrated over the finite part of the interval.
  const double a = std::max(lower_, -40.0);
  const double b = std::min(upper_, 40.0);
  kappa_ = integrate(normal_pdf, a, b, 1e-15);
  if (!(kappa_ > 0.0)) throw ParameterError("truncated smoothing has zero mass");
  cdf_lower_ = normal_cdf(lower_);
  cdf_upper_ = normal_cdf(upper_);
  // E[x^2] of the truncated standard normal.
  sigma2_ = 1.0 + (a * normal_pdf(a) - b * normal_pdf(b)) / kappa_;
}

double SmoothingSpec::kappa() const {
  if (!truncated()) throw NotApplicable("kappa is only defined for truncated families");
  return kappa_;
}

double SmoothingSpec::second_moment() const { return sigma2_; }

Vector SmoothingSpec::sample_from(std::span<const double> uniforms) const {
  if (static_cast<int>(uniforms.size()) != dim_)
    throw ContractViolation("sample_from: need one uniform per coordinate");
  Vector u(dim_);
  switch (family_) {
    case SmoothingFamily::TruncatedGaussianPaper:
    case SmoothingFamily::TruncatedGaussianInterval:
      for (int i = 0; i < dim_; ++i) {
        const double v = cdf_lower_ + uniforms[static_cast<std::size_t>(i)] * (cdf_upper_ - cdf_lower_);
        u(i) = std::clamp(normal_quantile(v), lower_, upper_);
      }
      return u;
    case SmoothingFamily::StandardGaussian:
      for (int i = 0; i < dim_; ++i) u(i) = normal_quantile(uniforms[static_cast<std::size_t>(i)]);
      return u;
    case SmoothingFamily::SphereBernoulli:
      if (dim_ == 1) {
        u(0) = uniforms[0] < 0.5 ? -1.0 : 1.0;
        return u;
      }
      for (int i = 0; i < dim_; ++i) u(i) = normal_quantile(uniforms[static_cast<std::size_t>(i)]);
      return u / u.norm();
  }
  return u;
}

Vector SmoothingSpec::sample(Rng& rng) const {
  std::vector<double> uniforms(static_cast<std::size_t>(dim_));
  for (double& v : uniforms) v = rng.uniform_open();
  return sample_from(uniforms);
}

std::string SmoothingSpec::describe() const {
  switch (family_) {
    case SmoothingFamily::TruncatedGaussianPaper:
      return fmt::format("truncated-paper(d={},h={})", dim_, memory_);
    case SmoothingFamily::TruncatedGaussianInterval:
      return fmt::format("truncated-interval({}:{})", lower_, upper_);
    case SmoothingFamily::StandardGaussian:
      return "gaussian";
    case SmoothingFamily::SphereBernoulli:
      return dim_ == 1 ? "bernoulli" : "sphere";
  }
  return "?";
}

SmoothingSpec SmoothingSpec::with_kappa_override(double kappa) const {
  SmoothingSpec s = *this;
  s.kappa_ = kappa;
  if (truncated()) {
    const double a = std::max(lower_, -40.0);
    const double b = std::min(upper_, 40.0);
    s.sigma2_ = 1.0 + (a * normal_pdf(a) - b * normal_pdf(b)) / kappa;
  }
  return s;
}

double normalization_kappa(const SmoothingSpec& spec) { return spec.kappa(); }

double second_moment(const SmoothingSpec& spec) { return spec.second_moment(); }

void to_json(nlohmann::json& j, const SmoothingSpec& s) {
  j = nlohmann::json{{"family", to_string(s.family())},
                     {"d", s.dim()},
                     {"sigma2", s.second_moment()}};
  if (s.family() == SmoothingFamily::TruncatedGaussianPaper) j["h"] = s.memory();
  if (s.truncated()) {
    j["lower"] = s.lower();
    j["upper"] = s.upper();
    j["kappa"] = s.kappa();
  }
}

SmoothingSpec smoothing_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  const int d = j.at("d").get<int>();
  if (family == "truncated-paper") return SmoothingSpec::truncated_paper(d, j.at("h").get<int>());
  if (family == "truncated-interval")
    return SmoothingSpec::truncated_interval(d, j.at("lower").get<double>(), j.at("upper").get<double>());
  if (family == "gaussian") return SmoothingSpec::standard_gaussian(d);
  if (family == "bernoulli") return SmoothingSpec::sphere(d);
  throw ParameterError("unknown smoothing family '" + family + "'");
}

}  // namespace lpoco
