// Copyright 2026 The Memfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "memfilter/mcs/composite.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "memfilter/core/error.hpp"
#include "memfilter/simd/kernels.hpp"
#include "memfilter/stats/stats.hpp"

namespace memfilter::mcs {
namespace {

constexpr double kArmijo = 1e-4;
constexpr std::size_t kTau = kNumMia;

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double clamp_open_unit(double p) {
  return std::clamp(p, std::numeric_limits<double>::min(),
                    std::nextafter(1.0, 0.0));
}

void check_finite(const RawFeatures& f) {
  for (std::size_t j = 0; j < kNumMia; ++j) {
    if (j == kNumMia - 1 && !f.has_ref) continue;
    if (!std::isfinite(f.phi[j])) {
      throw ValidationError(std::string("non-finite feature '") +
                            kMethodNames[j] + "'");
    }
  }
  if (!std::isfinite(f.tau)) throw ValidationError("non-finite feature 'tau'");
}

}  // namespace

double temporal_proximity(Date prompt_date, Date cutoff_date) {
  const double days = static_cast<double>(cutoff_date - prompt_date);
  return std::clamp(days / kTemporalScaleDays, -1.0, 1.0);
}

RawFeatures make_features(const mia::MiaScoreVector& s, Date prompt_date,
                          const ModelSpec& spec) {
  RawFeatures f;
  f.phi = {s.loss, s.min_k, s.min_k_pp, s.zlib_ratio, s.ref_ratio.value_or(0.0)};
  f.has_ref = s.ref_ratio.has_value();
  f.tau = temporal_proximity(prompt_date, spec.cutoff_date);
  return f;
}

std::array<bool, kNumFeatures> Variant::active_mask() const {
  std::array<bool, kNumFeatures> m{};
  switch (kind) {
    case VariantKind::kFull:
      m.fill(true);
      break;
    case VariantKind::kMiaOnly:
      m.fill(true);
      m[kTau] = false;
      break;
    case VariantKind::kTemporalOnly:
      m[kTau] = true;
      break;
    case VariantKind::kSingleMethod:
      m[method] = true;
      break;
  }
  return m;
}

std::string Variant::name() const {
  switch (kind) {
    case VariantKind::kFull:
      return "full";
    case VariantKind::kMiaOnly:
      return "mia_only";
    case VariantKind::kTemporalOnly:
      return "temporal_only";
    case VariantKind::kSingleMethod:
      return std::string("single_method:") + kMethodNames[method];
  }
  return "full";
}

Variant Variant::parse(const std::string& name) {
  if (name == "full") return {VariantKind::kFull, 0};
  if (name == "mia_only") return {VariantKind::kMiaOnly, 0};
  if (name == "temporal_only") return {VariantKind::kTemporalOnly, 0};
  const std::string prefix = "single_method:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string method = name.substr(prefix.size());
    for (std::size_t j = 0; j < kNumMia; ++j) {
      if (method == kMethodNames[j]) return {VariantKind::kSingleMethod, j};
    }
  }
  throw ConfigError("unknown MCS variant '" + name + "'");
}

McsFeatureVector standardize(const McsModel& model, const RawFeatures& raw) {
  McsFeatureVector v;
  for (std::size_t j = 0; j < kNumMia; ++j) {
    // A missing reference ratio is imputed with the training mean, which
    // standardizes to exactly zero.
    if (j == kNumMia - 1 && !raw.has_ref) {
      v.phi[j] = 0.0;
      continue;
    }
    v.phi[j] = (raw.phi[j] - model.feature_means[j]) / model.feature_stds[j];
  }
  v.tau = raw.tau;
  return v;
}

LogisticObjective::LogisticObjective(
    std::vector<std::array<double, kNumFeatures>> rows, std::vector<bool> labels,
    double lambda, std::array<bool, kNumFeatures> mask)
    : labels_(std::move(labels)), lambda_(lambda), mask_(mask) {
  if (rows.size() != labels_.size()) {
    throw PairingError("feature and label counts differ");
  }
  for (auto& col : columns_) col.resize(rows.size());
  y_.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) columns_[j][i] = rows[i][j];
    y_[i] = labels_[i] ? 1.0 : 0.0;
  }
}

void LogisticObjective::margins(const Params& p, std::vector<double>* out) const {
  out->assign(y_.size(), p[kNumFeatures]);
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if (mask_[j] && p[j] != 0.0) simd::axpy(p[j], columns_[j], *out);
  }
}

double LogisticObjective::value(const Params& p) const {
  std::vector<double> m;
  margins(p, &m);
  double loss = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    loss += labels_[i] ? softplus(-m[i]) : softplus(m[i]);
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if (mask_[j]) reg += p[j] * p[j];
  }
  return loss / static_cast<double>(m.size()) + 0.5 * lambda_ * reg;
}

double LogisticObjective::gradient(const Params& p, Params* grad) const {
  std::vector<double> m;
  margins(p, &m);
  const double n = static_cast<double>(m.size());
  double loss = 0.0;
  std::vector<double> residual(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    loss += labels_[i] ? softplus(-m[i]) : softplus(m[i]);
    residual[i] = sigmoid(m[i]) - y_[i];
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if (!mask_[j]) {
      (*grad)[j] = 0.0;
      continue;
    }
    (*grad)[j] = simd::dot(columns_[j], residual) / n + lambda_ * p[j];
    reg += p[j] * p[j];
  }
  (*grad)[kNumFeatures] = simd::sum(residual) / n;
  return loss / n + 0.5 * lambda_ * reg;
}

McsModel fit_mcs(std::span<const RawFeatures> features,
                 const std::vector<bool>& labels, const FitOptions& options) {
  if (features.size() != labels.size()) {
    throw PairingError("fit_mcs: feature and label counts differ");
  }
  if (!(options.lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  const auto n_pos = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), true));
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw InsufficientDataError("degenerate fit: all labels are identical");
  }
  if (n_pos < 2 || n_neg < 2) {
    throw InsufficientDataError("fit_mcs: need >= 2 examples of each label");
  }
  for (const auto& f : features) check_finite(f);

  McsModel model;
  model.lambda = options.lambda;
  model.variant = options.variant;

  for (std::size_t j = 0; j < kNumMia; ++j) {
    std::vector<double> col;
    col.reserve(features.size());
    for (const auto& f : features) {
      if (j == kNumMia - 1 && !f.has_ref) continue;
      col.push_back(f.phi[j]);
    }
    if (col.empty()) {
      model.feature_means[j] = 0.0;
      model.feature_stds[j] = 1.0;
      continue;
    }
    const double mu = stats::mean(col);
    const double sd = std::sqrt(simd::sum_squared_deviation(col, mu) /
                                static_cast<double>(col.size()));
    model.feature_means[j] = mu;
    model.feature_stds[j] = sd > 0.0 ? sd : 1.0;
  }

  std::vector<std::array<double, kNumFeatures>> rows(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto v = standardize(model, features[i]);
    for (std::size_t j = 0; j < kNumMia; ++j) rows[i][j] = v.phi[j];
    rows[i][kTau] = v.tau;
  }
  const auto mask = options.variant.active_mask();
  LogisticObjective objective(std::move(rows), labels, options.lambda, mask);

  LogisticObjective::Params params{};
  if (options.initial) {
    params = *options.initial;
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      if (!mask[j]) params[j] = 0.0;
    }
  } else {
    const double frac = static_cast<double>(n_pos) / labels.size();
    params[kNumFeatures] = std::log(frac / (1.0 - frac));
  }

  LogisticObjective::Params grad{};
  double f = objective.gradient(params, &grad);
  double step = 1.0;
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    double gmax = 0.0;
    double gnorm2 = 0.0;
    for (double g : grad) {
      gmax = std::max(gmax, std::fabs(g));
      gnorm2 += g * g;
    }
    if (gmax < options.gradient_tolerance) {
      converged = true;
      break;
    }
    double t = step;
    LogisticObjective::Params candidate{};
    double fc = 0.0;
    for (;;) {
      for (std::size_t k = 0; k < params.size(); ++k) {
        candidate[k] = params[k] - t * grad[k];
      }
      fc = objective.value(candidate);
      if (fc <= f - kArmijo * t * gnorm2) break;
      t *= 0.5;
      if (t < 1e-300) break;
    }
    if (!(fc <= f - kArmijo * t * gnorm2)) break;  // line search stalled
    params = candidate;
    f = objective.gradient(params, &grad);
    step = t * 2.0;
  }

  for (std::size_t j = 0; j < kNumFeatures; ++j) model.weights[j] = params[j];
  model.bias = params[kNumFeatures];
  model.iterations = it;
  model.converged = converged;
  model.objective = f;
  return model;
}

double mcs_logit(const McsModel& model, const RawFeatures& raw) {
  check_finite(raw);
  const auto v = standardize(model, raw);
  double z = model.bias;
  for (std::size_t j = 0; j < kNumMia; ++j) z += model.weights[j] * v.phi[j];
  z += model.weights[kTau] * v.tau;
  return z;
}

double mcs_predict(const McsModel& model, const RawFeatures& raw) {
  return clamp_open_unit(sigmoid(mcs_logit(model, raw)));
}

Separation separation_report(std::span<const double> scores,
                             const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw PairingError("separation_report: length mismatch");
  }
  std::vector<double> is, oos;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] ? is : oos).push_back(scores[i]);
  }
  if (is.size() < 2 || oos.size() < 2) {
    throw InsufficientDataError("separation_report: need >= 2 samples per group");
  }
  Separation s;
  s.is_mean = stats::mean(is);
  s.oos_mean = stats::mean(oos);
  s.cohens_d = stats::cohens_d(is, oos);
  s.ks_p = stats::ks_test(is, oos).p_value;
  s.t_p = stats::welch_t(is, oos).p_two_sided;
  s.auc = stats::auc(scores, labels);
  return s;
}

void write_model(std::ostream& out, const McsModel& model,
                 const std::string& fingerprint) {
  nlohmann::ordered_json obj;
  obj["weights"] = model.weights;
  obj["bias"] = model.bias;
  obj["feature_means"] = model.feature_means;
  obj["feature_stds"] = model.feature_stds;
  obj["lambda"] = model.lambda;
  obj["variant"] = model.variant.name();
  obj["fingerprint"] = fingerprint;
  obj["iterations"] = model.iterations;
  obj["converged"] = model.converged;
  obj["objective"] = model.objective;
  out << obj.dump(2) << '\n';
}

McsModel read_model(std::istream& in) {
  try {
    const auto obj = nlohmann::json::parse(in);
    McsModel m;
    m.weights = obj.at("weights").get<std::array<double, kNumFeatures>>();
    m.bias = obj.at("bias").get<double>();
    m.feature_means = obj.at("feature_means").get<std::array<double, kNumMia>>();
    m.feature_stds = obj.at("feature_stds").get<std::array<double, kNumMia>>();
    m.lambda = obj.at("lambda").get<double>();
    m.variant = Variant::parse(obj.at("variant").get<std::string>());
    m.iterations = obj.value("iterations", 0);
    m.converged = obj.value("converged", false);
    m.objective = obj.value("objective", 0.0);
    for (double sd : m.feature_stds) {
      if (!(sd > 0.0)) throw ValidationError("feature_stds must all be > 0");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what(), 1);
  }
}

void write_mcs(std::ostream& out, const std::vector<McsRow>& rows) {
  for (const auto& r : rows) {
    nlohmann::ordered_json obj;
    obj["prompt_id"] = r.prompt_id;
    obj["model_id"] = r.model_id;
    obj["ticker"] = r.ticker;
    obj["date"] = r.date.iso();
    obj["mcs"] = r.mcs;
    obj["tau"] = r.tau;
    out << obj.dump() << '\n';
  }
}

std::vector<McsRow> read_mcs(std::istream& in) {
  std::vector<McsRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      McsRow r;
      r.prompt_id = obj.at("prompt_id").get<std::string>();
      r.model_id = obj.at("model_id").get<std::string>();
      r.ticker = obj.at("ticker").get<std::string>();
      r.date = Date::parse(obj.at("date").get<std::string>());
      r.mcs = obj.at("mcs").get<double>();
      r.tau = obj.at("tau").get<double>();
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("mcs file: ") + e.what(), line_no);
    } catch (const ParseError& e) {
      throw ParseError(std::string("mcs file: ") + e.what(), line_no);
    }
  }
  return rows;
}

}  // namespace memfilter::mcs
