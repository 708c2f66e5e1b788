// Multiclass logistic regression (maximum entropy) with a Gaussian prior,
// trained by L-BFGS with Armijo backtracking. Training is single threaded
// and keeps every reduction in a fixed order, so a given dataset and options
// always produce bitwise-identical models.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cpa/error.hpp"
#include "cpa/features.hpp"

namespace cpa {

// Always-on intercept feature added to every example.
inline constexpr const char* kBiasFeature = "__BIAS__";

struct LabeledExample {
  FeatureVector features;
  std::string label;
};

struct TrainOptions {
  double sigma = 1.0;        // Gaussian prior width; +inf disables the prior
  int max_iterations = 500;
  double tolerance = 1e-6;   // stop when the gradient 2-norm drops below this
  std::function<void(int, double)> on_iteration;  // (iteration, objective)
};

struct TrainInfo {
  int iterations = 0;
  double objective = 0.0;      // regularized log-likelihood at the solution
  double gradient_norm = 0.0;
  bool converged = false;
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// The differentiable training objective: regularized conditional
// log-likelihood L(w) = sum_i log p(y_i|x_i) - ||w||^2 / (2 sigma^2), over a
// dense weight layout of one block of |classes| weights per feature.
// Exposed separately so the gradient can be checked against finite
// differences.
class MaxentObjective {
 public:
  MaxentObjective(std::span<const LabeledExample> examples, double sigma) {
    if (examples.empty()) throw InvariantError("no training examples");
    if (!(sigma > 0.0)) throw InvariantError("sigma must be positive");
    inv_sigma2_ = std::isinf(sigma) ? 0.0 : 1.0 / (sigma * sigma);

    std::set<std::string> cls, feats;
    feats.insert(kBiasFeature);
    for (const LabeledExample& e : examples) {
      cls.insert(e.label);
      for (const std::string& ind : e.features.indicators) feats.insert(ind);
      for (const auto& [name, v] : e.features.reals) feats.insert(name);
    }
    classes_.assign(cls.begin(), cls.end());
    features_.assign(feats.begin(), feats.end());
    std::unordered_map<std::string_view, int> cidx, fidx;
    for (int i = 0; i < n_classes(); ++i) cidx.emplace(classes_[static_cast<size_t>(i)], i);
    for (int i = 0; i < n_features(); ++i) fidx.emplace(features_[static_cast<size_t>(i)], i);

    for (const LabeledExample& e : examples) {
      Ex ex;
      ex.label = cidx.at(e.label);
      for (const std::string& ind : e.features.indicators)
        ex.feats.emplace_back(fidx.at(ind), 1.0);
      for (const auto& [name, v] : e.features.reals)
        ex.feats.emplace_back(fidx.at(name), v);
      ex.feats.emplace_back(fidx.at(kBiasFeature), 1.0);
      std::sort(ex.feats.begin(), ex.feats.end());
      examples_.push_back(std::move(ex));
    }
  }

  int n_classes() const { return static_cast<int>(classes_.size()); }
  int n_features() const { return static_cast<int>(features_.size()); }
  int dimension() const { return n_classes() * n_features(); }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<std::string>& features() const { return features_; }

  // Fills grad with the gradient of L and returns L itself.
  double value_and_gradient(std::span<const double> w, std::span<double> grad) const {
    const int C = n_classes();
    double value = 0.0;
    for (int d = 0; d < dimension(); ++d) {
      grad[static_cast<size_t>(d)] = -inv_sigma2_ * w[static_cast<size_t>(d)];
      value -= 0.5 * inv_sigma2_ * w[static_cast<size_t>(d)] * w[static_cast<size_t>(d)];
    }
    std::vector<double> scores(static_cast<size_t>(C));
    for (const Ex& e : examples_) {
      std::fill(scores.begin(), scores.end(), 0.0);
      for (const auto& [f, v] : e.feats)
        for (int c = 0; c < C; ++c)
          scores[static_cast<size_t>(c)] += v * w[static_cast<size_t>(f * C + c)];
      double mx = *std::max_element(scores.begin(), scores.end());
      double z = 0.0;
      for (double s : scores) z += std::exp(s - mx);
      double log_z = mx + std::log(z);
      value += scores[static_cast<size_t>(e.label)] - log_z;
      for (const auto& [f, v] : e.feats)
        for (int c = 0; c < C; ++c) {
          double p = std::exp(scores[static_cast<size_t>(c)] - log_z);
          grad[static_cast<size_t>(f * C + c)] +=
              v * ((c == e.label ? 1.0 : 0.0) - p);
        }
    }
    return value;
  }

 private:
  struct Ex {
    std::vector<std::pair<int, double>> feats;  // (feature idx, value), sorted
    int label = 0;
  };

  std::vector<std::string> classes_;
  std::vector<std::string> features_;
  std::vector<Ex> examples_;
  double inv_sigma2_ = 1.0;
};

// A trained model: sorted class list plus sparse per-feature weight blocks.
class MaxentModel {
 public:
  std::vector<std::string> classes;
  std::unordered_map<std::string, std::vector<double>> weights;
  double sigma = 1.0;
  TrainInfo info;

  // Class posteriors for one feature vector. Unknown features contribute
  // nothing, so a vector of unseen features yields the bias-only (class
  // prior) distribution.
  std::map<std::string, double> predict_proba(const FeatureVector& fv) const {
    if (classes.empty()) throw InvariantError("predicting with an empty model");
    const int C = static_cast<int>(classes.size());
    std::vector<double> scores(static_cast<size_t>(C), 0.0);
    auto accumulate = [&](const std::string& key, double v) {
      auto it = weights.find(key);
      if (it == weights.end()) return;
      for (int c = 0; c < C; ++c)
        scores[static_cast<size_t>(c)] += v * it->second[static_cast<size_t>(c)];
    };
    accumulate(kBiasFeature, 1.0);
    for (const std::string& ind : fv.indicators) accumulate(ind, 1.0);
    for (const auto& [name, v] : fv.reals) accumulate(name, v);

    double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - mx);
    std::map<std::string, double> out;
    for (int c = 0; c < C; ++c)
      out[classes[static_cast<size_t>(c)]] =
          std::exp(scores[static_cast<size_t>(c)] - mx) / z;
    return out;
  }

  // Most probable class; ties break toward the lexicographically smaller.
  std::string predict(const FeatureVector& fv) const {
    auto proba = predict_proba(fv);
    auto best = proba.begin();
    for (auto it = proba.begin(); it != proba.end(); ++it)
      if (it->second > best->second) best = it;
    return best->first;
  }

  void save(std::ostream& out) const {
    out << "cpa-maxent 1\n";
    out << "sigma\t" << detail::fmt_double(sigma) << '\n';
    out << "converged\t" << (info.converged ? 1 : 0) << '\n';
    out << "iterations\t" << info.iterations << '\n';
    out << "objective\t" << detail::fmt_double(info.objective) << '\n';
    out << "gradient_norm\t" << detail::fmt_double(info.gradient_norm) << '\n';
    out << "classes";
    for (const std::string& c : classes) out << '\t' << c;
    out << '\n';
    std::map<std::string, const std::vector<double>*> sorted;
    for (const auto& [f, w] : weights) sorted.emplace(f, &w);
    out << "features\t" << sorted.size() << '\n';
    for (const auto& [f, w] : sorted) {
      out << f;
      for (double x : *w) out << '\t' << detail::fmt_double(x);
      out << '\n';
    }
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file " + path.string());
    save(out);
    if (!out) throw IoError("failed while writing " + path.string());
  }

  static MaxentModel load(std::istream& in, const std::string& name = "<model>") {
    MaxentModel m;
    std::string line;
    int lineno = 0;
    auto next = [&]() -> std::string& {
      if (!std::getline(in, line))
        throw ParseError("model file " + name + " truncated", lineno);
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    };
    if (next() != "cpa-maxent 1")
      throw ParseError("not a model file (bad magic)", 1);
    auto field = [&](const char* key) -> std::string {
      next();
      std::string prefix = std::string(key) + "\t";
      if (!line.starts_with(prefix))
        throw ParseError(std::string("expected '") + key + "' field", lineno);
      return line.substr(prefix.size());
    };
    m.sigma = detail::parse_double(field("sigma"), name);
    m.info.converged = field("converged") == "1";
    m.info.iterations = static_cast<int>(detail::parse_double(field("iterations"), name));
    m.info.objective = detail::parse_double(field("objective"), name);
    m.info.gradient_norm = detail::parse_double(field("gradient_norm"), name);
    auto class_fields = detail::split_tabs_copy(next());
    if (class_fields.empty() || class_fields[0] != "classes")
      throw ParseError("expected 'classes' field", lineno);
    m.classes.assign(class_fields.begin() + 1, class_fields.end());
    if (m.classes.empty())
      throw ParseError("model has no classes", lineno);
    long n_feats = static_cast<long>(detail::parse_double(field("features"), name));
    for (long i = 0; i < n_feats; ++i) {
      auto f = detail::split_tabs_copy(next());
      if (f.size() != m.classes.size() + 1)
        throw ParseError("weight row has wrong arity", lineno);
      std::vector<double> w;
      for (size_t c = 1; c < f.size(); ++c)
        w.push_back(detail::parse_double(f[c], name));
      if (!m.weights.emplace(f[0], std::move(w)).second)
        throw ParseError("duplicate weight row '" + f[0] + "'", lineno);
    }
    return m;
  }

  static MaxentModel load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file " + path.string());
    return load(in, path.string());
  }
};

namespace detail {

// Two-loop recursion L-BFGS with history m=8, minimizing -L. The line search
// is plain Armijo backtracking, which keeps the objective monotone.
inline TrainInfo lbfgs_maximize(const MaxentObjective& obj, std::vector<double>& w,
                                const TrainOptions& opts) {
  const int dim = obj.dimension();
  const size_t m = 8;
  std::vector<std::vector<double>> hist_s, hist_y;
  std::vector<double> hist_rho;

  std::vector<double> g(static_cast<size_t>(dim));
  // f = -L throughout; g is the gradient of f.
  auto eval = [&](std::span<const double> x, std::span<double> grad_out) {
    double L = obj.value_and_gradient(x, grad_out);
    for (double& d : grad_out) d = -d;
    return -L;
  };
  double f = eval(w, g);

  auto norm2 = [](std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };

  TrainInfo info;
  std::vector<double> d(static_cast<size_t>(dim)), w_new(static_cast<size_t>(dim)),
      g_new(static_cast<size_t>(dim));
  int iter = 0;
  bool converged = false;
  while (iter < opts.max_iterations) {
    double gnorm = norm2(g);
    if (gnorm < opts.tolerance) {
      converged = true;
      break;
    }

    // d = -H g via the two-loop recursion over the stored history.
    std::vector<double> q(g.begin(), g.end());
    std::vector<double> alpha(hist_s.size());
    for (size_t i = hist_s.size(); i-- > 0;) {
      double a = 0;
      for (int k = 0; k < dim; ++k) a += hist_s[i][static_cast<size_t>(k)] * q[static_cast<size_t>(k)];
      a *= hist_rho[i];
      alpha[i] = a;
      for (int k = 0; k < dim; ++k) q[static_cast<size_t>(k)] -= a * hist_y[i][static_cast<size_t>(k)];
    }
    if (!hist_s.empty()) {
      double sy = 0, yy = 0;
      const auto& s_last = hist_s.back();
      const auto& y_last = hist_y.back();
      for (int k = 0; k < dim; ++k) {
        sy += s_last[static_cast<size_t>(k)] * y_last[static_cast<size_t>(k)];
        yy += y_last[static_cast<size_t>(k)] * y_last[static_cast<size_t>(k)];
      }
      double gamma = sy / yy;
      for (double& x : q) x *= gamma;
    }
    for (size_t i = 0; i < hist_s.size(); ++i) {
      double b = 0;
      for (int k = 0; k < dim; ++k) b += hist_y[i][static_cast<size_t>(k)] * q[static_cast<size_t>(k)];
      b *= hist_rho[i];
      for (int k = 0; k < dim; ++k)
        q[static_cast<size_t>(k)] += (alpha[i] - b) * hist_s[i][static_cast<size_t>(k)];
    }
    double gd = 0;
    for (int k = 0; k < dim; ++k) {
      d[static_cast<size_t>(k)] = -q[static_cast<size_t>(k)];
      gd += g[static_cast<size_t>(k)] * d[static_cast<size_t>(k)];
    }
    if (gd >= 0) {
      // Not a descent direction (can happen after a degenerate update);
      // fall back to steepest descent.
      hist_s.clear();
      hist_y.clear();
      hist_rho.clear();
      gd = 0;
      for (int k = 0; k < dim; ++k) {
        d[static_cast<size_t>(k)] = -g[static_cast<size_t>(k)];
        gd -= g[static_cast<size_t>(k)] * g[static_cast<size_t>(k)];
      }
    }

    double t = hist_s.empty() ? 1.0 / std::max(1.0, gnorm) : 1.0;
    const double c1 = 1e-4;
    double f_new = 0;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (int k = 0; k < dim; ++k)
        w_new[static_cast<size_t>(k)] = w[static_cast<size_t>(k)] + t * d[static_cast<size_t>(k)];
      f_new = eval(w_new, g_new);
      if (f_new <= f + c1 * t * gd) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // step has shrunk to nothing, give up here

    std::vector<double> s_vec(static_cast<size_t>(dim)), y_vec(static_cast<size_t>(dim));
    double sy = 0;
    for (int k = 0; k < dim; ++k) {
      s_vec[static_cast<size_t>(k)] = w_new[static_cast<size_t>(k)] - w[static_cast<size_t>(k)];
      y_vec[static_cast<size_t>(k)] = g_new[static_cast<size_t>(k)] - g[static_cast<size_t>(k)];
      sy += s_vec[static_cast<size_t>(k)] * y_vec[static_cast<size_t>(k)];
    }
    if (sy > 1e-10) {
      hist_s.push_back(std::move(s_vec));
      hist_y.push_back(std::move(y_vec));
      hist_rho.push_back(1.0 / sy);
      if (hist_s.size() > m) {
        hist_s.erase(hist_s.begin());
        hist_y.erase(hist_y.begin());
        hist_rho.erase(hist_rho.begin());
      }
    }
    w.swap(w_new);
    g.swap(g_new);
    f = f_new;
    ++iter;
    if (opts.on_iteration) opts.on_iteration(iter, -f);
  }

  info.iterations = iter;
  info.objective = -f;
  info.gradient_norm = norm2(g);
  info.converged = converged || norm2(g) < opts.tolerance;
  return info;
}

}  // namespace detail

inline MaxentModel train_maxent(const std::vector<LabeledExample>& examples,
                                const TrainOptions& opts = {}) {
  MaxentObjective obj(examples, opts.sigma);
  if (obj.n_classes() < 2)
    throw InvariantError("training needs at least two distinct labels, got " +
                         std::to_string(obj.n_classes()));
  std::vector<double> w(static_cast<size_t>(obj.dimension()), 0.0);
  TrainInfo info = detail::lbfgs_maximize(obj, w, opts);

  MaxentModel model;
  model.classes = obj.classes();
  model.sigma = opts.sigma;
  model.info = info;
  const int C = obj.n_classes();
  for (int fi = 0; fi < obj.n_features(); ++fi) {
    std::vector<double> block(static_cast<size_t>(C));
    for (int c = 0; c < C; ++c)
      block[static_cast<size_t>(c)] = w[static_cast<size_t>(fi * C + c)];
    model.weights.emplace(obj.features()[static_cast<size_t>(fi)], std::move(block));
  }
  return model;
}

}  // namespace cpa
