#include "cgfa/model.hpp"

#include "cgfa/cn.hpp"
#include "cgfa/cnfa.hpp"
#include "cgfa/criteria.hpp"
#include "cgfa/density.hpp"
#include "cgfa/errors.hpp"
#include "cgfa/mcnfa.hpp"

#include <sstream>

namespace cgfa {

namespace {

ModelComponent from_cnfa(const CnfaParams& c) {
  ModelComponent m;
  m.mu = c.mu;
  m.loadings = c.loadings;
  m.uniquenesses = c.uniquenesses;
  m.alpha = c.alpha;
  m.eta = c.eta;
  return m;
}

Model from_mixture(Family family, const McnfaParams& params) {
  Model m;
  m.family = family;
  m.pi = params.pi;
  for (const CnfaParams& c : params.components) m.components.push_back(from_cnfa(c));
  return m;
}

Model from_single(Family family, ModelComponent c) {
  Model m;
  m.family = family;
  m.pi = Vector::Ones(1);
  m.components.push_back(std::move(c));
  return m;
}

void check_model(const Model& model, Index p) {
  const ModelId id = model.id();
  if (model.components.empty()) fail(ErrorKind::InvalidArgument, "model has no components");
  if (model.pi.size() != model.G()) fail(ErrorKind::InvalidArgument, "model: pi size mismatch");
  if (!is_mixture(model.family) && model.G() != 1) {
    fail(ErrorKind::InvalidArgument, std::string(family_name(model.family)) + " model must have one component");
  }
  for (const ModelComponent& c : model.components) {
    if (c.mu.size() != p) fail(ErrorKind::InvalidArgument, "model dimension does not match data");
    if (is_factor(model.family)) {
      if (c.loadings.rows() != p || c.uniquenesses.size() != p || c.loadings.cols() != id.q) {
        fail(ErrorKind::InvalidArgument, "model: loadings or uniquenesses have the wrong shape");
      }
      if ((c.uniquenesses.array() <= 0.0).any()) {
        fail(ErrorKind::InvalidArgument, "model: uniquenesses must be positive");
      }
    } else if (c.sigma.rows() != p || c.sigma.cols() != p) {
      fail(ErrorKind::InvalidArgument, "model: Sigma has the wrong shape");
    }
  }
}

std::vector<ComponentDensity> densities(const Model& model) {
  std::vector<ComponentDensity> out;
  for (int g = 0; g < model.G(); ++g) {
    const ModelComponent& c = model.components[static_cast<std::size_t>(g)];
    CovFactor f = is_factor(model.family) ? CovFactor::low_rank(LowRankCov{c.loadings, c.uniquenesses})
                                          : CovFactor::dense(c.sigma);
    out.push_back(ComponentDensity{model.pi(g), c.mu, std::move(f), c.alpha, c.eta});
  }
  return out;
}

}  // namespace

const char* family_name(Family f) noexcept {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::cn: return "cn";
    case Family::gfa: return "gfa";
    case Family::cnfa: return "cnfa";
    case Family::mgfa: return "mgfa";
    case Family::mcnfa: return "mcnfa";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::gaussian, Family::cn, Family::gfa, Family::cnfa, Family::mgfa, Family::mcnfa}) {
    if (name == family_name(f)) return f;
  }
  fail(ErrorKind::InvalidArgument, "unknown model family '" + std::string(name) + "'");
}

bool is_contaminated(Family f) noexcept {
  return f == Family::cn || f == Family::cnfa || f == Family::mcnfa;
}

bool is_factor(Family f) noexcept { return f != Family::gaussian && f != Family::cn; }

bool is_mixture(Family f) noexcept { return f == Family::mgfa || f == Family::mcnfa; }

std::string describe(const ModelId& id) {
  std::ostringstream out;
  out << family_name(id.family);
  if (is_mixture(id.family)) out << " G=" << id.G;
  if (is_factor(id.family)) out << " q=" << id.q;
  return out.str();
}

int Model::q() const {
  if (!is_factor(family) || components.empty()) return 0;
  return static_cast<int>(components.front().loadings.cols());
}

std::size_t count_params(const ModelId& id, Index p) {
  if (!is_factor(id.family)) return count_params_gaussian(p, is_contaminated(id.family));
  if (is_mixture(id.family)) {
    return count_params_mcnfa(id.G, static_cast<int>(p), id.q, is_contaminated(id.family));
  }
  return count_params_cnfa(static_cast<int>(p), id.q, is_contaminated(id.family));
}

ModelScoring score_model(const Model& model, const Matrix& X) {
  check_model(model, X.cols());
  const MixtureEvaluation ev = evaluate_mixture(X, densities(model), is_contaminated(model.family));
  const Index n = X.rows();
  ModelScoring s;
  s.loglik = ev.loglik();
  s.n = static_cast<std::size_t>(n);
  s.n_params = count_params(model.id(), X.cols());
  s.bic = bic(s.loglik, s.n_params, s.n);
  s.z = ev.z;
  s.w = ev.w;
  s.labels.assign(s.n, 0);
  s.good_prob.resize(n);
  s.map_weight.resize(n);
  s.bad_flags.assign(s.n, false);
  for (Index i = 0; i < n; ++i) {
    Index g = 0;
    ev.z.row(i).maxCoeff(&g);
    const auto ii = static_cast<std::size_t>(i);
    s.labels[ii] = static_cast<int>(g);
    s.good_prob(i) = ev.good(i, g);
    s.map_weight(i) = ev.w(i, g);
    s.bad_flags[ii] = s.good_prob(i) <= 0.5;
  }
  return s;
}

Vector model_log_density(const Model& model, const Matrix& X) {
  check_model(model, X.cols());
  return evaluate_mixture(X, densities(model), is_contaminated(model.family)).log_density;
}

double model_logpdf(const Model& model, const Vector& x) {
  return model_log_density(model, x.transpose())(0);
}

FitResult fit_model(const Matrix& X, const ModelId& id, const FitConfig& cfg) {
  FitResult r;
  switch (id.family) {
    case Family::gaussian: {
      const ScatterUpdate mle = gaussian_mle(X);
      r.model = from_single(id.family, ModelComponent{mle.mu, mle.sigma, {}, {}, 1.0, 1.0});
      r.iterations = 0;
      r.converged = true;
      break;
    }
    case Family::cn: {
      const CnFitReport rep = fit_cn(X, cfg);
      r.model = from_single(id.family, ModelComponent{rep.params.mu, rep.params.sigma, {}, {},
                                                      rep.params.alpha, rep.params.eta});
      r.iterations = rep.iterations;
      r.converged = rep.converged;
      r.loglik_trace = rep.loglik_trace;
      r.baseline_loglik = rep.gaussian_loglik;
      break;
    }
    case Family::gfa:
    case Family::cnfa: {
      const CnfaFitReport rep = id.family == Family::gfa ? fit_gfa(X, id.q, cfg) : fit_cnfa(X, id.q, cfg);
      r.model = from_single(id.family, from_cnfa(rep.params));
      if (id.family == Family::gfa) {
        r.model.components.front().alpha = 1.0;
        r.model.components.front().eta = 1.0;
      }
      r.iterations = rep.iterations;
      r.converged = rep.converged;
      r.loglik_trace = rep.loglik_trace;
      r.baseline_loglik = rep.baseline_loglik;
      break;
    }
    case Family::mgfa:
    case Family::mcnfa: {
      const MixtureFitReport rep =
          id.family == Family::mgfa ? fit_mgfa(X, id.G, id.q, cfg) : fit_mcnfa(X, id.G, id.q, cfg);
      r.model = from_mixture(id.family, rep.params);
      if (id.family == Family::mgfa) {
        for (ModelComponent& c : r.model.components) {
          c.alpha = 1.0;
          c.eta = 1.0;
        }
      }
      r.iterations = rep.iterations;
      r.converged = rep.converged;
      r.loglik_trace = rep.loglik_trace;
      r.baseline_loglik = rep.baseline_loglik;
      break;
    }
  }
  r.scoring = score_model(r.model, X);
  if (id.family == Family::gaussian) {
    r.baseline_loglik = r.scoring.loglik;
    r.loglik_trace = {r.scoring.loglik};
  }
  return r;
}

}  // namespace cgfa
