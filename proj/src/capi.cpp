#include "cgfa/cgfa.h"

#include "cgfa/criteria.hpp"
#include "cgfa/errors.hpp"
#include "cgfa/io.hpp"
#include "cgfa/model.hpp"
#include "cgfa/modelsel.hpp"

#include <exception>
#include <fstream>
#include <new>
#include <string>

struct cgfa_dataset {
  cgfa::Dataset data;
};

struct cgfa_model {
  cgfa::ModelDocument doc;
  cgfa::ModelScoring scoring;  // empty until fitted or scored
};

struct cgfa_selection {
  std::vector<cgfa::ModelScore> ranked;
  cgfa_model best;
};

struct cgfa_study {
  std::vector<cgfa::StudyRow> rows;
};

namespace {

thread_local std::string g_last_error;

cgfa_status status_of(cgfa::ErrorKind kind) { return static_cast<cgfa_status>(static_cast<int>(kind) + 1); }

template <class F>
cgfa_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return CGFA_OK;
  } catch (const cgfa::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CGFA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CGFA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return CGFA_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) cgfa::fail(cgfa::ErrorKind::InvalidArgument, what);
}

cgfa::FitConfig config_from(const cgfa_fit_options* options) {
  cgfa_fit_options o;
  cgfa_fit_options_default(&o);
  if (options != nullptr) o = *options;
  require(o.max_iter >= 1, "max_iter must be at least 1");
  require(o.epsilon > 0.0, "epsilon must be positive");
  require(o.kmeans_restarts >= 1, "kmeans_restarts must be at least 1");
  cgfa::FitConfig cfg;
  cfg.alpha_min = o.alpha_min;
  cfg.epsilon = o.epsilon;
  cfg.max_iter = o.max_iter;
  cfg.eta_max = o.eta_max;
  cfg.seed = o.seed;
  cfg.kmeans_restarts = o.kmeans_restarts;
  cfg.box().validate();
  return cfg;
}

unsigned threads_from(const cgfa_fit_options* options) { return options != nullptr ? options->threads : 1u; }

cgfa::Family family_from(cgfa_family f) {
  require(f >= CGFA_FAMILY_GAUSSIAN && f <= CGFA_FAMILY_MCNFA, "unknown family");
  return static_cast<cgfa::Family>(f);
}

}  // namespace

extern "C" {

const char* cgfa_version(void) { return "1.0.0"; }

const char* cgfa_last_error(void) { return g_last_error.c_str(); }

const char* cgfa_status_name(cgfa_status status) {
  if (status == CGFA_OK) return "OK";
  if (status == CGFA_ERR_INTERNAL) return "Internal";
  const int k = static_cast<int>(status) - 1;
  if (k < 0 || k > static_cast<int>(cgfa::ErrorKind::DatasetUnavailable)) return "Unknown";
  return cgfa::to_string(static_cast<cgfa::ErrorKind>(k));
}

const char* cgfa_family_name(cgfa_family family) {
  if (family < CGFA_FAMILY_GAUSSIAN || family > CGFA_FAMILY_MCNFA) return "unknown";
  return cgfa::family_name(static_cast<cgfa::Family>(family));
}

cgfa_status cgfa_family_parse(const char* name, cgfa_family* out) {
  return guard([&] {
    require(name != nullptr && out != nullptr, "null argument");
    *out = static_cast<cgfa_family>(cgfa::parse_family(name));
  });
}

void cgfa_fit_options_default(cgfa_fit_options* options) {
  if (options == nullptr) return;
  const cgfa::FitConfig cfg;
  options->alpha_min = cfg.alpha_min;
  options->epsilon = cfg.epsilon;
  options->max_iter = cfg.max_iter;
  options->eta_max = cfg.eta_max;
  options->seed = cfg.seed;
  options->kmeans_restarts = cfg.kmeans_restarts;
  options->threads = 1;
}

cgfa_status cgfa_dataset_load_csv(const char* path, char delimiter, const char* label_column, int standardize,
                                  cgfa_dataset** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    cgfa::CsvOptions opts;
    opts.delimiter = delimiter == '\0' ? ',' : delimiter;
    if (label_column != nullptr) opts.label_column = label_column;
    opts.standardize = standardize != 0;
    *out = new cgfa_dataset{cgfa::load_csv(path, opts)};
  });
}

cgfa_status cgfa_dataset_load_bundled(const char* name, int standardize, cgfa_dataset** out) {
  return guard([&] {
    require(name != nullptr && out != nullptr, "null argument");
    *out = new cgfa_dataset{cgfa::load_bundled(name, standardize != 0)};
  });
}

void cgfa_dataset_free(cgfa_dataset* data) { delete data; }

size_t cgfa_dataset_rows(const cgfa_dataset* data) {
  return data != nullptr ? static_cast<size_t>(data->data.n()) : 0;
}

size_t cgfa_dataset_cols(const cgfa_dataset* data) {
  return data != nullptr ? static_cast<size_t>(data->data.p()) : 0;
}

const char* cgfa_dataset_name(const cgfa_dataset* data) {
  return data != nullptr ? data->data.name.c_str() : nullptr;
}

const char* cgfa_dataset_column(const cgfa_dataset* data, size_t j) {
  if (data == nullptr || j >= data->data.columns.size()) return nullptr;
  return data->data.columns[j].c_str();
}

const char* cgfa_dataset_label(const cgfa_dataset* data, size_t i) {
  if (data == nullptr || i >= data->data.labels.size()) return nullptr;
  return data->data.labels[i].c_str();
}

cgfa_status cgfa_dataset_value(const cgfa_dataset* data, size_t i, size_t j, double* out) {
  return guard([&] {
    require(data != nullptr && out != nullptr, "null argument");
    require(i < cgfa_dataset_rows(data) && j < cgfa_dataset_cols(data), "index out of range");
    *out = data->data.X(static_cast<cgfa::Index>(i), static_cast<cgfa::Index>(j));
  });
}

size_t cgfa_bundled_count(void) { return cgfa::bundled_datasets().size(); }

const char* cgfa_bundled_name(size_t k) {
  return k < cgfa_bundled_count() ? cgfa::bundled_datasets()[k].name.c_str() : nullptr;
}

const char* cgfa_bundled_description(size_t k) {
  return k < cgfa_bundled_count() ? cgfa::bundled_datasets()[k].description.c_str() : nullptr;
}

const char* cgfa_bundled_path(size_t k) {
  if (k >= cgfa_bundled_count()) return nullptr;
  thread_local std::string path;
  path = cgfa::bundled_path(cgfa::bundled_datasets()[k]);
  return path.c_str();
}

int cgfa_bundled_available(size_t k) {
  return k < cgfa_bundled_count() && cgfa::bundled_available(cgfa::bundled_datasets()[k]) ? 1 : 0;
}

cgfa_status cgfa_fit(const cgfa_dataset* data, cgfa_family family, int G, int q, const cgfa_fit_options* options,
                     cgfa_model** out) {
  return guard([&] {
    require(data != nullptr && out != nullptr, "null argument");
    const cgfa::FitConfig cfg = config_from(options);
    const cgfa::ModelId id{family_from(family), G, q};
    cgfa::FitResult r = cgfa::fit_model(data->data.X, id, cfg);
    auto* m = new cgfa_model{cgfa::make_document(r, data->data, cfg), std::move(r.scoring)};
    *out = m;
  });
}

void cgfa_model_free(cgfa_model* model) { delete model; }

cgfa_family cgfa_model_family(const cgfa_model* model) {
  return model != nullptr ? static_cast<cgfa_family>(model->doc.model.family) : CGFA_FAMILY_GAUSSIAN;
}

int cgfa_model_G(const cgfa_model* model) { return model != nullptr ? model->doc.model.G() : 0; }
int cgfa_model_q(const cgfa_model* model) { return model != nullptr ? model->doc.model.q() : 0; }

size_t cgfa_model_p(const cgfa_model* model) {
  return model != nullptr ? static_cast<size_t>(model->doc.model.p()) : 0;
}

double cgfa_model_loglik(const cgfa_model* model) { return model != nullptr ? model->doc.fit.loglik : 0.0; }
double cgfa_model_bic(const cgfa_model* model) { return model != nullptr ? model->doc.fit.bic : 0.0; }
size_t cgfa_model_n_params(const cgfa_model* model) { return model != nullptr ? model->doc.fit.n_params : 0; }
int cgfa_model_iterations(const cgfa_model* model) { return model != nullptr ? model->doc.fit.iterations : 0; }
int cgfa_model_converged(const cgfa_model* model) { return model != nullptr && model->doc.fit.converged; }

double cgfa_model_baseline_loglik(const cgfa_model* model) {
  return model != nullptr ? model->doc.fit.baseline_loglik : 0.0;
}

cgfa_status cgfa_model_component(const cgfa_model* model, int g, double* pi, double* alpha, double* eta) {
  return guard([&] {
    require(model != nullptr, "null model");
    require(g >= 0 && g < model->doc.model.G(), "component index out of range");
    const auto& c = model->doc.model.components[static_cast<size_t>(g)];
    if (pi != nullptr) *pi = model->doc.model.pi(g);
    if (alpha != nullptr) *alpha = c.alpha;
    if (eta != nullptr) *eta = c.eta;
  });
}

size_t cgfa_model_rows(const cgfa_model* model) {
  return model != nullptr ? model->scoring.labels.size() : 0;
}

cgfa_status cgfa_model_point(const cgfa_model* model, size_t i, int* label, double* good_prob, int* bad_flag,
                             double* weight) {
  return guard([&] {
    require(model != nullptr, "null model");
    require(i < model->scoring.labels.size(), "row index out of range (score the model first)");
    const auto ii = static_cast<cgfa::Index>(i);
    if (label != nullptr) *label = model->scoring.labels[i];
    if (good_prob != nullptr) *good_prob = model->scoring.good_prob(ii);
    if (bad_flag != nullptr) *bad_flag = model->scoring.bad_flags[i] ? 1 : 0;
    if (weight != nullptr) *weight = model->scoring.map_weight(ii);
  });
}

cgfa_status cgfa_model_save(const cgfa_model* model, const char* path) {
  return guard([&] {
    require(model != nullptr && path != nullptr, "null argument");
    cgfa::save_model(model->doc, path);
  });
}

cgfa_status cgfa_model_load(const char* path, cgfa_model** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new cgfa_model{cgfa::load_model(path), {}};
  });
}

cgfa_status cgfa_model_score(cgfa_model* model, const cgfa_dataset* data, double* loglik, double* bic) {
  return guard([&] {
    require(model != nullptr && data != nullptr, "null argument");
    model->scoring = cgfa::score_document(model->doc, data->data);
    if (loglik != nullptr) *loglik = model->scoring.loglik;
    if (bic != nullptr) *bic = model->scoring.bic;
  });
}

cgfa_status cgfa_model_write_flags(const cgfa_model* model, const cgfa_dataset* data, const char* path) {
  return guard([&] {
    require(model != nullptr && data != nullptr && path != nullptr, "null argument");
    cgfa::write_flags(path, data->data, cgfa::score_document(model->doc, data->data));
  });
}

cgfa_status cgfa_model_write_plot(const cgfa_model* model, const cgfa_dataset* data, int grid, const char* path) {
  return guard([&] {
    require(model != nullptr && data != nullptr && path != nullptr, "null argument");
    require(grid >= 0, "grid must be non-negative");
    const std::string text = cgfa::plot_json(model->doc, data->data, grid);
    std::ofstream out(path, std::ios::binary);
    if (!out) cgfa::fail(cgfa::ErrorKind::IoError, std::string("cannot open '") + path + "' for writing");
    out << text;
  });
}

cgfa_status cgfa_lr_test(double loglik_null, double loglik_alt, int df, double* statistic, double* p_value) {
  return guard([&] {
    require(df >= 1, "degrees of freedom must be at least 1");
    const cgfa::LrTestResult r = cgfa::lr_test(loglik_null, loglik_alt, df);
    if (statistic != nullptr) *statistic = r.statistic;
    if (p_value != nullptr) *p_value = r.p_value;
  });
}

cgfa_status cgfa_select(const cgfa_dataset* data, cgfa_family family, int g_lo, int g_hi, int q_lo, int q_hi,
                        const cgfa_fit_options* options, cgfa_selection** out) {
  return guard([&] {
    require(data != nullptr && out != nullptr, "null argument");
    const cgfa::FitConfig cfg = config_from(options);
    cgfa::Selection sel = cgfa::grid_search(data->data.X, family_from(family), cgfa::IntRange{g_lo, g_hi},
                                            cgfa::IntRange{q_lo, q_hi}, cfg, threads_from(options));
    auto* s = new cgfa_selection{std::move(sel.ranked),
                                 cgfa_model{cgfa::make_document(sel.best, data->data, cfg), sel.best.scoring}};
    *out = s;
  });
}

void cgfa_selection_free(cgfa_selection* sel) { delete sel; }

size_t cgfa_selection_count(const cgfa_selection* sel) { return sel != nullptr ? sel->ranked.size() : 0; }

cgfa_status cgfa_selection_entry(const cgfa_selection* sel, size_t k, cgfa_score* out) {
  return guard([&] {
    require(sel != nullptr && out != nullptr, "null argument");
    require(k < sel->ranked.size(), "entry index out of range");
    const cgfa::ModelScore& s = sel->ranked[k];
    out->family = static_cast<cgfa_family>(s.id.family);
    out->G = s.id.G;
    out->q = s.id.q;
    out->fitted = s.fitted ? 1 : 0;
    out->loglik = s.loglik;
    out->n_params = s.m;
    out->n = s.n;
    out->bic = s.bic;
  });
}

const char* cgfa_selection_failure(const cgfa_selection* sel, size_t k) {
  if (sel == nullptr || k >= sel->ranked.size()) return nullptr;
  return sel->ranked[k].failure.c_str();
}

cgfa_status cgfa_selection_best(const cgfa_selection* sel, cgfa_model** out) {
  return guard([&] {
    require(sel != nullptr && out != nullptr, "null argument");
    *out = new cgfa_model(sel->best);
  });
}

cgfa_status cgfa_perturbation_study(const cgfa_dataset* data, size_t row, const char* column, double lo, double hi,
                                    double step, cgfa_family family, int g_lo, int g_hi, int q_lo, int q_hi,
                                    const cgfa_fit_options* options, cgfa_study** out) {
  return guard([&] {
    require(data != nullptr && column != nullptr && out != nullptr, "null argument");
    cgfa::StudySettings settings;
    settings.family = family_from(family);
    settings.g_range = cgfa::IntRange{g_lo, g_hi};
    settings.q_range = cgfa::IntRange{q_lo, q_hi};
    settings.cfg = config_from(options);
    settings.threads = threads_from(options);
    const std::vector<double> values = cgfa::expand_range(cgfa::ValueRange{lo, hi, step});
    *out = new cgfa_study{cgfa::run_perturbation_study(data->data, row, column, values, settings)};
  });
}

void cgfa_study_free(cgfa_study* study) { delete study; }

size_t cgfa_study_count(const cgfa_study* study) { return study != nullptr ? study->rows.size() : 0; }

cgfa_status cgfa_study_row_get(const cgfa_study* study, size_t k, cgfa_study_row* out) {
  return guard([&] {
    require(study != nullptr && out != nullptr, "null argument");
    require(k < study->rows.size(), "row index out of range");
    const cgfa::StudyRow& r = study->rows[k];
    out->value = r.value;
    out->ok = r.ok ? 1 : 0;
    out->best_g = r.best_g;
    out->best_q = r.best_q;
    out->bic = r.bic;
    out->misclassified = r.misclassified;
    out->perturbed_bad = r.perturbed_bad ? 1 : 0;
    out->perturbed_eta = r.perturbed_eta;
  });
}

const char* cgfa_study_failure(const cgfa_study* study, size_t k) {
  if (study == nullptr || k >= study->rows.size()) return nullptr;
  return study->rows[k].failure.c_str();
}

cgfa_status cgfa_study_write_csv(const cgfa_study* study, const char* path) {
  return guard([&] {
    require(study != nullptr && path != nullptr, "null argument");
    std::ofstream out(path, std::ios::binary);
    if (!out) cgfa::fail(cgfa::ErrorKind::IoError, std::string("cannot open '") + path + "' for writing");
    out << cgfa::study_csv(study->rows);
  });
}

}  // extern "C"
