// Command-line front end. Talks to the library only through cgfa.h.
#include "cgfa/cgfa.h"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

// Thrown for library failures; carries the message already formatted.
struct Failure {
  std::string message;
};

void check(cgfa_status s, const std::string& context) {
  if (s == CGFA_OK) return;
  throw Failure{context + ": " + cgfa_status_name(s) + ": " + cgfa_last_error()};
}

struct DatasetDeleter {
  void operator()(cgfa_dataset* d) const { cgfa_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(cgfa_model* m) const { cgfa_model_free(m); }
};
struct SelectionDeleter {
  void operator()(cgfa_selection* s) const { cgfa_selection_free(s); }
};
struct StudyDeleter {
  void operator()(cgfa_study* s) const { cgfa_study_free(s); }
};
using DatasetPtr = std::unique_ptr<cgfa_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<cgfa_model, ModelDeleter>;

struct Range {
  int lo = 1;
  int hi = 1;
};

Range parse_int_range(const std::string& text, const std::string& flag) {
  Range r;
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      const std::string a = text.substr(0, dots);
      const std::string b = text.substr(dots + 2);
      r.lo = std::stoi(a, &used);
      if (used != a.size()) throw std::invalid_argument(text);
      r.hi = std::stoi(b, &used);
      if (used != b.size()) throw std::invalid_argument(text);
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected A..B, got '" + text + "'");
  }
  if (r.lo < 1 || r.lo > r.hi) throw CLI::ValidationError(flag, "needs 1 <= A <= B, got '" + text + "'");
  return r;
}

struct ValueSpec {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
};

ValueSpec parse_values(const std::string& text) {
  ValueSpec v;
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  try {
    if (a == std::string::npos || b == std::string::npos) throw std::invalid_argument(text);
    v.lo = std::stod(text.substr(0, a));
    v.hi = std::stod(text.substr(a + 1, b - a - 1));
    v.step = std::stod(text.substr(b + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--values", "expected lo:hi:step, got '" + text + "'");
  }
  if (!(v.step > 0.0) || v.lo > v.hi) throw CLI::ValidationError("--values", "needs lo <= hi and step > 0");
  return v;
}

struct DataFlags {
  std::string input;
  std::string label_column;
  char delimiter = ',';
  bool standardize = false;

  void add(CLI::App* app, const char* input_flag, bool required) {
    auto* opt = app->add_option(input_flag, input, "CSV file or bundled dataset name (see `datasets`)");
    if (required) opt->required();
    app->add_option("--label-column", label_column, "Column holding class labels, excluded from fitting");
    app->add_option("--delimiter", delimiter, "Field delimiter")->capture_default_str();
    app->add_flag("--standardize", standardize, "z-score every column before fitting");
  }

  DatasetPtr load() const {
    cgfa_dataset* d = nullptr;
    const bool is_file = std::filesystem::exists(input);
    if (!is_file) {
      for (size_t k = 0; k < cgfa_bundled_count(); ++k) {
        if (input == cgfa_bundled_name(k)) {
          check(cgfa_dataset_load_bundled(input.c_str(), standardize ? 1 : 0, &d), "loading " + input);
          return DatasetPtr(d);
        }
      }
    }
    check(cgfa_dataset_load_csv(input.c_str(), delimiter, label_column.empty() ? nullptr : label_column.c_str(),
                                standardize ? 1 : 0, &d),
          "loading " + input);
    return DatasetPtr(d);
  }
};

struct FitFlags {
  cgfa_fit_options opts{};
  FitFlags() { cgfa_fit_options_default(&opts); }

  void add(CLI::App* app) {
    app->add_option("--alpha-min", opts.alpha_min, "Lower bound on the proportion of good points")
        ->capture_default_str();
    app->add_option("--epsilon", opts.epsilon, "Aitken convergence tolerance")->capture_default_str();
    app->add_option("--max-iter", opts.max_iter, "Iteration limit")->capture_default_str();
    app->add_option("--seed", opts.seed, "Seed for the k-means start")->capture_default_str();
  }
};

std::string label_of(const cgfa_dataset* data, size_t i) {
  const char* l = cgfa_dataset_label(data, i);
  return l != nullptr ? std::string(l) : std::string();
}

void print_model_summary(const cgfa_model* m, const cgfa_dataset* data) {
  const cgfa_family fam = cgfa_model_family(m);
  std::printf("model      %s", cgfa_family_name(fam));
  if (fam == CGFA_FAMILY_MGFA || fam == CGFA_FAMILY_MCNFA) std::printf("  G=%d", cgfa_model_G(m));
  if (cgfa_model_q(m) > 0) std::printf("  q=%d", cgfa_model_q(m));
  std::printf("\n");
  std::printf("data       %s  n=%zu  p=%zu\n", cgfa_dataset_name(data), cgfa_dataset_rows(data),
              cgfa_dataset_cols(data));
  std::printf("loglik     %.6f\n", cgfa_model_loglik(m));
  std::printf("params     %zu\n", cgfa_model_n_params(m));
  std::printf("BIC        %.6f\n", cgfa_model_bic(m));
  std::printf("iterations %d (%s)\n", cgfa_model_iterations(m),
              cgfa_model_converged(m) ? "converged" : "iteration limit reached");

  const bool contaminated = fam == CGFA_FAMILY_CN || fam == CGFA_FAMILY_CNFA || fam == CGFA_FAMILY_MCNFA;
  for (int g = 0; g < cgfa_model_G(m); ++g) {
    double pi = 0.0, alpha = 0.0, eta = 0.0;
    check(cgfa_model_component(m, g, &pi, &alpha, &eta), "reading component");
    if (contaminated) {
      std::printf("component  %d  pi=%.4f  alpha=%.4f  eta=%.4f\n", g + 1, pi, alpha, eta);
    } else if (cgfa_model_G(m) > 1) {
      std::printf("component  %d  pi=%.4f\n", g + 1, pi);
    }
  }

  if (contaminated) {
    double stat = 0.0, p = 0.0;
    const int df = 2 * cgfa_model_G(m);
    if (cgfa_lr_test(cgfa_model_baseline_loglik(m), cgfa_model_loglik(m), df, &stat, &p) == CGFA_OK) {
      std::printf("LR test    vs Gaussian counterpart: LR=%.4f df=%d p=%.4g\n", stat, df, p);
    }
  }

  std::vector<size_t> bad;
  for (size_t i = 0; i < cgfa_model_rows(m); ++i) {
    int flag = 0;
    check(cgfa_model_point(m, i, nullptr, nullptr, &flag, nullptr), "reading point");
    if (flag) bad.push_back(i);
  }
  std::printf("bad points %zu\n", bad.size());
  for (size_t i : bad) {
    double good = 0.0;
    cgfa_model_point(m, i, nullptr, &good, nullptr, nullptr);
    const std::string label = label_of(data, i);
    std::printf("  row %zu%s%s  P(good)=%.4f\n", i + 1, label.empty() ? "" : "  ", label.c_str(), good);
  }
}

int run_fit(cgfa_family family, const DataFlags& df, const FitFlags& ff, int g, int q, const std::string& out_model,
            const std::string& out_flags) {
  DatasetPtr data = df.load();
  cgfa_model* raw = nullptr;
  check(cgfa_fit(data.get(), family, g, q, &ff.opts, &raw), std::string("fitting ") + cgfa_family_name(family));
  ModelPtr model(raw);
  print_model_summary(model.get(), data.get());
  if (!out_model.empty()) {
    check(cgfa_model_save(model.get(), out_model.c_str()), "writing " + out_model);
    std::printf("model written to %s\n", out_model.c_str());
  }
  if (!out_flags.empty()) {
    check(cgfa_model_write_flags(model.get(), data.get(), out_flags.c_str()), "writing " + out_flags);
    std::printf("flags written to %s\n", out_flags.c_str());
  }
  return kExitOk;
}

int run_select(cgfa_family family, const DataFlags& df, const FitFlags& ff, Range g, Range q,
               const std::string& out_model) {
  DatasetPtr data = df.load();
  cgfa_selection* raw = nullptr;
  check(cgfa_select(data.get(), family, g.lo, g.hi, q.lo, q.hi, &ff.opts, &raw), "grid search");
  std::unique_ptr<cgfa_selection, SelectionDeleter> sel(raw);

  std::printf("%-4s %-8s %3s %3s %6s %16s %16s\n", "rank", "family", "G", "q", "m", "loglik", "BIC");
  for (size_t k = 0; k < cgfa_selection_count(sel.get()); ++k) {
    cgfa_score s{};
    check(cgfa_selection_entry(sel.get(), k, &s), "reading selection");
    if (s.fitted) {
      std::printf("%-4zu %-8s %3d %3d %6zu %16.6f %16.6f\n", k + 1, cgfa_family_name(s.family), s.G, s.q,
                  s.n_params, s.loglik, s.bic);
    } else {
      std::printf("%-4s %-8s %3d %3d %6s  failed: %s\n", "-", cgfa_family_name(s.family), s.G, s.q, "-",
                  cgfa_selection_failure(sel.get(), k));
    }
  }
  cgfa_model* best_raw = nullptr;
  check(cgfa_selection_best(sel.get(), &best_raw), "reading best model");
  ModelPtr best(best_raw);
  std::printf("\nbest by BIC:\n");
  print_model_summary(best.get(), data.get());
  if (!out_model.empty()) {
    check(cgfa_model_save(best.get(), out_model.c_str()), "writing " + out_model);
    std::printf("model written to %s\n", out_model.c_str());
  }
  return kExitOk;
}

int run_plot(const std::string& model_path, const DataFlags& df, int grid, const std::string& out) {
  cgfa_model* raw = nullptr;
  check(cgfa_model_load(model_path.c_str(), &raw), "loading " + model_path);
  ModelPtr model(raw);
  DatasetPtr data = df.load();
  double loglik = 0.0, bic = 0.0;
  check(cgfa_model_score(model.get(), data.get(), &loglik, &bic), "scoring");

  int effective_grid = grid;
  if (cgfa_model_p(model.get()) != 2 && grid > 0) {
    std::fprintf(stderr, "contour refused: DimensionUnsupported: contours need p = 2, model has p = %zu; "
                         "writing the point table only\n",
                 cgfa_model_p(model.get()));
    effective_grid = 0;
  }
  check(cgfa_model_write_plot(model.get(), data.get(), effective_grid, out.c_str()), "writing " + out);
  std::printf("plot data written to %s (loglik %.6f, BIC %.6f)\n", out.c_str(), loglik, bic);
  return kExitOk;
}

int run_study(const DataFlags& df, size_t row, const std::string& column, const ValueSpec& values, cgfa_family family,
              Range g, Range q, const FitFlags& ff, const std::string& out) {
  DatasetPtr data = df.load();
  if (row < 1 || row > cgfa_dataset_rows(data.get())) {
    throw CLI::ValidationError("--row", "must be between 1 and " + std::to_string(cgfa_dataset_rows(data.get())));
  }
  cgfa_study* raw = nullptr;
  check(cgfa_perturbation_study(data.get(), row - 1, column.c_str(), values.lo, values.hi, values.step, family, g.lo,
                                g.hi, q.lo, q.hi, &ff.opts, &raw),
        "perturbation study");
  std::unique_ptr<cgfa_study, StudyDeleter> study(raw);

  std::printf("%10s %3s %3s %16s %8s %4s %10s\n", "value", "G", "q", "BIC", "miscls", "bad", "eta");
  for (size_t k = 0; k < cgfa_study_count(study.get()); ++k) {
    cgfa_study_row r{};
    check(cgfa_study_row_get(study.get(), k, &r), "reading study");
    if (r.ok) {
      std::printf("%10g %3d %3d %16.6f %8d %4s %10.4f\n", r.value, r.best_g, r.best_q, r.bic, r.misclassified,
                  r.perturbed_bad ? "yes" : "no", r.perturbed_eta);
    } else {
      std::printf("%10g  failed: %s\n", r.value, cgfa_study_failure(study.get(), k));
    }
  }
  if (!out.empty()) {
    check(cgfa_study_write_csv(study.get(), out.c_str()), "writing " + out);
    std::printf("study written to %s\n", out.c_str());
  }
  return kExitOk;
}

int run_datasets() {
  for (size_t k = 0; k < cgfa_bundled_count(); ++k) {
    std::printf("%-10s %-9s %s\n           %s\n", cgfa_bundled_name(k),
                cgfa_bundled_available(k) ? "available" : "missing", cgfa_bundled_description(k),
                cgfa_bundled_path(k));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contaminated Gaussian factor analysis: fitting, outlier flagging and model selection"};
  app.require_subcommand(1);

  struct FitCommand {
    const char* name;
    cgfa_family family;
    const char* help;
  };
  const FitCommand fit_commands[] = {
      {"fit-cn", CGFA_FAMILY_CN, "Fit a contaminated Gaussian distribution"},
      {"fit-gfa", CGFA_FAMILY_GFA, "Fit a Gaussian factor analyzer"},
      {"fit-cnfa", CGFA_FAMILY_CNFA, "Fit a contaminated Gaussian factor analyzer"},
      {"fit-mgfa", CGFA_FAMILY_MGFA, "Fit a mixture of Gaussian factor analyzers"},
      {"fit-mcnfa", CGFA_FAMILY_MCNFA, "Fit a mixture of contaminated Gaussian factor analyzers"},
  };

  DataFlags data_flags;
  FitFlags fit_flags;
  int g = 1;
  int q = 1;
  std::string out_model;
  std::string out_flags;
  std::vector<std::pair<CLI::App*, cgfa_family>> fit_apps;
  for (const FitCommand& c : fit_commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    data_flags.add(sub, "--input", true);
    fit_flags.add(sub);
    sub->add_option("--q", q, "Number of latent factors")->capture_default_str();
    sub->add_option("--g", g, "Number of mixture components")->capture_default_str();
    sub->add_option("--out-model", out_model, "Write the fitted model document (JSON)");
    sub->add_option("--out-flags", out_flags, "Write per-point good/bad flags (CSV)");
    fit_apps.emplace_back(sub, c.family);
  }

  std::string family_name = "mcnfa";
  std::string g_range = "1..3";
  std::string q_range = "1..3";
  CLI::App* select = app.add_subcommand("select", "Rank (G, q) candidates by BIC");
  data_flags.add(select, "--input", true);
  fit_flags.add(select);
  select->add_option("--family", family_name, "gaussian, cn, gfa, cnfa, mgfa or mcnfa")->capture_default_str();
  select->add_option("--g-range", g_range, "Component counts A..B")->capture_default_str();
  select->add_option("--q-range", q_range, "Factor counts A..B")->capture_default_str();
  select->add_option("--threads", fit_flags.opts.threads, "Concurrent fits (0 = all cores)")->capture_default_str();
  select->add_option("--out-model", out_model, "Write the best model document (JSON)");

  std::string model_path;
  int grid = 100;
  std::string out;
  CLI::App* plot = app.add_subcommand("plot-data", "Emit point and contour tables for plotting");
  plot->add_option("--model", model_path, "Model document written by a fit command")->required();
  data_flags.add(plot, "--input", true);
  plot->add_option("--grid", grid, "Contour grid size per axis (p = 2 only)")->capture_default_str();
  plot->add_option("--out", out, "Output JSON file")->required();

  size_t row = 0;
  std::string column;
  std::string values;
  CLI::App* study = app.add_subcommand("perturb-study", "Overwrite one cell over a range and re-select the model");
  data_flags.add(study, "--dataset", true);
  fit_flags.add(study);
  study->add_option("--row", row, "1-based row to perturb")->required();
  study->add_option("--column", column, "Column to perturb")->required();
  study->add_option("--values", values, "Range lo:hi:step")->required();
  study->add_option("--family", family_name, "Family searched for each value")->capture_default_str();
  study->add_option("--g-range", g_range, "Component counts A..B")->capture_default_str();
  study->add_option("--q-range", q_range, "Factor counts A..B")->capture_default_str();
  study->add_option("--threads", fit_flags.opts.threads, "Concurrent fits (0 = all cores)")->capture_default_str();
  study->add_option("--out", out, "Output CSV file");

  CLI::App* datasets = app.add_subcommand("datasets", "List the bundled datasets");

  try {
    app.parse(argc, argv);

    auto family_from_flag = [&](const std::string& name) {
      cgfa_family f{};
      if (cgfa_family_parse(name.c_str(), &f) != CGFA_OK) {
        throw CLI::ValidationError("--family", "unknown family '" + name + "'");
      }
      return f;
    };

    for (const auto& [sub, family] : fit_apps) {
      if (sub->parsed()) return run_fit(family, data_flags, fit_flags, g, q, out_model, out_flags);
    }
    if (select->parsed()) {
      return run_select(family_from_flag(family_name), data_flags, fit_flags, parse_int_range(g_range, "--g-range"),
                        parse_int_range(q_range, "--q-range"), out_model);
    }
    if (plot->parsed()) return run_plot(model_path, data_flags, grid, out);
    if (study->parsed()) {
      return run_study(data_flags, row, column, parse_values(values), family_from_flag(family_name),
                       parse_int_range(g_range, "--g-range"), parse_int_range(q_range, "--q-range"), fit_flags, out);
    }
    if (datasets->parsed()) return run_datasets();
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return kExitUsage;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
