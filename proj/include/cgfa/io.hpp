#pragma once

#include "cgfa/config.hpp"
#include "cgfa/model.hpp"
#include "cgfa/modelsel.hpp"
#include "cgfa/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cgfa {

struct Standardization {
  Vector center;
  Vector scale;  // sample standard deviations (divisor n - 1)
};

struct Dataset {
  std::string name;
  std::vector<std::string> columns;  // fitted columns only
  Matrix X;
  std::string label_column;          // empty when there is none
  std::vector<std::string> labels;   // one per row when label_column is set
  std::string provenance;            // '#' lines of the source file
  std::optional<Standardization> standardization;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
  bool has_labels() const { return !label_column.empty(); }
};

struct CsvOptions {
  char delimiter = ',';
  std::string label_column;  // empty: none, unless detected automatically
  // With no label column given, a first column that holds no numbers at all
  // becomes the label column.
  bool detect_label = true;
  bool standardize = false;
};

Dataset load_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const std::string& name, const CsvOptions& options = {});

/// z-scores every column in place and records the transformation.
void standardize(Dataset& data);

struct BundledDataset {
  std::string name;
  std::string file;
  std::string label_column;
  std::string description;
  Index rows = 0;
  Index cols = 0;
};

const std::vector<BundledDataset>& bundled_datasets();
/// CGFA_DATA_DIR from the environment, else the directory configured at build time.
std::string data_dir();
std::string bundled_path(const BundledDataset& d);
bool bundled_available(const BundledDataset& d);
/// Throws DatasetUnavailable when the file is missing and InvalidArgument for
/// unknown names.
Dataset load_bundled(const std::string& name, bool standardize = false);

struct FitMetadata {
  double loglik = 0.0;
  double bic = 0.0;
  std::size_t n_params = 0;
  std::size_t n = 0;
  int iterations = 0;
  bool converged = true;
  double epsilon = 1e-3;
  double alpha_min = 0.5;
  double eta_max = 1000.0;
  std::uint64_t seed = 1;
  double baseline_loglik = 0.0;
};

struct ModelDocument {
  static constexpr int kSchemaVersion = 1;

  Model model;
  std::vector<std::string> columns;
  std::optional<Standardization> standardization;
  FitMetadata fit;
};

ModelDocument make_document(const FitResult& result, const Dataset& data, const FitConfig& cfg);

std::string to_json(const ModelDocument& doc);
ModelDocument model_from_json(const std::string& text);
void save_model(const ModelDocument& doc, const std::string& path);
ModelDocument load_model(const std::string& path);

/// Brings raw data onto the scale the model was fitted on and checks columns.
Matrix prepare_for_model(const ModelDocument& doc, const Dataset& data);
ModelScoring score_document(const ModelDocument& doc, const Dataset& data);

/// Columns row_index,label,good_prob,bad_flag,w_weight; row_index is 1-based.
std::string flags_csv(const Dataset& data, const ModelScoring& scoring);
void write_flags(const std::string& path, const Dataset& data, const ModelScoring& scoring);

/// JSON with a "points" array and, for p = 2 and grid > 0, a "contour" object
/// holding the mixture density over the bounding box widened by 10% per side.
std::string plot_json(const ModelDocument& doc, const Dataset& data, int grid);

struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
};

/// lo, lo + step, ..., up to hi inclusive (with a small tolerance).
std::vector<double> expand_range(const ValueRange& r);

struct StudySettings {
  Family family = Family::mcnfa;
  IntRange g_range{1, 3};
  IntRange q_range{1, 3};
  FitConfig cfg{};
  unsigned threads = 1;
};

struct StudyRow {
  double value = 0.0;
  bool ok = false;
  std::string failure;
  int best_g = 0;
  int best_q = 0;
  double bic = 0.0;
  int misclassified = -1;  // -1 when the data carry no labels
  bool perturbed_bad = false;
  double perturbed_eta = 0.0;
};

/// Smallest number of disagreements between cluster labels and class labels
/// over all one-to-one matchings of clusters to classes; rows listed in skip
/// are ignored.
int count_misclassified(const std::vector<int>& clusters, const std::vector<std::string>& classes,
                        const std::vector<std::size_t>& skip = {});

/// row is 0-based.
std::vector<StudyRow> run_perturbation_study(const Dataset& base, std::size_t row,
                                             const std::string& column,
                                             const std::vector<double>& values,
                                             const StudySettings& settings);

std::string study_csv(const std::vector<StudyRow>& rows);

}  // namespace cgfa
