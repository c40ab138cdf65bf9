#include "cgfa/io.hpp"

#include "cgfa/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#ifndef CGFA_DEFAULT_DATA_DIR
#define CGFA_DEFAULT_DATA_DIR "data"
#endif

namespace cgfa {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV record. Quoted fields may contain the delimiter and doubled
// quotes; they may not span lines.
std::vector<std::string> split_record(const std::string& line, char delim, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && trim(field).empty()) {
      quoted = true;
      was_quoted = true;
      field.clear();
    } else if (c == delim) {
      out.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) {
    fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": unterminated quoted field");
  }
  out.push_back(was_quoted ? field : trim(field));
  return out;
}

bool parse_number(const std::string& cell, double& value) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(value);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail(ErrorKind::IoError, "failed writing '" + path + "'");
}

json vec_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

Vector json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i];
  return out;
}

Matrix json_mat(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) fail(ErrorKind::SchemaMismatch, "ragged matrix in model document");
    for (std::size_t k = 0; k < cols; ++k) out(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  }
  return out;
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& name, const CsvOptions& options) {
  Dataset data;
  data.name = name;

  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> line_numbers;
  std::vector<std::string> header;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      data.provenance += trim(std::string_view(line).substr(1)) + "\n";
      continue;
    }
    std::vector<std::string> fields = split_record(line, options.delimiter, line_no);
    if (header.empty()) {
      header = std::move(fields);
      continue;
    }
    if (fields.size() != header.size()) {
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(header.size()) + " fields, found " +
                                      std::to_string(fields.size()));
    }
    records.push_back(std::move(fields));
    line_numbers.push_back(line_no);
  }
  if (header.empty()) fail(ErrorKind::ParseError, name + ": no header row");
  if (records.size() < 2) fail(ErrorKind::ParseError, name + ": need at least two data rows");

  const std::size_t ncol = header.size();
  std::ptrdiff_t label_idx = -1;
  if (!options.label_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), options.label_column);
    if (it == header.end()) {
      fail(ErrorKind::InvalidArgument, name + ": no column named '" + options.label_column + "'");
    }
    label_idx = it - header.begin();
  } else if (options.detect_label && ncol > 1) {
    double tmp = 0.0;
    const bool any_number = std::any_of(records.begin(), records.end(),
                                        [&](const auto& r) { return parse_number(r[0], tmp); });
    if (!any_number) label_idx = 0;
  }

  std::vector<std::size_t> numeric_cols;
  for (std::size_t j = 0; j < ncol; ++j) {
    if (static_cast<std::ptrdiff_t>(j) != label_idx) numeric_cols.push_back(j);
  }
  if (numeric_cols.empty()) fail(ErrorKind::NonNumericColumn, name + ": no numeric columns");

  const auto n = static_cast<Index>(records.size());
  data.X.resize(n, static_cast<Index>(numeric_cols.size()));
  for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
    const std::size_t j = numeric_cols[k];
    data.columns.push_back(header[j]);
    double v = 0.0;
    const bool any_number = std::any_of(records.begin(), records.end(),
                                        [&](const auto& r) { return parse_number(r[j], v); });
    if (!any_number) {
      fail(ErrorKind::NonNumericColumn, name + ": column '" + header[j] +
                                            "' holds no numbers; pass it as the label column");
    }
    for (Index i = 0; i < n; ++i) {
      const std::string& cell = records[static_cast<std::size_t>(i)][j];
      if (!parse_number(cell, v)) {
        fail(ErrorKind::ParseError, name + ": line " + std::to_string(line_numbers[static_cast<std::size_t>(i)]) +
                                        " (data row " + std::to_string(i + 1) + "), column '" + header[j] +
                                        "': cannot parse '" + cell + "' as a finite number");
      }
      data.X(i, static_cast<Index>(k)) = v;
    }
  }
  if (label_idx >= 0) {
    data.label_column = header[static_cast<std::size_t>(label_idx)];
    for (const auto& r : records) data.labels.push_back(r[static_cast<std::size_t>(label_idx)]);
  }
  if (options.standardize) standardize(data);
  return data;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  return parse_csv(read_file(path), std::filesystem::path(path).filename().string(), options);
}

void standardize(Dataset& data) {
  if (data.standardization) return;
  const Index n = data.n();
  Standardization s;
  s.center = data.X.colwise().mean();
  const Matrix centered = data.X.rowwise() - s.center.transpose();
  s.scale = (centered.array().square().colwise().sum() / static_cast<double>(n - 1)).sqrt();
  for (Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 0.0)) {
      fail(ErrorKind::InvalidArgument, "cannot standardize constant column '" +
                                           data.columns[static_cast<std::size_t>(j)] + "'");
    }
  }
  data.X = centered.array().rowwise() / s.scale.transpose().array();
  data.standardization = std::move(s);
}

const std::vector<BundledDataset>& bundled_datasets() {
  static const std::vector<BundledDataset> list = {
      {"state.x77", "state_x77.csv", "State",
       "50 US states, 8 socio-economic variables (1977 Statistical Abstract)", 50, 8},
      {"f.voles", "f_voles.csv", "Species",
       "86 female voles of two species, age and 6 skull measurements", 86, 7},
  };
  return list;
}

std::string data_dir() {
  if (const char* env = std::getenv("CGFA_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return CGFA_DEFAULT_DATA_DIR;
}

std::string bundled_path(const BundledDataset& d) {
  return (std::filesystem::path(data_dir()) / d.file).string();
}

bool bundled_available(const BundledDataset& d) { return std::filesystem::exists(bundled_path(d)); }

Dataset load_bundled(const std::string& name, bool standardize_data) {
  for (const BundledDataset& d : bundled_datasets()) {
    if (name != d.name && name != std::filesystem::path(d.file).stem().string()) continue;
    if (!bundled_available(d)) {
      fail(ErrorKind::DatasetUnavailable, "bundled dataset '" + d.name + "' is not installed (expected " +
                                              bundled_path(d) + ")");
    }
    CsvOptions opts;
    opts.label_column = d.label_column;
    opts.standardize = standardize_data;
    Dataset data = load_csv(bundled_path(d), opts);
    data.name = d.name;
    if (data.n() != d.rows || data.p() != d.cols) {
      std::ostringstream msg;
      msg << "bundled dataset '" << d.name << "' has shape " << data.n() << "x" << data.p() << ", expected "
          << d.rows << "x" << d.cols;
      fail(ErrorKind::SchemaMismatch, msg.str());
    }
    return data;
  }
  fail(ErrorKind::InvalidArgument, "unknown bundled dataset '" + name + "'");
}

ModelDocument make_document(const FitResult& result, const Dataset& data, const FitConfig& cfg) {
  ModelDocument doc;
  doc.model = result.model;
  doc.columns = data.columns;
  doc.standardization = data.standardization;
  doc.fit.loglik = result.scoring.loglik;
  doc.fit.bic = result.scoring.bic;
  doc.fit.n_params = result.scoring.n_params;
  doc.fit.n = result.scoring.n;
  doc.fit.iterations = result.iterations;
  doc.fit.converged = result.converged;
  doc.fit.epsilon = cfg.epsilon;
  doc.fit.alpha_min = cfg.alpha_min;
  doc.fit.eta_max = cfg.eta_max;
  doc.fit.seed = cfg.seed;
  doc.fit.baseline_loglik = result.baseline_loglik;
  return doc;
}

std::string to_json(const ModelDocument& doc) {
  const Model& m = doc.model;
  json j;
  j["schema_version"] = ModelDocument::kSchemaVersion;
  j["family"] = family_name(m.family);
  j["G"] = m.G();
  j["q"] = m.q();
  j["p"] = m.p();
  j["columns"] = doc.columns;
  if (doc.standardization) {
    j["standardization"] = {{"center", vec_json(doc.standardization->center)},
                            {"scale", vec_json(doc.standardization->scale)}};
  }
  json comps = json::array();
  for (const ModelComponent& c : m.components) {
    json cj;
    cj["mu"] = vec_json(c.mu);
    if (is_factor(m.family)) {
      cj["Lambda"] = mat_json(c.loadings);
      cj["Psi"] = vec_json(c.uniquenesses);
    } else {
      cj["Sigma"] = mat_json(c.sigma);
    }
    if (is_contaminated(m.family)) {
      cj["alpha"] = c.alpha;
      cj["eta"] = c.eta;
    }
    comps.push_back(std::move(cj));
  }
  j["parameters"] = {{"pi", vec_json(m.pi)}, {"components", comps}};
  j["fit"] = {{"loglik", doc.fit.loglik},
              {"bic", doc.fit.bic},
              {"n_params", doc.fit.n_params},
              {"n", doc.fit.n},
              {"iterations", doc.fit.iterations},
              {"converged", doc.fit.converged},
              {"epsilon", doc.fit.epsilon},
              {"alpha_min", doc.fit.alpha_min},
              {"eta_max", doc.fit.eta_max},
              {"seed", doc.fit.seed},
              {"baseline_loglik", doc.fit.baseline_loglik}};
  return j.dump(2) + "\n";
}

ModelDocument model_from_json(const std::string& text) {
  ModelDocument doc;
  try {
    const json j = json::parse(text);
    if (!j.is_object() || !j.contains("schema_version")) {
      fail(ErrorKind::SchemaMismatch, "model document has no schema_version");
    }
    const int version = j.at("schema_version").get<int>();
    if (version != ModelDocument::kSchemaVersion) {
      fail(ErrorKind::SchemaMismatch, "model document schema_version " + std::to_string(version) +
                                          " is not supported (expected " +
                                          std::to_string(ModelDocument::kSchemaVersion) + ")");
    }
    Model& m = doc.model;
    try {
      m.family = parse_family(j.at("family").get<std::string>());
    } catch (const Error& e) {
      fail(ErrorKind::SchemaMismatch, e.what());
    }
    doc.columns = j.at("columns").get<std::vector<std::string>>();
    if (j.contains("standardization") && !j.at("standardization").is_null()) {
      const json& s = j.at("standardization");
      doc.standardization = Standardization{json_vec(s.at("center")), json_vec(s.at("scale"))};
    }
    const json& params = j.at("parameters");
    m.pi = json_vec(params.at("pi"));
    for (const json& cj : params.at("components")) {
      ModelComponent c;
      c.mu = json_vec(cj.at("mu"));
      if (is_factor(m.family)) {
        c.loadings = json_mat(cj.at("Lambda"));
        c.uniquenesses = json_vec(cj.at("Psi"));
      } else {
        c.sigma = json_mat(cj.at("Sigma"));
      }
      if (is_contaminated(m.family)) {
        c.alpha = cj.at("alpha").get<double>();
        c.eta = cj.at("eta").get<double>();
      }
      m.components.push_back(std::move(c));
    }
    if (m.components.empty() || m.pi.size() != m.G()) {
      fail(ErrorKind::SchemaMismatch, "model document has inconsistent components and pi");
    }
    if (static_cast<Index>(doc.columns.size()) != m.p()) {
      fail(ErrorKind::SchemaMismatch, "model document column list does not match the dimension");
    }
    for (const ModelComponent& c : m.components) {
      const bool bad = c.mu.size() != m.p() ||
                       (is_factor(m.family) ? (c.loadings.rows() != m.p() || c.loadings.cols() != m.q() ||
                                               c.uniquenesses.size() != m.p())
                                            : (c.sigma.rows() != m.p() || c.sigma.cols() != m.p()));
      if (bad) fail(ErrorKind::SchemaMismatch, "model document component has the wrong shape");
    }
    if (j.contains("fit")) {
      const json& f = j.at("fit");
      doc.fit.loglik = f.value("loglik", 0.0);
      doc.fit.bic = f.value("bic", 0.0);
      doc.fit.n_params = f.value("n_params", std::size_t{0});
      doc.fit.n = f.value("n", std::size_t{0});
      doc.fit.iterations = f.value("iterations", 0);
      doc.fit.converged = f.value("converged", true);
      doc.fit.epsilon = f.value("epsilon", 1e-3);
      doc.fit.alpha_min = f.value("alpha_min", 0.5);
      doc.fit.eta_max = f.value("eta_max", 1000.0);
      doc.fit.seed = f.value("seed", std::uint64_t{1});
      doc.fit.baseline_loglik = f.value("baseline_loglik", 0.0);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::SchemaMismatch, std::string("malformed model document: ") + e.what());
  }
  return doc;
}

void save_model(const ModelDocument& doc, const std::string& path) { write_file(path, to_json(doc)); }

ModelDocument load_model(const std::string& path) { return model_from_json(read_file(path)); }

Matrix prepare_for_model(const ModelDocument& doc, const Dataset& data) {
  if (data.columns != doc.columns) {
    fail(ErrorKind::SchemaMismatch, "dataset columns do not match the columns the model was fitted on");
  }
  if (!doc.standardization) {
    if (data.standardization) {
      fail(ErrorKind::SchemaMismatch, "model was fitted on raw data but the dataset is standardized");
    }
    return data.X;
  }
  if (data.standardization) {
    const bool same = data.standardization->center == doc.standardization->center &&
                      data.standardization->scale == doc.standardization->scale;
    if (!same) fail(ErrorKind::SchemaMismatch, "dataset standardization differs from the model's");
    return data.X;
  }
  const Standardization& s = *doc.standardization;
  if (s.center.size() != data.p() || s.scale.size() != data.p()) {
    fail(ErrorKind::SchemaMismatch, "standardization size does not match the dataset");
  }
  return (data.X.rowwise() - s.center.transpose()).array().rowwise() / s.scale.transpose().array();
}

ModelScoring score_document(const ModelDocument& doc, const Dataset& data) {
  return score_model(doc.model, prepare_for_model(doc, data));
}

std::string flags_csv(const Dataset& data, const ModelScoring& scoring) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "row_index,label,good_prob,bad_flag,w_weight\n";
  for (Index i = 0; i < scoring.good_prob.size(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const std::string label = data.has_labels() ? data.labels[ii] : std::to_string(scoring.labels[ii] + 1);
    out << i + 1 << ',' << csv_field(label) << ',' << scoring.good_prob(i) << ','
        << (scoring.bad_flags[ii] ? 1 : 0) << ',' << scoring.map_weight(i) << '\n';
  }
  return out.str();
}

void write_flags(const std::string& path, const Dataset& data, const ModelScoring& scoring) {
  write_file(path, flags_csv(data, scoring));
}

std::string plot_json(const ModelDocument& doc, const Dataset& data, int grid) {
  const Matrix X = prepare_for_model(doc, data);
  const ModelScoring s = score_model(doc.model, X);
  const Index p = X.cols();

  json j;
  j["columns"] = std::vector<std::string>(doc.columns.begin(), doc.columns.begin() + std::min<Index>(2, p));
  json points = json::array();
  for (Index i = 0; i < X.rows(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    json pt;
    pt["row"] = i + 1;
    pt["x"] = X(i, 0);
    if (p > 1) pt["y"] = X(i, 1);
    if (data.has_labels()) pt["label"] = data.labels[ii];
    pt["cluster"] = s.labels[ii] + 1;
    pt["good_prob"] = s.good_prob(i);
    pt["bad"] = static_cast<bool>(s.bad_flags[ii]);
    points.push_back(std::move(pt));
  }
  j["points"] = std::move(points);

  if (grid > 0) {
    if (p != 2) {
      fail(ErrorKind::DimensionUnsupported,
           "contour grids need exactly 2 variables; the model has " + std::to_string(p));
    }
    const Vector lo = X.colwise().minCoeff();
    const Vector hi = X.colwise().maxCoeff();
    const Vector pad = 0.1 * (hi - lo);
    const Vector a = lo - pad;
    const Vector b = hi + pad;
    auto axis = [&](Index k) {
      std::vector<double> v(static_cast<std::size_t>(grid));
      for (int t = 0; t < grid; ++t) {
        v[static_cast<std::size_t>(t)] = grid == 1 ? 0.5 * (a(k) + b(k)) : a(k) + (b(k) - a(k)) * t / (grid - 1);
      }
      return v;
    };
    const std::vector<double> xs = axis(0);
    const std::vector<double> ys = axis(1);
    Matrix pts(static_cast<Index>(grid) * grid, 2);
    for (int r = 0; r < grid; ++r) {
      for (int c = 0; c < grid; ++c) {
        pts(r * grid + c, 0) = xs[static_cast<std::size_t>(c)];
        pts(r * grid + c, 1) = ys[static_cast<std::size_t>(r)];
      }
    }
    const Vector log_density = model_log_density(doc.model, pts);
    json density = json::array();
    for (int r = 0; r < grid; ++r) {
      std::vector<double> row(static_cast<std::size_t>(grid));
      for (int c = 0; c < grid; ++c) row[static_cast<std::size_t>(c)] = std::exp(log_density(r * grid + c));
      density.push_back(row);
    }
    j["contour"] = {{"x_grid", xs}, {"y_grid", ys}, {"density", density}};
  }
  return j.dump(2) + "\n";
}

std::vector<double> expand_range(const ValueRange& r) {
  if (!(r.step > 0.0) || !std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    fail(ErrorKind::InvalidArgument, "value range needs finite lo <= hi and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((r.hi - r.lo) / r.step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = r.lo + static_cast<double>(k) * r.step;
  return out;
}

int count_misclassified(const std::vector<int>& clusters, const std::vector<std::string>& classes,
                        const std::vector<std::size_t>& skip) {
  if (clusters.size() != classes.size()) {
    fail(ErrorKind::InvalidArgument, "count_misclassified: length mismatch");
  }
  std::vector<std::string> names = classes;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  const int n_clusters = clusters.empty() ? 0 : *std::max_element(clusters.begin(), clusters.end()) + 1;
  const int k = std::max<int>(n_clusters, static_cast<int>(names.size()));
  if (k > 8) fail(ErrorKind::InvalidArgument, "count_misclassified: too many groups for exhaustive matching");

  std::vector<int> cls(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    cls[i] = static_cast<int>(std::lower_bound(names.begin(), names.end(), classes[i]) - names.begin());
  }
  std::vector<bool> skipped(classes.size(), false);
  for (std::size_t s : skip) {
    if (s < skipped.size()) skipped[s] = true;
  }

  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  int best = std::numeric_limits<int>::max();
  do {
    int errors = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      if (!skipped[i] && perm[static_cast<std::size_t>(clusters[i])] != cls[i]) ++errors;
    }
    best = std::min(best, errors);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<StudyRow> run_perturbation_study(const Dataset& base, std::size_t row, const std::string& column,
                                             const std::vector<double>& values,
                                             const StudySettings& settings) {
  if (row >= static_cast<std::size_t>(base.n())) {
    fail(ErrorKind::InvalidArgument, "perturbation row " + std::to_string(row + 1) + " is out of range (n = " +
                                         std::to_string(base.n()) + ")");
  }
  const auto col_it = std::find(base.columns.begin(), base.columns.end(), column);
  if (col_it == base.columns.end()) fail(ErrorKind::InvalidArgument, "no numeric column named '" + column + "'");
  if (values.empty()) fail(ErrorKind::InvalidArgument, "perturbation study needs at least one value");
  const auto col = static_cast<Index>(col_it - base.columns.begin());
  const auto r = static_cast<Index>(row);

  std::vector<StudyRow> out;
  for (double value : values) {
    StudyRow sr;
    sr.value = value;
    Matrix X = base.X;
    X(r, col) = base.standardization
                    ? (value - base.standardization->center(col)) / base.standardization->scale(col)
                    : value;
    try {
      const Selection sel = grid_search(X, settings.family, settings.g_range, settings.q_range, settings.cfg,
                                        settings.threads);
      const FitResult& best = sel.best;
      sr.ok = true;
      sr.best_g = best.model.G();
      sr.best_q = best.model.q();
      sr.bic = best.scoring.bic;
      if (base.has_labels()) sr.misclassified = count_misclassified(best.scoring.labels, base.labels, {row});
      sr.perturbed_bad = best.scoring.bad_flags[row];
      sr.perturbed_eta = best.model.components[static_cast<std::size_t>(best.scoring.labels[row])].eta;
    } catch (const Error& e) {
      sr.failure = std::string(to_string(e.kind())) + ": " + e.what();
    }
    out.push_back(std::move(sr));
  }
  return out;
}

std::string study_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "value,status,best_G,best_q,bic,misclassified,perturbed_bad,perturbed_eta\n";
  for (const StudyRow& r : rows) {
    out << r.value << ',' << csv_field(r.ok ? std::string("ok") : "failed: " + r.failure) << ',';
    if (r.ok) {
      out << r.best_g << ',' << r.best_q << ',' << r.bic << ',';
      if (r.misclassified >= 0) out << r.misclassified;
      out << ',' << (r.perturbed_bad ? 1 : 0) << ',' << r.perturbed_eta;
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cgfa
