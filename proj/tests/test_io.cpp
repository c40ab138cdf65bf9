#include "doctest.h"

#include "support.hpp"

#include "cgfa/errors.hpp"
#include "cgfa/io.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cgfa;
using namespace cgfa::testing;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a cgfa::Error");
  return ErrorKind::InvalidArgument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cgfa_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

Dataset synthetic(Rng& rng, Index n, Index p) {
  Dataset d;
  d.name = "synthetic";
  d.X = sample_cnfa(rng, n, Vector::Zero(p), normal_matrix(rng, p, 1), random_positive(rng, p, 0.3, 1.0), 0.85, 9.0);
  for (Index j = 0; j < p; ++j) d.columns.push_back("v" + std::to_string(j + 1));
  return d;
}

}  // namespace

TEST_CASE("csv parsing") {
  const Dataset d = parse_csv("a,b\n1,2\n3,4\n5,6\n", "small");
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  CHECK(d.columns == std::vector<std::string>{"a", "b"});
  CHECK(d.X(2, 1) == 6.0);
  CHECK_FALSE(d.has_labels());

  const std::string msg = message_of([] { parse_csv("a,b\n1,2\n3,NA\n", "holes"); });
  CHECK(msg.find("NA") != std::string::npos);
  CHECK(msg.find("'b'") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(kind_of([] { parse_csv("a,b\n1,2\n3,NA\n", "holes"); }) == ErrorKind::ParseError);

  const Dataset labelled = parse_csv("# note\nname;x;y\nfoo;1;2\nbar;3;5\n", "semi", CsvOptions{';', "", true, false});
  CHECK(labelled.label_column == "name");
  CHECK(labelled.labels == std::vector<std::string>{"foo", "bar"});
  CHECK(labelled.provenance == "note\n");
  CHECK(labelled.p() == 2);

  CHECK(kind_of([] { parse_csv("a,b\nx,1\ny,2\n", "t", CsvOptions{',', "", false, false}); }) ==
        ErrorKind::NonNumericColumn);
  CHECK(kind_of([] { parse_csv("a,b\n1,2\n3\n", "ragged"); }) == ErrorKind::ParseError);
}

TEST_CASE("standardization") {
  Dataset d = parse_csv("a,b\n1,10\n2,20\n3,60\n", "s", CsvOptions{',', "", true, true});
  REQUIRE(d.standardization);
  for (Index j = 0; j < 2; ++j) {
    const Vector c = d.X.col(j);
    CHECK(std::abs(c.mean()) < 1e-14);
    CHECK((c.array() - c.mean()).square().sum() / 2.0 == doctest::Approx(1.0));
  }
  CHECK(d.standardization->center(1) == doctest::Approx(30.0));
}

TEST_CASE("bundled datasets") {
  const Dataset x77 = load_bundled("state.x77");
  CHECK(x77.n() == 50);
  CHECK(x77.p() == 8);
  CHECK(x77.columns == std::vector<std::string>{"Population", "Income", "Illiteracy", "Life Exp", "Murder", "HS Grad",
                                                "Frost", "Area"});
  CHECK(x77.labels.front() == "Alabama");
  CHECK(x77.labels.back() == "Wyoming");
  CHECK(x77.X(1, 7) == 566432.0);

  bool found_voles = false;
  for (const BundledDataset& b : bundled_datasets()) {
    if (b.name != "f.voles") continue;
    found_voles = true;
    CHECK(b.rows == 86);
    CHECK(b.cols == 7);
    if (bundled_available(b)) {
      const Dataset v = load_bundled("f.voles");
      CHECK(v.n() == 86);
      CHECK(v.p() == 7);
      CHECK(v.label_column == "Species");
    } else {
      CHECK(kind_of([] { load_bundled("f.voles"); }) == ErrorKind::DatasetUnavailable);
    }
  }
  CHECK(found_voles);
  CHECK(kind_of([] { load_bundled("iris"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("model documents round-trip exactly") {
  Rng rng(70);
  const Dataset data = synthetic(rng, 150, 5);
  for (const ModelId id : {ModelId{Family::cn, 1, 0}, ModelId{Family::gaussian, 1, 0}, ModelId{Family::cnfa, 1, 2},
                           ModelId{Family::gfa, 1, 1}, ModelId{Family::mcnfa, 2, 1}, ModelId{Family::mgfa, 2, 2}}) {
    CAPTURE(describe(id));
    const FitConfig cfg;
    const FitResult fit = fit_model(data.X, id, cfg);
    const ModelDocument doc = make_document(fit, data, cfg);
    const auto path = scratch("model.json").string();
    save_model(doc, path);
    const ModelDocument back = load_model(path);
    CHECK(back.model.family == doc.model.family);
    CHECK(back.model.pi == doc.model.pi);
    REQUIRE(back.model.G() == doc.model.G());
    for (int g = 0; g < doc.model.G(); ++g) {
      const ModelComponent& a = doc.model.components[static_cast<std::size_t>(g)];
      const ModelComponent& b = back.model.components[static_cast<std::size_t>(g)];
      CHECK(a.mu == b.mu);
      CHECK(a.sigma == b.sigma);
      CHECK(a.loadings == b.loadings);
      CHECK(a.uniquenesses == b.uniquenesses);
      CHECK(a.alpha == b.alpha);
      CHECK(a.eta == b.eta);
    }
    CHECK(back.fit.bic == doc.fit.bic);
    CHECK(std::abs(score_document(back, data).bic - doc.fit.bic) < 1e-12 * std::abs(doc.fit.bic) + 1e-12);
  }
}

TEST_CASE("model documents reject bad input") {
  CHECK(kind_of([] { model_from_json("{ not json"); }) == ErrorKind::SchemaMismatch);
  CHECK(kind_of([] { model_from_json(R"({"family": "cn"})"); }) == ErrorKind::SchemaMismatch);
  CHECK(kind_of([] { model_from_json(R"({"schema_version": 99})"); }) == ErrorKind::SchemaMismatch);
  CHECK(kind_of([] { load_model("/nonexistent/dir/model.json"); }) == ErrorKind::IoError);

  Rng rng(71);
  const Dataset data = synthetic(rng, 80, 3);
  const FitResult fit = fit_model(data.X, ModelId{Family::cn, 1, 0});
  json j = json::parse(to_json(make_document(fit, data, {})));
  j["unknown_field"] = 1;
  CHECK_NOTHROW(model_from_json(j.dump()));
  j["parameters"]["components"][0]["mu"] = json::array({1.0});
  CHECK(kind_of([&] { model_from_json(j.dump()); }) == ErrorKind::SchemaMismatch);

  Dataset renamed = data;
  renamed.columns[0] = "other";
  const ModelDocument doc = make_document(fit, data, {});
  CHECK(kind_of([&] { score_document(doc, renamed); }) == ErrorKind::SchemaMismatch);
}

TEST_CASE("flags table") {
  Rng rng(72);
  Dataset data = synthetic(rng, 40, 3);
  const FitResult fit = fit_model(data.X, ModelId{Family::cn, 1, 0});
  const std::string csv = flags_csv(data, fit.scoring);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "row_index,label,good_prob,bad_flag,w_weight");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
  }
  CHECK(rows == 40);
}

TEST_CASE("plot data") {
  Rng rng(73);
  const Dataset d2 = synthetic(rng, 200, 2);
  const FitConfig cfg;
  const ModelDocument doc2 = make_document(fit_model(d2.X, ModelId{Family::cn, 1, 0}, cfg), d2, cfg);

  const json small = json::parse(plot_json(doc2, d2, 3));
  CHECK(small["points"].size() == 200);
  const json& density = small["contour"]["density"];
  REQUIRE(density.size() == 3);
  for (const json& row : density) {
    REQUIRE(row.size() == 3);
    for (const json& v : row) CHECK(v.get<double>() > 0.0);
  }
  const double lo = d2.X.col(0).minCoeff(), hi = d2.X.col(0).maxCoeff();
  CHECK(small["contour"]["x_grid"][0].get<double>() == doctest::Approx(lo - 0.1 * (hi - lo)));

  // Odd grid: the centre cell is near the sample mean and beats every corner.
  const json fine = json::parse(plot_json(doc2, d2, 41));
  const json& dens = fine["contour"]["density"];
  const Vector mean = d2.X.colwise().mean();
  double at_mean = 0.0, best_dist = 1e300;
  for (int r = 0; r < 41; ++r) {
    for (int c = 0; c < 41; ++c) {
      const double dx = fine["contour"]["x_grid"][c].get<double>() - mean(0);
      const double dy = fine["contour"]["y_grid"][r].get<double>() - mean(1);
      if (dx * dx + dy * dy < best_dist) {
        best_dist = dx * dx + dy * dy;
        at_mean = dens[r][c].get<double>();
      }
    }
  }
  for (int r : {0, 40})
    for (int c : {0, 40}) CHECK(at_mean > dens[r][c].get<double>());

  const Dataset d8 = synthetic(rng, 100, 8);
  const ModelDocument doc8 = make_document(fit_model(d8.X, ModelId{Family::cnfa, 1, 1}, cfg), d8, cfg);
  const json scatter = json::parse(plot_json(doc8, d8, 0));
  CHECK(scatter["points"].size() == 100);
  CHECK_FALSE(scatter.contains("contour"));
  CHECK(kind_of([&] { plot_json(doc8, d8, 10); }) == ErrorKind::DimensionUnsupported);
}

TEST_CASE("value ranges and misclassification counts") {
  CHECK(expand_range({450, 800, 10}).size() == 36);
  CHECK(expand_range({450, 800, 10}).back() == doctest::Approx(800.0));
  CHECK(expand_range({1, 1, 5}).size() == 1);
  CHECK(kind_of([] { expand_range({2, 1, 1}); }) == ErrorKind::InvalidArgument);

  const std::vector<std::string> cls = {"a", "a", "a", "b", "b", "b"};
  CHECK(count_misclassified({1, 1, 1, 0, 0, 0}, cls) == 0);
  CHECK(count_misclassified({1, 1, 0, 0, 0, 0}, cls) == 1);
  CHECK(count_misclassified({1, 1, 0, 0, 0, 0}, cls, {2}) == 0);
  CHECK(count_misclassified({0, 0, 0, 0, 0, 0}, cls) == 3);
  CHECK(count_misclassified({0, 1, 2, 0, 1, 2}, cls) == 4);
}

TEST_CASE("perturbation study emits one row per value") {
  Rng rng(74);
  Dataset base;
  base.name = "two groups";
  const Index n = 60, p = 4;
  Vector shift = Vector::Zero(p);
  shift(0) = 10.0;
  const Matrix A = sample_cnfa(rng, n, Vector::Zero(p), normal_matrix(rng, p, 1), random_positive(rng, p, 0.3, 1));
  const Matrix B = sample_cnfa(rng, n, shift, normal_matrix(rng, p, 1), random_positive(rng, p, 0.3, 1));
  base.X.resize(2 * n, p);
  base.X << A, B;
  for (Index j = 0; j < p; ++j) base.columns.push_back("c" + std::to_string(j));
  base.label_column = "group";
  for (Index i = 0; i < 2 * n; ++i) base.labels.push_back(i < n ? "A" : "B");

  StudySettings settings;
  settings.g_range = {2, 2};
  settings.q_range = {1, 1};
  const std::vector<double> values = {12.0, 20.0};
  const std::vector<StudyRow> rows = run_perturbation_study(base, 5, "c1", values, settings);
  REQUIRE(rows.size() == 2);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].value == values[k]);
    INFO(rows[k].failure);
    REQUIRE(rows[k].ok);
    CHECK(rows[k].best_g == 2);
    CHECK(rows[k].misclassified == 0);
    CHECK(rows[k].perturbed_bad);
  }
  CHECK(rows[1].perturbed_eta > rows[0].perturbed_eta);

  const std::string csv = study_csv(rows);
  CHECK(csv.rfind("value,status,best_G,best_q,bic,misclassified,perturbed_bad,perturbed_eta\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  // A range that no candidate can fit still yields a row per value.
  Dataset tiny = base;
  tiny.X = base.X.topRows(6);
  tiny.labels.resize(6);
  settings.g_range = {3, 3};
  settings.q_range = {2, 2};
  const std::vector<StudyRow> failed = run_perturbation_study(tiny, 0, "c0", {1.0, 2.0, 3.0}, settings);
  REQUIRE(failed.size() == 3);
  for (const StudyRow& r : failed) {
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.failure.empty());
  }
  CHECK(kind_of([&] { run_perturbation_study(base, 9999, "c0", values, settings); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { run_perturbation_study(base, 0, "nope", values, settings); }) == ErrorKind::InvalidArgument);
}
