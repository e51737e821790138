// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcnn/model_io.hpp"
#include "pcnn/pipeline.hpp"
#include "pcnn/rng.hpp"

using namespace pcnn;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "pcnn_io_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

ModelBundle make_bundle() {
  ModelBundle bundle;
  bundle.run_id = "cafebabe00000001";
  bundle.problem = "custom";
  bundle.variables = {{"a", Family::Normal, 1.0, 2.0},
                      {"b", Family::Uniform, -0.5, 0.5}};

  std::vector<UnivariateBasis> fams;
  fams.push_back(apc_univariate(analytic_moments(Family::Normal, 6), 3));
  fams.push_back(apc_univariate(analytic_moments(Family::Uniform, 6), 3));
  MomentProvenance prov{MomentSource::Analytic, 0, 0};
  bundle.main.basis = tensor_basis(fams, 3, prov);

  Xoshiro256 rng(1);
  bundle.main.coeffs.resize(static_cast<Eigen::Index>(bundle.main.basis.size()));
  for (Eigen::Index i = 0; i < bundle.main.coeffs.size(); ++i)
    bundle.main.coeffs(i) = 20.0 * rng.next_unit() - 10.0;

  std::vector<UnivariateBasis> fams_low;
  for (const auto& f : fams) fams_low.push_back(truncated(f, 2));
  bundle.aux.basis = tensor_basis(fams_low, 2, prov);
  bundle.aux.net = Mlp::uniform_init(
      {2, 8, 8, static_cast<int>(bundle.aux.basis.size())}, 99);

  bundle.training.epochs = 17;
  bundle.training.n_labeled = 8;
  bundle.training.n_unlabeled = 64;
  bundle.training.seed_init = 3;
  bundle.training.final_loss.total = 0.123456789012345678;
  return bundle;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("json writer formats doubles losslessly and escapes strings") {
  std::ostringstream os;
  {
    JsonWriter w(os);
    w.begin_object();
    w.key("tenth").value(0.1);
    w.key("third").value(1.0 / 3.0);
    w.key("nan").value(std::numeric_limits<double>::quiet_NaN());
    w.key("text").value("line\n\"quoted\"\\");
    w.key("vec").begin_array().value(1).value(2.5).end_array();
    w.end_object();
  }
  const std::string text = os.str();
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  CHECK(text.find("null") != std::string::npos);
  CHECK(text.find("\\n") != std::string::npos);
  CHECK(text.find("\\\"quoted\\\"") != std::string::npos);
}

TEST_CASE("model bundle round-trips exactly") {
  const auto path = temp_dir() / "bundle.json";
  const ModelBundle bundle = make_bundle();
  save_model(path, bundle);
  const ModelBundle loaded = load_model(path);

  CHECK(loaded.run_id == bundle.run_id);
  CHECK(loaded.problem == bundle.problem);
  REQUIRE(loaded.variables.size() == 2);
  CHECK(loaded.variables[1].family == Family::Uniform);
  CHECK(loaded.variables[1].a == -0.5);

  // %.17g round-trips doubles exactly.
  CHECK(loaded.main.coeffs == bundle.main.coeffs);
  CHECK(loaded.aux.net.pack_params() == bundle.aux.net.pack_params());
  CHECK(loaded.training.final_loss.total == bundle.training.final_loss.total);

  // The reloaded model evaluates identically.
  Xoshiro256 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector2d xi(2.0 * rng.next_unit() - 1.0,
                             2.0 * rng.next_unit() - 1.0);
    CHECK(loaded.main.eval(xi) == bundle.main.eval(xi));
    CHECK(loaded.aux.forward(xi).prediction == bundle.aux.forward(xi).prediction);
  }

  // Saving the loaded bundle reproduces the file byte for byte.
  const auto path2 = temp_dir() / "bundle2.json";
  save_model(path2, loaded);
  std::ifstream f1(path), f2(path2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
}

TEST_CASE("labeled csv round-trips") {
  const auto path = temp_dir() / "labels.csv";
  const std::vector<RandomVariableSpec> specs = {
      {"t", Family::Normal, 5.0, 0.1}, {"L", Family::Uniform, 0.0, 2.0}};

  LabeledSet set;
  set.seed = 9;
  set.kind = SampleKind::LatinHypercube;
  set.xi = sample(specs, 12, set.kind, set.seed).data;
  set.y.resize(12);
  Xoshiro256 rng(10);
  for (Eigen::Index i = 0; i < 12; ++i) set.y(i) = 100.0 * rng.next_unit();

  save_labeled_csv(path, specs, set);
  const LabeledCsv csv = read_labeled_csv(path);
  REQUIRE(csv.columns.size() == 3);
  CHECK(csv.columns[0] == "t");
  CHECK(csv.columns[2] == "g");
  REQUIRE(csv.x.rows() == 12);
  CHECK(csv.y == set.y);  // %.17g exactness

  for (Eigen::Index i = 0; i < 12; ++i)
    for (std::size_t k = 0; k < specs.size(); ++k)
      CHECK(csv.x(i, static_cast<Eigen::Index>(k)) ==
            standardizer_for(specs[k]).destandardize(
                set.xi(i, static_cast<Eigen::Index>(k))));

  CHECK(std::filesystem::exists(path.string() + ".meta.json"));
}

TEST_CASE("csv reader rejects malformed files") {
  const auto path = temp_dir() / "bad.csv";
  {
    std::ofstream out(path);
    out << "a,b,g\n1.0,2.0\n";
  }
  CHECK_THROWS_AS(read_labeled_csv(path), IoError);
  {
    std::ofstream out(path);
    out << "a,g\n1.0,zebra\n";
  }
  CHECK_THROWS_AS(read_labeled_csv(path), IoError);
  CHECK_THROWS_AS(read_labeled_csv(temp_dir() / "missing.csv"), IoError);
}

TEST_CASE("config validation applies defaults and reports all violations") {
  SUBCASE("defaults") {
    const auto cfg = parse_config(R"({"problem": "cantilever_tube"})");
    CHECK(cfg.order_aux == 2);      // p_tilde default
    CHECK(cfg.order_main == 4);
    CHECK(cfg.adam.eta == 1e-3);
    CHECK(cfg.adam.beta1 == 0.9);
    CHECK(cfg.adam.beta2 == 0.999);
    CHECK(cfg.adam.epsilon == 1e-8);
    CHECK(cfg.labeled_kind == SampleKind::LatinHypercube);
    CHECK(cfg.test_kind == SampleKind::MonteCarlo);
    CHECK(cfg.moment_source == MomentSource::Empirical);
    CHECK(cfg.threads == 1);
    // stage seeds derived from the master seed
    CHECK(cfg.seeds.unlabeled != 0);
    CHECK(cfg.seeds.labeled != 0);
    CHECK(cfg.seeds.unlabeled != cfg.seeds.labeled);
  }
  SUBCASE("multiple violations reported with pointers") {
    try {
      parse_config(R"({"problem": "cantilever_tube", "n_unlabeled": -5,
                       "p": 2, "p_tilde": 3})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("/n_unlabeled") != std::string::npos);
      CHECK(msg.find("/p") != std::string::npos);
    }
  }
  SUBCASE("unknown family lists the supported ones") {
    try {
      parse_config(R"({"problem": "custom",
                       "variables": [{"name": "x", "family": "beta", "a": 1, "b": 2}]})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("beta") != std::string::npos);
      CHECK(msg.find("normal") != std::string::npos);
      CHECK(msg.find("uniform") != std::string::npos);
      CHECK(msg.find("gumbel") != std::string::npos);
    }
  }
  SUBCASE("unknown problem is rejected") {
    CHECK_THROWS_AS(parse_config(R"({"problem": "pressure_vessel"})"), ConfigError);
  }
  SUBCASE("variables only belong to custom problems") {
    CHECK_THROWS_AS(
        parse_config(
            R"({"problem": "cantilever_tube",
                "variables": [{"name": "x", "family": "normal", "a": 0, "b": 1}]})"),
        ConfigError);
  }
  SUBCASE("invalid json is a config error") {
    CHECK_THROWS_AS(parse_config("{problem:"), ConfigError);
  }
}

TEST_CASE("resolved config text is a fixed point of parsing") {
  const auto cfg = parse_config(R"({
    "problem": "cantilever_tube",
    "p": 3, "p_tilde": 2,
    "n_labeled": 50, "n_unlabeled": 500, "n_test": 100, "n_mcs": 1000,
    "max_epochs": 10,
    "seeds": {"master": 123},
    "output_dir": "somewhere"
  })");
  const std::string text = resolved_config_text(cfg);
  const auto reparsed = parse_config(text);
  CHECK(resolved_config_text(reparsed) == text);
  CHECK(run_id_for(reparsed) == run_id_for(cfg));
}

TEST_CASE("run id ignores the output location and notes") {
  auto cfg = parse_config(R"({"problem": "cantilever_tube"})");
  const auto id = run_id_for(cfg);
  cfg.output_dir = "elsewhere";
  cfg.notes = "scribble";
  CHECK(run_id_for(cfg) == id);
  cfg.seeds.master += 1;
  cfg.seeds.unlabeled = derive_seed(cfg.seeds.master, 101);
  CHECK(run_id_for(cfg) != id);
}

TEST_CASE("specs fingerprint tracks content") {
  const std::vector<RandomVariableSpec> a = {{"x", Family::Normal, 0.0, 1.0}};
  std::vector<RandomVariableSpec> b = a;
  CHECK(specs_fingerprint(a) == specs_fingerprint(b));
  b[0].b = 2.0;
  CHECK(specs_fingerprint(a) != specs_fingerprint(b));
}

TEST_CASE("report reprints the fit-time summary verbatim") {
  auto cfg = parse_config(R"({
    "problem": "cantilever_tube",
    "p": 3, "p_tilde": 2,
    "aux_hidden": [8, 8],
    "n_labeled": 60, "n_unlabeled": 1500, "n_test": 400, "n_mcs": 20000,
    "max_epochs": 40,
    "seeds": {"master": 4711}
  })");
  cfg.output_dir = (temp_dir() / "report_roundtrip").string();
  std::filesystem::remove_all(cfg.output_dir);

  const RunSummary fit_summary = run_pipeline(cfg, nullptr);
  const RunSummary reported = report_from_dir(cfg.output_dir);

  std::ostringstream at_fit, at_report;
  print_summary(at_fit, fit_summary);
  print_summary(at_report, reported);
  CHECK(at_fit.str() == at_report.str());

  // And the eval subcommand path scores the saved model on a saved test set.
  const auto problem = cantilever_tube_problem();
  const auto test_set = generate_labels(problem, 50, SampleKind::MonteCarlo, 99);
  const auto csv_path = temp_dir() / "report_roundtrip_test.csv";
  save_labeled_csv(csv_path, problem.inputs, test_set);
  const ErrorReport from_csv =
      evaluate_model_csv(fit_summary.paths.model, csv_path);
  const ModelBundle bundle = load_model(fit_summary.paths.model);
  const ErrorReport direct = error_metrics(bundle.main, test_set.xi, test_set.y);
  CHECK(from_csv.rmse == doctest::Approx(direct.rmse).epsilon(1e-12));
  CHECK(from_csv.r2 == doctest::Approx(direct.r2).epsilon(1e-12));
}

TEST_SUITE_END();
