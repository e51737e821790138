// SPDX-License-Identifier: MIT
#include "pcnn/pipeline.hpp"

#include <Eigen/Core>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "pcnn/rng.hpp"

namespace pcnn {

namespace {

using nlohmann::json;

// Stage-seed derivation tags (documented in the README).
enum StageTag : std::uint64_t {
  kTagUnlabeled = 101,
  kTagLabeled = 102,
  kTagInit = 103,
  kTagTest = 104,
  kTagMcs = 105,
};

struct ConfigReader {
  const json& root;
  std::vector<std::string> errors;

  void fail(const std::string& pointer, const std::string& message) {
    errors.push_back(pointer + ": " + message);
  }

  template <typename T>
  T get_or(const json& obj, const std::string& pointer, const std::string& name,
           T fallback) {
    if (!obj.contains(name)) return fallback;
    try {
      return obj.at(name).get<T>();
    } catch (const json::exception&) {
      fail(pointer + "/" + name, "wrong type");
      return fallback;
    }
  }
};

}  // namespace

ProblemConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");

  ConfigReader reader{root, {}};
  ProblemConfig cfg;

  cfg.problem = reader.get_or<std::string>(root, "", "problem", cfg.problem);
  if (cfg.problem != "cantilever_tube" && cfg.problem != "microsatellite" &&
      cfg.problem != "custom")
    reader.fail("/problem", "unknown problem '" + cfg.problem +
                                "' (supported: cantilever_tube, microsatellite, "
                                "custom)");

  if (root.contains("variables")) {
    if (cfg.problem != "custom") {
      reader.fail("/variables", "may only be given for problem 'custom'");
    } else if (!root.at("variables").is_array()) {
      reader.fail("/variables", "must be an array");
    } else {
      std::size_t idx = 0;
      for (const auto& jv : root.at("variables")) {
        const std::string pointer = "/variables/" + std::to_string(idx);
        RandomVariableSpec spec;
        spec.name = reader.get_or<std::string>(jv, pointer, "name",
                                               "x" + std::to_string(idx));
        const auto famname =
            reader.get_or<std::string>(jv, pointer, "family", "normal");
        try {
          spec.family = family_from_name(famname);
        } catch (const ValidationError& e) {
          reader.fail(pointer + "/family", e.what());
        }
        spec.a = reader.get_or<double>(jv, pointer, "a", 0.0);
        spec.b = reader.get_or<double>(jv, pointer, "b", 1.0);
        try {
          validate(spec);
        } catch (const ValidationError& e) {
          reader.fail(pointer, e.what());
        }
        cfg.variables.push_back(std::move(spec));
        ++idx;
      }
      if (cfg.variables.empty())
        reader.fail("/variables", "custom problem needs at least one variable");
    }
  } else if (cfg.problem == "custom") {
    reader.fail("/variables", "required for problem 'custom'");
  }

  cfg.theta1_deg = reader.get_or<double>(root, "", "theta1_deg", cfg.theta1_deg);
  cfg.theta2_deg = reader.get_or<double>(root, "", "theta2_deg", cfg.theta2_deg);

  cfg.order_main = reader.get_or<int>(root, "", "p", cfg.order_main);
  cfg.order_aux = reader.get_or<int>(root, "", "p_tilde", 2);
  if (cfg.order_main < 1) reader.fail("/p", "must be >= 1");
  if (cfg.order_aux < 0) reader.fail("/p_tilde", "must be >= 0");
  if (cfg.order_main <= cfg.order_aux)
    reader.fail("/p", "expansion order p must exceed the auxiliary order p_tilde");

  if (root.contains("aux_hidden")) {
    cfg.aux_hidden.clear();
    std::size_t idx = 0;
    for (const auto& jn : root.at("aux_hidden")) {
      int width = 0;
      try {
        width = jn.get<int>();
      } catch (const json::exception&) {
        reader.fail("/aux_hidden/" + std::to_string(idx), "wrong type");
      }
      if (width < 1)
        reader.fail("/aux_hidden/" + std::to_string(idx), "must be >= 1");
      cfg.aux_hidden.push_back(width);
      ++idx;
    }
    if (cfg.aux_hidden.empty()) reader.fail("/aux_hidden", "must be nonempty");
  }

  const auto read_count = [&](const char* name, std::size_t fallback,
                              std::size_t minimum) {
    const auto v = reader.get_or<std::int64_t>(
        root, "", name, static_cast<std::int64_t>(fallback));
    if (v < static_cast<std::int64_t>(minimum)) {
      reader.fail(std::string("/") + name,
                  "must be >= " + std::to_string(minimum));
      return fallback;
    }
    return static_cast<std::size_t>(v);
  };
  cfg.n_labeled = read_count("n_labeled", cfg.n_labeled, 1);
  cfg.n_unlabeled = read_count("n_unlabeled", cfg.n_unlabeled, 2);
  cfg.n_test = read_count("n_test", cfg.n_test, 2);
  cfg.n_mcs = read_count("n_mcs", cfg.n_mcs, 1);

  cfg.max_epochs = reader.get_or<int>(root, "", "max_epochs", cfg.max_epochs);
  if (cfg.max_epochs < 1) reader.fail("/max_epochs", "must be >= 1");

  if (root.contains("adam")) {
    const auto& ja = root.at("adam");
    cfg.adam.eta = reader.get_or<double>(ja, "/adam", "eta", cfg.adam.eta);
    cfg.adam.beta1 = reader.get_or<double>(ja, "/adam", "beta1", cfg.adam.beta1);
    cfg.adam.beta2 = reader.get_or<double>(ja, "/adam", "beta2", cfg.adam.beta2);
    cfg.adam.epsilon =
        reader.get_or<double>(ja, "/adam", "epsilon", cfg.adam.epsilon);
    if (!(cfg.adam.eta > 0.0)) reader.fail("/adam/eta", "must be > 0");
    if (!(cfg.adam.beta1 >= 0.0 && cfg.adam.beta1 < 1.0))
      reader.fail("/adam/beta1", "must lie in [0, 1)");
    if (!(cfg.adam.beta2 >= 0.0 && cfg.adam.beta2 < 1.0))
      reader.fail("/adam/beta2", "must lie in [0, 1)");
  }
  cfg.eta_coeffs = reader.get_or<double>(root, "", "eta_coeffs", cfg.eta_coeffs);
  cfg.lr_decay_factor =
      reader.get_or<double>(root, "", "lr_decay_factor", cfg.lr_decay_factor);
  cfg.lr_decay_every =
      reader.get_or<int>(root, "", "lr_decay_every", cfg.lr_decay_every);
  if (!(cfg.lr_decay_factor > 0.0 && cfg.lr_decay_factor <= 1.0))
    reader.fail("/lr_decay_factor", "must lie in (0, 1]");
  if (cfg.lr_decay_every < 0) reader.fail("/lr_decay_every", "must be >= 0");

  if (root.contains("sampling")) {
    const auto& js = root.at("sampling");
    const auto read_kind = [&](const char* name, SampleKind fallback) {
      const auto text = reader.get_or<std::string>(
          js, "/sampling", name, std::string(sample_kind_name(fallback)));
      try {
        return sample_kind_from_name(text);
      } catch (const ValidationError& e) {
        reader.fail(std::string("/sampling/") + name, e.what());
        return fallback;
      }
    };
    cfg.labeled_kind = read_kind("labeled", cfg.labeled_kind);
    cfg.unlabeled_kind = read_kind("unlabeled", cfg.unlabeled_kind);
    cfg.test_kind = read_kind("test", cfg.test_kind);
  }

  const auto source = reader.get_or<std::string>(root, "", "moment_source",
                                                 "empirical");
  if (source == "empirical") {
    cfg.moment_source = MomentSource::Empirical;
  } else if (source == "analytic") {
    cfg.moment_source = MomentSource::Analytic;
  } else {
    reader.fail("/moment_source", "must be 'empirical' or 'analytic'");
  }

  cfg.chunk_size =
      static_cast<std::size_t>(reader.get_or<std::int64_t>(root, "", "chunk_size", 0));

  if (root.contains("seeds")) {
    const auto& js = root.at("seeds");
    cfg.seeds.master =
        reader.get_or<std::uint64_t>(js, "/seeds", "master", cfg.seeds.master);
    cfg.seeds.unlabeled = reader.get_or<std::uint64_t>(js, "/seeds", "unlabeled", 0);
    cfg.seeds.labeled = reader.get_or<std::uint64_t>(js, "/seeds", "labeled", 0);
    cfg.seeds.init = reader.get_or<std::uint64_t>(js, "/seeds", "init", 0);
    cfg.seeds.test = reader.get_or<std::uint64_t>(js, "/seeds", "test", 0);
    cfg.seeds.mcs = reader.get_or<std::uint64_t>(js, "/seeds", "mcs", 0);
  }
  if (cfg.seeds.unlabeled == 0)
    cfg.seeds.unlabeled = derive_seed(cfg.seeds.master, kTagUnlabeled);
  if (cfg.seeds.labeled == 0)
    cfg.seeds.labeled = derive_seed(cfg.seeds.master, kTagLabeled);
  if (cfg.seeds.init == 0) cfg.seeds.init = derive_seed(cfg.seeds.master, kTagInit);
  if (cfg.seeds.test == 0) cfg.seeds.test = derive_seed(cfg.seeds.master, kTagTest);
  if (cfg.seeds.mcs == 0) cfg.seeds.mcs = derive_seed(cfg.seeds.master, kTagMcs);

  cfg.checkpoint_every =
      reader.get_or<int>(root, "", "checkpoint_every", cfg.checkpoint_every);
  if (cfg.checkpoint_every < 0) reader.fail("/checkpoint_every", "must be >= 0");
  cfg.output_dir = reader.get_or<std::string>(root, "", "output_dir", cfg.output_dir);
  cfg.threads = reader.get_or<int>(root, "", "threads", cfg.threads);
  if (cfg.threads < 1) reader.fail("/threads", "must be >= 1");
  cfg.notes = reader.get_or<std::string>(root, "", "notes", cfg.notes);

  if (!reader.errors.empty()) {
    std::string msg = "config validation failed:";
    for (const auto& e : reader.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

ProblemConfig validate_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string resolved_config_text(const ProblemConfig& cfg) {
  std::ostringstream os;
  JsonWriter w(os);
  w.begin_object();
  w.key("problem").value(cfg.problem);
  if (cfg.problem == "custom") {
    w.key("variables").begin_array();
    for (const auto& s : cfg.variables) {
      w.begin_object();
      w.key("name").value(s.name);
      w.key("family").value(family_name(s.family));
      w.key("a").value(s.a);
      w.key("b").value(s.b);
      w.end_object();
    }
    w.end_array();
  }
  if (cfg.problem == "cantilever_tube") {
    w.key("theta1_deg").value(cfg.theta1_deg);
    w.key("theta2_deg").value(cfg.theta2_deg);
  }
  w.key("p").value(cfg.order_main);
  w.key("p_tilde").value(cfg.order_aux);
  w.key("aux_hidden").begin_array();
  for (int h : cfg.aux_hidden) w.value(h);
  w.end_array();
  w.key("n_labeled").value(cfg.n_labeled);
  w.key("n_unlabeled").value(cfg.n_unlabeled);
  w.key("n_test").value(cfg.n_test);
  w.key("n_mcs").value(cfg.n_mcs);
  w.key("max_epochs").value(cfg.max_epochs);
  w.key("adam").begin_object();
  w.key("eta").value(cfg.adam.eta);
  w.key("beta1").value(cfg.adam.beta1);
  w.key("beta2").value(cfg.adam.beta2);
  w.key("epsilon").value(cfg.adam.epsilon);
  w.end_object();
  w.key("eta_coeffs").value(cfg.eta_coeffs);
  w.key("lr_decay_factor").value(cfg.lr_decay_factor);
  w.key("lr_decay_every").value(cfg.lr_decay_every);
  w.key("sampling").begin_object();
  w.key("labeled").value(sample_kind_name(cfg.labeled_kind));
  w.key("unlabeled").value(sample_kind_name(cfg.unlabeled_kind));
  w.key("test").value(sample_kind_name(cfg.test_kind));
  w.end_object();
  w.key("moment_source")
      .value(cfg.moment_source == MomentSource::Analytic ? "analytic" : "empirical");
  w.key("chunk_size").value(cfg.chunk_size);
  w.key("seeds").begin_object();
  w.key("master").value(cfg.seeds.master);
  w.key("unlabeled").value(cfg.seeds.unlabeled);
  w.key("labeled").value(cfg.seeds.labeled);
  w.key("init").value(cfg.seeds.init);
  w.key("test").value(cfg.seeds.test);
  w.key("mcs").value(cfg.seeds.mcs);
  w.end_object();
  w.key("checkpoint_every").value(cfg.checkpoint_every);
  w.key("output_dir").value(cfg.output_dir);
  w.key("threads").value(cfg.threads);
  if (!cfg.notes.empty()) w.key("notes").value(cfg.notes);
  w.end_object();
  return os.str();
}

std::string run_id_for(const ProblemConfig& config) {
  // The id identifies the computation: where the bundle lands (and free-form
  // notes) do not participate, so relocated reruns keep their identity.
  ProblemConfig canonical = config;
  canonical.output_dir.clear();
  canonical.notes.clear();
  return hex_id(fnv1a(resolved_config_text(canonical)));
}

PerformanceFunction make_problem(const ProblemConfig& config) {
  if (config.problem == "cantilever_tube")
    return cantilever_tube_problem(config.theta1_deg, config.theta2_deg);
  if (config.problem == "microsatellite") return microsat_problem();
  PerformanceFunction pf;
  pf.name = "custom";
  pf.inputs = config.variables;
  return pf;
}

RunPaths run_paths(const std::filesystem::path& dir) {
  RunPaths p;
  p.dir = dir;
  p.model = dir / "model.json";
  p.loss_history = dir / "loss_history.csv";
  p.error_report = dir / "error_report.json";
  p.moment_summary = dir / "moment_summary.json";
  p.reliability = dir / "reliability.json";
  p.kde = dir / "kde.csv";
  p.resolved_config = dir / "resolved_config.json";
  return p;
}

namespace {

[[noreturn]] void rethrow_stage(const std::string& run_id, const std::string& name,
                                const Error& e) {
  const std::string msg = "run " + run_id + ", stage '" + name + "': " + e.what();
  if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
  if (dynamic_cast<const IoError*>(&e)) throw IoError(msg);
  if (dynamic_cast<const ValidationError*>(&e)) throw ValidationError(msg);
  if (dynamic_cast<const UsageError*>(&e)) throw UsageError(msg);
  throw NumericError(msg);
}

}  // namespace

RunSummary run_pipeline(const ProblemConfig& config, std::ostream* log) {
  Eigen::setNbThreads(std::max(1, config.threads));
  const std::string run_id = run_id_for(config);
  const RunPaths paths = run_paths(config.output_dir);
  const auto progress = [&](const std::string& line) {
    if (log) (*log) << "[" << run_id << "] " << line << "\n" << std::flush;
  };

  std::filesystem::create_directories(paths.dir);
  {
    std::ofstream out(paths.resolved_config, std::ios::binary);
    if (!out)
      throw IoError("cannot write '" + paths.resolved_config.string() + "'");
    out << resolved_config_text(config);
  }

  RunSummary summary;
  summary.run_id = run_id;
  summary.problem = config.problem;
  summary.order_main = config.order_main;
  summary.order_aux = config.order_aux;
  summary.n_labeled = config.n_labeled;
  summary.n_unlabeled = config.n_unlabeled;
  summary.paths = paths;

  PerformanceFunction problem = make_problem(config);
  const auto& specs = problem.inputs;

  try {
    progress("sampling unlabeled pool (" + std::to_string(config.n_unlabeled) +
             " points)");
    const SampleMatrix pool = sample(specs, config.n_unlabeled,
                                     config.unlabeled_kind, config.seeds.unlabeled);

    progress("building order-" + std::to_string(config.order_main) + " and order-" +
             std::to_string(config.order_aux) + " bases");
    MomentProvenance prov;
    prov.source = config.moment_source;
    prov.sample_count =
        config.moment_source == MomentSource::Empirical ? config.n_unlabeled : 0;
    prov.seed = config.seeds.unlabeled;
    std::vector<UnivariateBasis> families;
    try {
      families = univariate_bases(specs, pool.data, config.order_main,
                                  config.moment_source);
    } catch (const Error& e) {
      rethrow_stage(run_id, "basis", e);
    }
    std::vector<UnivariateBasis> families_low;
    families_low.reserve(families.size());
    for (const auto& u : families) families_low.push_back(truncated(u, config.order_aux));
    const OrthonormalBasis basis_high = tensor_basis(families, config.order_main, prov);
    const OrthonormalBasis basis_low =
        tensor_basis(families_low, config.order_aux, prov);
    summary.basis_size = basis_high.size();

    progress("generating " + std::to_string(config.n_labeled) + " labels");
    LabeledSet labeled;
    try {
      labeled = generate_labels(problem, config.n_labeled, config.labeled_kind,
                                config.seeds.labeled);
    } catch (const Error& e) {
      rethrow_stage(run_id, "labels", e);
    }

    progress("training (" + std::to_string(config.max_epochs) + " epochs, M=" +
             std::to_string(basis_high.size()) + ")");
    TrainConfig tc;
    tc.max_epochs = config.max_epochs;
    tc.adam = config.adam;
    tc.eta_coeffs = config.eta_coeffs;
    tc.lr_decay_factor = config.lr_decay_factor;
    tc.lr_decay_every = config.lr_decay_every;
    tc.chunk_size = config.chunk_size;
    tc.init_seed = config.seeds.init;
    tc.checkpoint_every = config.checkpoint_every;
    ModelBundle bundle;
    bundle.run_id = run_id;
    bundle.problem = config.problem;
    bundle.variables = specs;
    bundle.training.seed_init = config.seeds.init;
    bundle.training.seed_labeled = config.seeds.labeled;
    bundle.training.seed_unlabeled = config.seeds.unlabeled;
    bundle.training.n_labeled = config.n_labeled;
    bundle.training.n_unlabeled = config.n_unlabeled;
    bundle.training.adam = config.adam;
    bundle.training.eta_coeffs = config.eta_coeffs;
    bundle.training.lr_decay_factor = config.lr_decay_factor;
    bundle.training.lr_decay_every = config.lr_decay_every;
    if (config.checkpoint_every > 0) {
      tc.checkpoint_hook = [&](int ep, const PceModel& main,
                               const AdaptivePceModel& aux) {
        ModelBundle ck = bundle;
        ck.main = main;
        ck.aux = aux;
        ck.training.epochs = ep;
        save_model(paths.dir / ("checkpoint_" + std::to_string(ep) + ".json"), ck);
      };
    }

    TrainResult trained;
    try {
      trained = train(basis_high, basis_low, labeled.xi, labeled.y, pool.data,
                      config.aux_hidden, tc);
    } catch (const Error& e) {
      rethrow_stage(run_id, "train", e);
    }
    summary.epochs = static_cast<int>(trained.history.size());
    if (!trained.history.empty()) summary.final_loss = trained.history.back();
    write_loss_history(paths.loss_history, trained.history);

    bundle.main = std::move(trained.main);
    bundle.aux = std::move(trained.aux);
    bundle.training.epochs = summary.epochs;
    bundle.training.final_loss = summary.final_loss;
    save_model(paths.model, bundle);
    progress("model written to " + paths.model.string());

    progress("evaluating on " + std::to_string(config.n_test) + " test points");
    try {
      const LabeledSet test = generate_labels(problem, config.n_test,
                                              config.test_kind, config.seeds.test);
      summary.errors = error_metrics(bundle.main, test.xi, test.y);
    } catch (const Error& e) {
      rethrow_stage(run_id, "test-metrics", e);
    }
    write_error_report(paths.error_report, summary.errors, run_id);

    progress("surrogate MCS (" + std::to_string(config.n_mcs) + " samples)");
    try {
      const SampleMatrix mcs =
          sample(specs, config.n_mcs, SampleKind::MonteCarlo, config.seeds.mcs);
      Eigen::VectorXd values(mcs.data.rows());
      constexpr Eigen::Index kBatch = 8192;
      for (Eigen::Index b = 0; b < mcs.data.rows(); b += kBatch) {
        const Eigen::Index rows = std::min(kBatch, mcs.data.rows() - b);
        values.segment(b, rows) = bundle.main.eval_batch(mcs.data.middleRows(b, rows));
      }
      const std::span<const double> value_span(values.data(),
                                               static_cast<std::size_t>(values.size()));
      summary.moments = moment_summary(value_span);
      summary.reliability = failure_probability_from(value_span, config.seeds.mcs);

      const double lo = summary.moments.mean - 5.0 * summary.moments.sd;
      const double hi = summary.moments.mean + 5.0 * summary.moments.sd;
      std::vector<double> grid(512);
      for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                           static_cast<double>(grid.size() - 1);
      const std::vector<double> density = kde_pdf(value_span, grid);
      write_kde_csv(paths.kde, grid, density);
    } catch (const Error& e) {
      rethrow_stage(run_id, "mcs", e);
    }
    write_moment_summary(paths.moment_summary, summary.moments, run_id);
    write_reliability(paths.reliability, summary.reliability, run_id);
    progress("done");
  } catch (...) {
    progress("aborted; partial outputs kept in " + paths.dir.string());
    throw;
  }
  return summary;
}

namespace {

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

RunSummary report_from_dir(const std::filesystem::path& dir) {
  const RunPaths paths = run_paths(dir);

  std::ifstream cfg_in(paths.resolved_config, std::ios::binary);
  if (!cfg_in)
    throw IoError("'" + dir.string() + "' is not a run directory (no resolved_config.json)");
  std::ostringstream cfg_text;
  cfg_text << cfg_in.rdbuf();
  const ProblemConfig config = parse_config(cfg_text.str());

  RunSummary summary;
  summary.problem = config.problem;
  summary.order_main = config.order_main;
  summary.order_aux = config.order_aux;
  summary.n_labeled = config.n_labeled;
  summary.n_unlabeled = config.n_unlabeled;
  summary.paths = paths;

  const json jm = load_json(paths.model);
  try {
    summary.run_id = jm.at("run_id").get<std::string>();
    summary.basis_size = jm.at("coefficients").size();
    summary.epochs = jm.at("training").at("epochs").get<int>();
    const auto& jl = jm.at("training").at("final_loss");
    summary.final_loss.supervised_main = jl.at("supervised_main").get<double>();
    summary.final_loss.consistency = jl.at("consistency").get<double>();
    summary.final_loss.supervised_aux = jl.at("supervised_aux").get<double>();
    summary.final_loss.property_mean = jl.at("property_mean").get<double>();
    summary.final_loss.property_var = jl.at("property_var").get<double>();
    summary.final_loss.main_total = jl.at("main_total").get<double>();
    summary.final_loss.aux_total = jl.at("aux_total").get<double>();
    summary.final_loss.total = jl.at("total").get<double>();

    const json je = load_json(paths.error_report);
    summary.errors.n_test = je.at("n_test").get<std::size_t>();
    summary.errors.rmse = je.at("rmse").get<double>();
    summary.errors.mae = je.at("mae").get<double>();
    summary.errors.mre_defined = !je.at("mre").is_null();
    summary.errors.mre = summary.errors.mre_defined
                             ? je.at("mre").get<double>()
                             : std::numeric_limits<double>::quiet_NaN();
    summary.errors.mre_excluded = je.at("mre_excluded").get<std::size_t>();
    summary.errors.r2 = je.at("r2").get<double>();

    const json jmo = load_json(paths.moment_summary);
    summary.moments.n = jmo.at("n").get<std::size_t>();
    summary.moments.mean = jmo.at("mean").get<double>();
    summary.moments.sd = jmo.at("sd").get<double>();
    summary.moments.shape_defined = !jmo.at("skewness").is_null();
    if (summary.moments.shape_defined) {
      summary.moments.skewness = jmo.at("skewness").get<double>();
      summary.moments.kurtosis = jmo.at("kurtosis").get<double>();
    }

    const json jr = load_json(paths.reliability);
    summary.reliability.pf = jr.at("pf").get<double>();
    summary.reliability.n_mcs = jr.at("n_mcs").get<std::size_t>();
    summary.reliability.failures = jr.at("failures").get<std::size_t>();
    summary.reliability.std_error = jr.at("std_error").get<double>();
    summary.reliability.seed = jr.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw IoError("run directory '" + dir.string() + "' is incomplete or malformed: " +
                  e.what());
  }
  return summary;
}

ErrorReport evaluate_model_csv(const std::filesystem::path& model_path,
                               const std::filesystem::path& csv_path) {
  const ModelBundle bundle = load_model(model_path);
  const LabeledCsv csv = read_labeled_csv(csv_path);
  if (csv.x.cols() != static_cast<Eigen::Index>(bundle.variables.size()))
    throw ValidationError("test csv has " + std::to_string(csv.x.cols()) +
                          " input columns but the model expects " +
                          std::to_string(bundle.variables.size()));

  Eigen::MatrixXd xi = csv.x;
  for (std::size_t k = 0; k < bundle.variables.size(); ++k) {
    const Standardizer s = standardizer_for(bundle.variables[k]);
    xi.col(static_cast<Eigen::Index>(k)) =
        (xi.col(static_cast<Eigen::Index>(k)).array() - s.mu) / s.sigma;
  }
  return error_metrics(bundle.main, xi, csv.y);
}

ReliabilityResult reliability_of_model(const std::filesystem::path& model_path,
                                       std::size_t n_mcs, std::uint64_t seed) {
  const ModelBundle bundle = load_model(model_path);
  return failure_probability(bundle.main, bundle.variables, n_mcs, seed);
}

void print_summary(std::ostream& out, const RunSummary& s) {
  out << std::setprecision(10);
  out << "run id:        " << s.run_id << "\n"
      << "problem:       " << s.problem << "\n"
      << "orders:        p=" << s.order_main << ", p_tilde=" << s.order_aux
      << " (basis size " << s.basis_size << ")\n"
      << "data:          " << s.n_labeled << " labeled, " << s.n_unlabeled
      << " unlabeled\n"
      << "epochs:        " << s.epochs << "\n"
      << "final loss:    total " << s.final_loss.total << " (main "
      << s.final_loss.main_total << ", aux " << s.final_loss.aux_total << ")\n"
      << "test metrics:  rmse " << s.errors.rmse << ", mae " << s.errors.mae
      << ", mre ";
  if (s.errors.mre_defined)
    out << s.errors.mre;
  else
    out << "undefined";
  out << ", r2 " << s.errors.r2 << " (n=" << s.errors.n_test << ")\n"
      << "mcs moments:   mean " << s.moments.mean << ", sd " << s.moments.sd
      << ", skewness ";
  if (s.moments.shape_defined)
    out << s.moments.skewness << ", kurtosis " << s.moments.kurtosis;
  else
    out << "undefined, kurtosis undefined";
  out << " (n=" << s.moments.n << ")\n"
      << "reliability:   pf " << s.reliability.pf << " +- "
      << s.reliability.std_error << " (" << s.reliability.failures << "/"
      << s.reliability.n_mcs << " failures)\n";
}

}  // namespace pcnn
