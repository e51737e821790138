// SPDX-License-Identifier: MIT
#include "pcnn/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pcnn {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

JsonWriter::JsonWriter(std::ostream& out) : out_(out) {}

void JsonWriter::newline_indent() {
  out_ << '\n';
  for (std::size_t i = 0; i < stack_.size(); ++i) out_ << "  ";
}

void JsonWriter::before_value() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!stack_.empty()) {
    if (stack_.back().has_items) out_ << ',';
    newline_indent();
    stack_.back().has_items = true;
  }
}

JsonWriter& JsonWriter::begin_object() {
  before_value();
  out_ << '{';
  stack_.push_back({false, false});
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  const bool had = stack_.back().has_items;
  stack_.pop_back();
  if (had) newline_indent();
  out_ << '}';
  if (stack_.empty()) out_ << '\n';
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  before_value();
  out_ << '[';
  stack_.push_back({true, false});
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  const bool had = stack_.back().has_items;
  stack_.pop_back();
  if (had) newline_indent();
  out_ << ']';
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view name) {
  if (stack_.back().has_items) out_ << ',';
  newline_indent();
  stack_.back().has_items = true;
  write_escaped(name);
  out_ << ": ";
  pending_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  before_value();
  if (!std::isfinite(v))
    out_ << "null";
  else
    out_ << format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
  before_value();
  out_ << v;
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  before_value();
  out_ << v;
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  before_value();
  out_ << (v ? "true" : "false");
  return *this;
}

void JsonWriter::write_escaped(std::string_view v) {
  out_ << '"';
  for (char c : v) {
    switch (c) {
      case '"': out_ << "\\\""; break;
      case '\\': out_ << "\\\\"; break;
      case '\n': out_ << "\\n"; break;
      case '\t': out_ << "\\t"; break;
      case '\r': out_ << "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out_ << buf;
        } else {
          out_ << c;
        }
    }
  }
  out_ << '"';
}

JsonWriter& JsonWriter::value(std::string_view v) {
  before_value();
  write_escaped(v);
  return *this;
}

JsonWriter& JsonWriter::null() {
  before_value();
  out_ << "null";
  return *this;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string hex_id(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string specs_fingerprint(const std::vector<RandomVariableSpec>& specs) {
  std::ostringstream os;
  for (const auto& s : specs)
    os << s.name << '|' << family_name(s.family) << '|' << format_double(s.a)
       << '|' << format_double(s.b) << ';';
  return hex_id(fnv1a(os.str()));
}

namespace {

void write_specs(JsonWriter& w, const std::vector<RandomVariableSpec>& specs) {
  w.begin_array();
  for (const auto& s : specs) {
    w.begin_object();
    w.key("name").value(s.name);
    w.key("family").value(family_name(s.family));
    w.key("a").value(s.a);
    w.key("b").value(s.b);
    w.end_object();
  }
  w.end_array();
}

void write_basis(JsonWriter& w, const OrthonormalBasis& basis) {
  w.begin_object();
  w.key("order").value(basis.order());
  w.key("dims").value(basis.dims());
  w.key("moment_source")
      .value(basis.provenance.source == MomentSource::Analytic ? "analytic"
                                                               : "empirical");
  w.key("moment_sample_count").value(basis.provenance.sample_count);
  w.key("moment_seed").value(basis.provenance.seed);
  w.key("univariate").begin_array();
  for (const auto& u : basis.univariate) {
    w.begin_object();
    w.key("degree").value(u.degree);
    w.key("mgs_applied").value(u.mgs_applied);
    w.key("coeffs").begin_array();
    for (int j = 0; j <= u.degree; ++j) {
      w.begin_array();
      for (int m = 0; m <= j; ++m) w.value(u.coeffs(j, m));
      w.end_array();
    }
    w.end_array();
    w.key("norms").begin_array();
    for (int j = 0; j <= u.degree; ++j) w.value(u.norms(j));
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.key("indices").begin_array();
  for (Eigen::Index i = 0; i < basis.index_set.indices.rows(); ++i) {
    w.begin_array();
    for (int k = 0; k < basis.dims(); ++k)
      w.value(static_cast<std::int64_t>(basis.index_set.indices(i, k)));
    w.end_array();
  }
  w.end_array();
  w.end_object();
}

OrthonormalBasis read_basis(const nlohmann::json& j) {
  OrthonormalBasis basis;
  const int dims = j.at("dims").get<int>();
  const int order = j.at("order").get<int>();
  basis.provenance.source = j.at("moment_source").get<std::string>() == "analytic"
                                ? MomentSource::Analytic
                                : MomentSource::Empirical;
  basis.provenance.sample_count = j.at("moment_sample_count").get<std::size_t>();
  basis.provenance.seed = j.at("moment_seed").get<std::uint64_t>();

  for (const auto& ju : j.at("univariate")) {
    UnivariateBasis u;
    u.degree = ju.at("degree").get<int>();
    u.mgs_applied = ju.at("mgs_applied").get<bool>();
    u.normalized = true;
    u.coeffs = Eigen::MatrixXd::Zero(u.degree + 1, u.degree + 1);
    u.norms = Eigen::VectorXd::Ones(u.degree + 1);
    const auto& rows = ju.at("coeffs");
    for (int jj = 0; jj <= u.degree; ++jj)
      for (int m = 0; m <= jj; ++m)
        u.coeffs(jj, m) = rows.at(jj).at(m).get<double>();
    const auto& norms = ju.at("norms");
    for (int jj = 0; jj <= u.degree; ++jj) u.norms(jj) = norms.at(jj).get<double>();
    basis.univariate.push_back(std::move(u));
  }

  const auto& idx = j.at("indices");
  basis.index_set.dims = dims;
  basis.index_set.order = order;
  basis.index_set.indices.resize(static_cast<Eigen::Index>(idx.size()), dims);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (int k = 0; k < dims; ++k)
      basis.index_set.indices(static_cast<Eigen::Index>(i), k) =
          idx.at(i).at(static_cast<std::size_t>(k)).get<int>();
  return basis;
}

std::vector<RandomVariableSpec> read_specs(const nlohmann::json& j) {
  std::vector<RandomVariableSpec> specs;
  for (const auto& js : j) {
    RandomVariableSpec s;
    s.name = js.at("name").get<std::string>();
    s.family = family_from_name(js.at("family").get<std::string>());
    s.a = js.at("a").get<double>();
    s.b = js.at("b").get<double>();
    specs.push_back(std::move(s));
  }
  return specs;
}

void write_loss_fields(JsonWriter& w, const LossBreakdown& l) {
  w.begin_object();
  w.key("supervised_main").value(l.supervised_main);
  w.key("consistency").value(l.consistency);
  w.key("supervised_aux").value(l.supervised_aux);
  w.key("property_mean").value(l.property_mean);
  w.key("property_var").value(l.property_var);
  w.key("main_total").value(l.main_total);
  w.key("aux_total").value(l.aux_total);
  w.key("total").value(l.total);
  w.end_object();
}

LossBreakdown read_loss_fields(const nlohmann::json& j) {
  LossBreakdown l;
  l.supervised_main = j.at("supervised_main").get<double>();
  l.consistency = j.at("consistency").get<double>();
  l.supervised_aux = j.at("supervised_aux").get<double>();
  l.property_mean = j.at("property_mean").get<double>();
  l.property_var = j.at("property_var").get<double>();
  l.main_total = j.at("main_total").get<double>();
  l.aux_total = j.at("aux_total").get<double>();
  l.total = j.at("total").get<double>();
  return l;
}

}  // namespace

void save_model(const std::filesystem::path& path, const ModelBundle& bundle) {
  auto out = open_out(path);
  JsonWriter w(out);
  w.begin_object();
  w.key("format").value("pcnn-model");
  w.key("version").value(1);
  w.key("run_id").value(bundle.run_id);
  w.key("problem").value(bundle.problem);
  w.key("variables");
  write_specs(w, bundle.variables);
  w.key("basis");
  write_basis(w, bundle.main.basis);
  w.key("coefficients").begin_array();
  for (Eigen::Index i = 0; i < bundle.main.coeffs.size(); ++i)
    w.value(bundle.main.coeffs(i));
  w.end_array();

  w.key("aux").begin_object();
  w.key("basis");
  write_basis(w, bundle.aux.basis);
  w.key("layer_sizes").begin_array();
  for (int s : bundle.aux.net.layer_sizes()) w.value(s);
  w.end_array();
  w.key("weights").begin_array();
  for (const auto& W : bundle.aux.net.weights()) {
    w.begin_array();  // row-major
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index jj = 0; jj < W.cols(); ++jj) w.value(W(i, jj));
    w.end_array();
  }
  w.end_array();
  w.key("biases").begin_array();
  for (const auto& b : bundle.aux.net.biases()) {
    w.begin_array();
    for (Eigen::Index i = 0; i < b.size(); ++i) w.value(b(i));
    w.end_array();
  }
  w.end_array();
  w.end_object();

  w.key("training").begin_object();
  w.key("epochs").value(bundle.training.epochs);
  w.key("n_labeled").value(bundle.training.n_labeled);
  w.key("n_unlabeled").value(bundle.training.n_unlabeled);
  w.key("seed_init").value(bundle.training.seed_init);
  w.key("seed_labeled").value(bundle.training.seed_labeled);
  w.key("seed_unlabeled").value(bundle.training.seed_unlabeled);
  w.key("adam").begin_object();
  w.key("eta").value(bundle.training.adam.eta);
  w.key("beta1").value(bundle.training.adam.beta1);
  w.key("beta2").value(bundle.training.adam.beta2);
  w.key("epsilon").value(bundle.training.adam.epsilon);
  w.end_object();
  w.key("eta_coeffs").value(bundle.training.eta_coeffs);
  w.key("lr_decay_factor").value(bundle.training.lr_decay_factor);
  w.key("lr_decay_every").value(bundle.training.lr_decay_every);
  w.key("final_loss");
  write_loss_fields(w, bundle.training.final_loss);
  w.end_object();

  w.end_object();
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("model file '" + path.string() + "' is not valid JSON: " + e.what());
  }

  try {
    if (j.at("format").get<std::string>() != "pcnn-model")
      throw IoError("'" + path.string() + "' is not a model file");

    ModelBundle bundle;
    bundle.run_id = j.at("run_id").get<std::string>();
    bundle.problem = j.at("problem").get<std::string>();
    bundle.variables = read_specs(j.at("variables"));

    bundle.main.basis = read_basis(j.at("basis"));
    const auto& coeffs = j.at("coefficients");
    bundle.main.coeffs.resize(static_cast<Eigen::Index>(coeffs.size()));
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      bundle.main.coeffs(static_cast<Eigen::Index>(i)) = coeffs.at(i).get<double>();
    bundle.main.validate();

    const auto& jaux = j.at("aux");
    bundle.aux.basis = read_basis(jaux.at("basis"));
    std::vector<int> sizes;
    for (const auto& s : jaux.at("layer_sizes")) sizes.push_back(s.get<int>());
    Mlp net{sizes};
    const auto& jw = jaux.at("weights");
    const auto& jb = jaux.at("biases");
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
      auto& W = net.weights()[l];
      const auto& flat = jw.at(l);
      if (flat.size() != static_cast<std::size_t>(W.size()))
        throw IoError("model file: weight array size mismatch at layer " +
                      std::to_string(l));
      std::size_t pos = 0;
      for (Eigen::Index i = 0; i < W.rows(); ++i)
        for (Eigen::Index jj = 0; jj < W.cols(); ++jj)
          W(i, jj) = flat.at(pos++).get<double>();
      auto& b = net.biases()[l];
      for (Eigen::Index i = 0; i < b.size(); ++i)
        b(i) = jb.at(l).at(static_cast<std::size_t>(i)).get<double>();
    }
    bundle.aux.net = std::move(net);
    bundle.aux.validate();

    const auto& jt = j.at("training");
    bundle.training.epochs = jt.at("epochs").get<int>();
    bundle.training.n_labeled = jt.at("n_labeled").get<std::size_t>();
    bundle.training.n_unlabeled = jt.at("n_unlabeled").get<std::size_t>();
    bundle.training.seed_init = jt.at("seed_init").get<std::uint64_t>();
    bundle.training.seed_labeled = jt.at("seed_labeled").get<std::uint64_t>();
    bundle.training.seed_unlabeled = jt.at("seed_unlabeled").get<std::uint64_t>();
    bundle.training.adam.eta = jt.at("adam").at("eta").get<double>();
    bundle.training.adam.beta1 = jt.at("adam").at("beta1").get<double>();
    bundle.training.adam.beta2 = jt.at("adam").at("beta2").get<double>();
    bundle.training.adam.epsilon = jt.at("adam").at("epsilon").get<double>();
    bundle.training.eta_coeffs = jt.at("eta_coeffs").get<double>();
    bundle.training.lr_decay_factor = jt.at("lr_decay_factor").get<double>();
    bundle.training.lr_decay_every = jt.at("lr_decay_every").get<int>();
    bundle.training.final_loss = read_loss_fields(jt.at("final_loss"));
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("model file '" + path.string() + "' is malformed: " + e.what());
  }
}

void write_error_report(const std::filesystem::path& path, const ErrorReport& r,
                        const std::string& run_id) {
  auto out = open_out(path);
  JsonWriter w(out);
  w.begin_object();
  w.key("run_id").value(run_id);
  w.key("n_test").value(r.n_test);
  w.key("rmse").value(r.rmse);
  w.key("mae").value(r.mae);
  if (r.mre_defined)
    w.key("mre").value(r.mre);
  else
    w.key("mre").null();
  w.key("mre_excluded").value(r.mre_excluded);
  w.key("r2").value(r.r2);
  w.key("r2_note")
      .value("r2 centers on the mean prediction, not the mean truth; it is "
             "not the conventional coefficient of determination");
  w.end_object();
}

void write_moment_summary(const std::filesystem::path& path,
                          const MomentSummary& s, const std::string& run_id) {
  auto out = open_out(path);
  JsonWriter w(out);
  w.begin_object();
  w.key("run_id").value(run_id);
  w.key("n").value(s.n);
  w.key("mean").value(s.mean);
  w.key("sd").value(s.sd);
  if (s.shape_defined) {
    w.key("skewness").value(s.skewness);
    w.key("kurtosis").value(s.kurtosis);
  } else {
    w.key("skewness").null();
    w.key("kurtosis").null();
  }
  w.key("kurtosis_convention").value("non-excess (normal -> 3)");
  w.end_object();
}

void write_reliability(const std::filesystem::path& path,
                       const ReliabilityResult& r, const std::string& run_id) {
  auto out = open_out(path);
  JsonWriter w(out);
  w.begin_object();
  w.key("run_id").value(run_id);
  w.key("pf").value(r.pf);
  w.key("n_mcs").value(r.n_mcs);
  w.key("failures").value(r.failures);
  w.key("std_error").value(r.std_error);
  w.key("seed").value(r.seed);
  w.end_object();
}

void write_loss_history(const std::filesystem::path& path,
                        const std::vector<LossBreakdown>& history) {
  auto out = open_out(path);
  out << "epoch,supervised_main,consistency,supervised_aux,property_mean,"
         "property_var,main_total,aux_total,total\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& l = history[i];
    out << (i + 1) << ',' << format_double(l.supervised_main) << ','
        << format_double(l.consistency) << ',' << format_double(l.supervised_aux)
        << ',' << format_double(l.property_mean) << ','
        << format_double(l.property_var) << ',' << format_double(l.main_total)
        << ',' << format_double(l.aux_total) << ',' << format_double(l.total)
        << '\n';
  }
}

void write_kde_csv(const std::filesystem::path& path,
                   const std::vector<double>& grid,
                   const std::vector<double>& density) {
  if (grid.size() != density.size())
    throw ValidationError("kde csv: grid/density size mismatch");
  auto out = open_out(path);
  out << "value,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << format_double(grid[i]) << ',' << format_double(density[i]) << '\n';
}

void save_labeled_csv(const std::filesystem::path& path,
                      const std::vector<RandomVariableSpec>& specs,
                      const LabeledSet& set) {
  if (static_cast<Eigen::Index>(specs.size()) != set.xi.cols())
    throw ValidationError("labeled csv: spec/sample dimension mismatch");
  auto out = open_out(path);
  for (const auto& s : specs) out << s.name << ',';
  out << "g\n";
  std::vector<Standardizer> std_by_dim;
  for (const auto& s : specs) std_by_dim.push_back(standardizer_for(s));
  for (Eigen::Index i = 0; i < set.xi.rows(); ++i) {
    for (Eigen::Index k = 0; k < set.xi.cols(); ++k)
      out << format_double(
                 std_by_dim[static_cast<std::size_t>(k)].destandardize(set.xi(i, k)))
          << ',';
    out << format_double(set.y(i)) << '\n';
  }

  auto sidecar = open_out(path.string() + ".meta.json");
  JsonWriter w(sidecar);
  w.begin_object();
  w.key("seed").value(set.seed);
  w.key("kind").value(sample_kind_name(set.kind));
  w.key("n").value(static_cast<std::size_t>(set.xi.rows()));
  w.key("specs_fingerprint").value(specs_fingerprint(specs));
  w.end_object();
}

LabeledCsv read_labeled_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open csv file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line))
    throw IoError("csv file '" + path.string() + "' is empty");

  LabeledCsv csv;
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) csv.columns.push_back(cell);
  if (csv.columns.size() < 2)
    throw IoError("csv file needs at least one input column and a label column");
  const std::size_t d = csv.columns.size() - 1;

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("csv '" + path.string() + "' line " +
                      std::to_string(line_no) + ": '" + cell + "' is not a number");
      }
    }
    if (row.size() != d + 1)
      throw IoError("csv '" + path.string() + "' line " + std::to_string(line_no) +
                    ": expected " + std::to_string(d + 1) + " cells, got " +
                    std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("csv '" + path.string() + "' has no data rows");

  csv.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  csv.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k)
      csv.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    csv.y(static_cast<Eigen::Index>(i)) = rows[i][d];
  }
  return csv;
}

}  // namespace pcnn
