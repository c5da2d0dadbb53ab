#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "smkl/cli.hpp"

namespace smkl::cli {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ContractViolation(msg); }

template <class T>
T parse_value(const std::string& key, const std::string& raw) {
  try {
    return boost::lexical_cast<T>(boost::trim_copy(raw));
  } catch (const boost::bad_lexical_cast&) {
    fail("invalid value '" + raw + "' for key '" + key + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = boost::to_lower_copy(boost::trim_copy(raw));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail("invalid boolean '" + raw + "' for key '" + key + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<std::string> parts;
  boost::split(parts, raw, boost::is_any_of(","));
  std::vector<T> out;
  for (const auto& p : parts) {
    if (boost::trim_copy(p).empty()) continue;
    out.push_back(parse_value<T>(key, p));
  }
  if (out.empty()) fail("empty list for key '" + key + "'");
  return out;
}

// Walks one section, dispatching each key and rejecting unknown ones.
class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {
    for (const auto& [key, child] : tree_) {
      if (!child.empty()) fail("nested keys are not supported in [" + name_ + "]");
      if (!seen_.insert(key).second) fail("duplicate key '" + qualified(key) + "'");
    }
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  std::optional<std::string> take(const std::string& key) {
    auto it = tree_.find(key);
    if (it == tree_.not_found()) return std::nullopt;
    used_.insert(key);
    return it->second.data();
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) fail("missing key '" + qualified(key) + "'");
    return *v;
  }

  template <class T>
  void read(const std::string& key, T& target) {
    if (auto v = take(key)) target = parse_value<T>(qualified(key), *v);
  }

  void read_bool(const std::string& key, bool& target) {
    if (auto v = take(key)) target = parse_bool(qualified(key), *v);
  }

  void finish() const {
    for (const auto& key : seen_)
      if (!used_.count(key)) fail("unknown key '" + qualified(key) + "'");
  }

 private:
  std::string name_;
  const pt::ptree& tree_;
  std::set<std::string> seen_;
  std::set<std::string> used_;
};

void read_experiment(Section& sec, ExperimentConfig& c) {
  if (auto v = sec.take("family")) c.family = family_from_string(boost::trim_copy(*v));
  sec.read("m", c.m);
  sec.read("G", c.groups);
  sec.read("s", c.s);
  sec.read("lambda", c.lambda);
  if (auto v = sec.take("lambda_convention"))
    c.lambda_convention = lambda_convention_from_string(boost::trim_copy(*v));
  sec.read("p", c.p);
  if (auto v = sec.take("group_dims")) c.group_dims = parse_list<int>(sec.qualified("group_dims"), *v);
  sec.read("sigma_lo", c.sigma_lo);
  sec.read("sigma_hi", c.sigma_hi);
  sec.read("noise_std", c.noise_std);
  sec.read("n_instances", c.n_instances);
  sec.read("iters", c.iters);
  sec.read("tau_factor", c.tau_factor);
  sec.read("master_seed", c.master_seed);
  sec.read("reference_factor", c.reference_factor);
  sec.finish();
}

void read_solver(Section& sec, SolverConfig& c) {
  sec.read("tau_factor", c.tau_factor);
  sec.read("max_iters", c.max_iters);
  sec.read("stop_tol", c.stop_tol);
  sec.read_bool("record_trace", c.record_trace);
  sec.read("trace_stride", c.trace_stride);
  sec.finish();
}

void read_problem(Section& sec, FileConfig& cfg) {
  sec.read("index", cfg.instance_index);
  auto data = sec.take("data");
  if (!data) {
    sec.finish();
    return;
  }
  DataProblem p;
  p.data = boost::trim_copy(*data);
  const std::string kernel = boost::trim_copy(sec.require("kernel"));
  if (kernel == "linear") {
    p.kernel = LinearGroupProjection{parse_list<int>(sec.qualified("group_dims"), sec.require("group_dims"))};
  } else if (kernel == "gaussian") {
    p.kernel = GaussianFamily{parse_list<double>(sec.qualified("sigmas"), sec.require("sigmas"))};
  } else {
    fail("invalid value '" + kernel + "' for key '" + sec.qualified("kernel") + "' (expected linear|gaussian)");
  }
  p.lambda = parse_value<double>(sec.qualified("lambda"), sec.require("lambda"));
  if (auto v = sec.take("lambda_convention")) p.convention = lambda_convention_from_string(boost::trim_copy(*v));
  sec.finish();
  cfg.problem = std::move(p);
}

}  // namespace

FileConfig parse_config(std::istream& in, const ExperimentConfig& base) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(std::string("config parse error: ") + e.what());
  }
  FileConfig cfg;
  cfg.experiment = base;
  for (const auto& [name, section] : tree) {
    if (section.empty()) fail("key '" + name + "' must appear inside a section");
    Section sec(name, section);
    if (name == "experiment") {
      read_experiment(sec, cfg.experiment);
    } else if (name == "solver") {
      read_solver(sec, cfg.solver);
      cfg.has_solver_section = true;
    } else if (name == "problem") {
      read_problem(sec, cfg);
    } else {
      fail("unknown section [" + name + "]");
    }
  }
  return cfg;
}

FileConfig load_config(const std::filesystem::path& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) fail("config file '" + path.string() + "' not found (--config)");
  FileConfig cfg = parse_config(in, base);
  if (cfg.problem && cfg.problem->data.is_relative())
    cfg.problem->data = path.parent_path() / cfg.problem->data;
  return cfg;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read data file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    boost::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> parts;
    boost::split(parts, line, boost::is_any_of(","));
    std::vector<double> row;
    bool numeric = true;
    for (const auto& p : parts) {
      try {
        row.push_back(boost::lexical_cast<double>(boost::trim_copy(p)));
      } catch (const boost::bad_lexical_cast&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      fail("data file " + path.string() + ": non-numeric value on line " + std::to_string(line_no));
    }
    if (row.size() < 2) fail("data file " + path.string() + ": need at least one feature and y");
    if (!rows.empty() && row.size() != rows.front().size())
      fail("data file " + path.string() + ": ragged row on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail("data file " + path.string() + " has no rows");
  const auto m = static_cast<Index>(rows.size());
  const auto p = static_cast<Index>(rows.front().size()) - 1;
  Matrix x(m, p);
  Vector y(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    y[i] = rows[static_cast<std::size_t>(i)].back();
  }
  return Dataset(std::move(x), std::move(y));
}

std::optional<ExperimentConfig> preset(const std::string& name) {
  if (name == "group-lasso-paper") return ExperimentConfig::group_lasso_paper();
  if (name == "gaussian-kernel-paper") return ExperimentConfig::gaussian_kernel_paper();
  return std::nullopt;
}

}  // namespace smkl::cli
