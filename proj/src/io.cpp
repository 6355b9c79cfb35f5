#include "hsindy/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hsindy {

using nlohmann::json;

namespace {

// Typed access to one JSON object with field paths in error messages and
// rejection of unknown keys.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(describe() + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError("missing required field '" + field(key) + "'");
    return node_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    return convert<T>(at(key), key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(node_.at(key), key);
  }

  Section child(const std::string& key) { return Section(at(key), field(key)); }

  std::optional<Section> optional_child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Section(node_.at(key), field(key));
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown field '" + field(key) + "'");
    }
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  template <class T>
  T convert(const json& value, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!value.is_number()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!value.is_number_integer()) throw ConfigError("");
      }
      return value.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("field '" + field(key) + "' has the wrong type");
    }
  }

 private:
  std::string describe() const { return path_.empty() ? "config" : "field '" + path_ + "'"; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::vector<double> read_lambdas(Section& section) {
  if (!section.has("lambdas")) return default_lambda_grid();
  const json& node = section.at("lambdas");
  if (node.is_array()) return section.get<std::vector<double>>("lambdas");
  Section grid(node, section.field("lambdas"));
  const double low = grid.get<double>("min");
  const double high = grid.get<double>("max");
  const int count = grid.get<int>("count");
  grid.finish();
  if (!(low > 0.0) || !(high >= low) || count < 1) {
    throw ConfigError("field '" + section.field("lambdas") + "' needs 0 < min <= max and count >= 1");
  }
  return log_spaced(low, high, static_cast<std::size_t>(count));
}

CompressionForm parse_form(const std::string& name, const std::string& field) {
  if (name == "as_printed") return CompressionForm::AsPrinted;
  if (name == "gravity_down") return CompressionForm::GravityDown;
  throw ConfigError("field '" + field + "' must be \"as_printed\" or \"gravity_down\"");
}

std::string form_name(CompressionForm form) {
  return form == CompressionForm::AsPrinted ? "as_printed" : "gravity_down";
}

void read_hopper(Section& root, HopperParams& params, FixedStepOptions& sim) {
  auto section = root.optional_child("hopper");
  if (!section) return;
  params.kappa = section->get<double>("kappa", params.kappa);
  if (section->has("compression_form")) {
    params.form = parse_form(section->get<std::string>("compression_form"),
                             section->field("compression_form"));
  }
  sim.dt = section->get<double>("dt", sim.dt);
  sim.t_end = section->get<double>("t_end", sim.t_end);
  sim.substeps = section->get<int>("substeps", sim.substeps);
  sim.guard_tolerance = section->get<double>("guard_tolerance", sim.guard_tolerance);
  section->finish();
}

json hopper_json(const HopperParams& params, const FixedStepOptions& sim) {
  return {{"kappa", params.kappa},
          {"compression_form", form_name(params.form)},
          {"dt", sim.dt},
          {"t_end", sim.t_end},
          {"substeps", sim.substeps},
          {"guard_tolerance", sim.guard_tolerance}};
}

void read_sir(Section& root, SirParams& params, SirOptions& sim, SirCalendar& calendar) {
  auto section = root.optional_child("sir");
  if (!section) return;
  params.nu = section->get<double>("nu", params.nu);
  params.d = section->get<double>("d", params.d);
  params.N = section->get<double>("N", params.N);
  params.gamma = section->get<double>("gamma", params.gamma);
  params.beta_hat = section->get<double>("beta_hat", params.beta_hat);
  params.b = section->get<double>("b", params.b);
  sim.years = section->get<int>("years", sim.years);
  sim.record_step = section->get<double>("record_step", sim.record_step);
  sim.substeps = section->get<int>("substeps", sim.substeps);
  sim.perturb = section->get<bool>("perturb", sim.perturb);
  sim.perturbation_amplitude =
      section->get<int>("perturbation_amplitude", sim.perturbation_amplitude);
  if (section->has("calendar")) {
    const json& periods = section->at("calendar");
    if (!periods.is_array()) {
      throw ConfigError("field '" + section->field("calendar") + "' must be a list");
    }
    calendar.periods.clear();
    for (const auto& p : periods) {
      if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() ||
          !p[2].is_boolean()) {
        throw ConfigError("field '" + section->field("calendar") +
                          "' entries must be [start, end, in_session]");
      }
      calendar.periods.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<bool>()});
    }
  }
  calendar.year_length = section->get<double>("year_length", calendar.year_length);
  section->finish();
}

json sir_json(const SirParams& params, const SirOptions& sim, const SirCalendar& calendar) {
  json periods = json::array();
  for (const auto& p : calendar.periods) periods.push_back({p.start, p.end, p.in_session});
  return {{"nu", params.nu},
          {"d", params.d},
          {"N", params.N},
          {"gamma", params.gamma},
          {"beta_hat", params.beta_hat},
          {"b", params.b},
          {"years", sim.years},
          {"record_step", sim.record_step},
          {"substeps", sim.substeps},
          {"perturb", sim.perturb},
          {"perturbation_amplitude", sim.perturbation_amplitude},
          {"calendar", periods},
          {"year_length", calendar.year_length}};
}

std::vector<std::vector<double>> read_ics(Section& section, const std::string& key) {
  return section.get<std::vector<std::vector<double>>>(key);
}

std::vector<Index> read_indices(Section& section, const std::string& key) {
  if (!section.has(key)) return {};
  const auto values = section.get<std::vector<long long>>(key);
  return {values.begin(), values.end()};
}

void read_pipeline(Section& root, LoadedConfig& out) {
  PipelineConfig& c = out.pipeline;
  const auto system = root.get<std::string>("system");
  if (system == "hopper") {
    c.system = SystemKind::Hopper;
  } else if (system == "sir") {
    c.system = SystemKind::Sir;
  } else {
    throw ConfigError("field 'system' must be \"hopper\" or \"sir\"");
  }
  read_hopper(root, c.hopper, c.hopper_simulation);
  read_sir(root, c.sir, c.sir_simulation, c.calendar);

  Section data = root.child("data");
  c.training_ics = read_ics(data, "training_ics");
  c.validation_ics = read_ics(data, "validation_ics");
  c.state_columns = read_indices(data, "state_columns");
  c.noise = data.get<double>("noise", c.noise);
  c.noise_validation = data.get<bool>("noise_validation", c.noise_validation);
  data.finish();

  Section id = root.child("identification");
  c.K = id.get<long long>("K");
  c.q = id.get<long long>("q", c.q);
  c.coordinates = read_indices(id, "coordinates");
  c.standardize = id.get<bool>("standardize", c.standardize);
  c.max_order = id.get<int>("max_order", c.max_order);
  c.lambdas = read_lambdas(id);
  c.stlsq.max_iters = id.get<int>("max_iters", c.stlsq.max_iters);
  c.stlsq.normalize_columns = id.get<bool>("normalize_columns", c.stlsq.normalize_columns);
  c.threshold = id.get<double>("threshold", c.threshold);
  c.min_switch_improvement = id.get<double>("min_switch_improvement", c.min_switch_improvement);
  c.blowup_norm = id.get<double>("blowup_norm", c.blowup_norm);
  id.finish();
}

json pipeline_json(const PipelineConfig& c) {
  json j;
  j["system"] = c.system == SystemKind::Hopper ? "hopper" : "sir";
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  if (c.system == SystemKind::Hopper) {
    j["hopper"] = hopper_json(c.hopper, c.hopper_simulation);
  } else {
    j["sir"] = sir_json(c.sir, c.sir_simulation, c.calendar);
  }
  j["data"] = {{"training_ics", c.training_ics},
               {"validation_ics", c.validation_ics},
               {"state_columns", c.state_columns},
               {"noise", c.noise},
               {"noise_validation", c.noise_validation}};
  j["identification"] = {{"K", c.K},
                         {"q", c.q},
                         {"coordinates", c.coordinates},
                         {"standardize", c.standardize},
                         {"max_order", c.max_order},
                         {"lambdas", c.lambdas},
                         {"max_iters", c.stlsq.max_iters},
                         {"normalize_columns", c.stlsq.normalize_columns},
                         {"threshold", c.threshold},
                         {"min_switch_improvement", c.min_switch_improvement},
                         {"blowup_norm", c.blowup_norm}};
  return j;
}

HopperRegime parse_regime(const std::string& name, const std::string& field) {
  if (name == "compression") return HopperRegime::Compression;
  if (name == "flight") return HopperRegime::Flight;
  throw ConfigError("field '" + field + "' entries must be \"compression\" or \"flight\"");
}

void read_sweep(Section& root, LoadedConfig& out) {
  SweepConfig& c = out.sweep;
  read_hopper(root, c.hopper, c.simulation);
  Section s = root.child("sweep");
  if (s.has("regimes")) {
    c.regimes.clear();
    for (const auto& name : s.get<std::vector<std::string>>("regimes")) {
      c.regimes.push_back(parse_regime(name, s.field("regimes")));
    }
  }
  if (s.has("cluster_sizes")) {
    const auto sizes = s.get<std::vector<long long>>("cluster_sizes");
    c.cluster_sizes.assign(sizes.begin(), sizes.end());
  }
  c.noise_levels = s.get<std::vector<double>>("noise_levels", c.noise_levels);
  c.realizations = s.get<int>("realizations", c.realizations);
  c.training_trajectories = s.get<int>("training_trajectories", c.training_trajectories);
  if (s.has("y_range")) {
    const auto r = s.get<std::vector<double>>("y_range");
    if (r.size() != 2) throw ConfigError("field '" + s.field("y_range") + "' needs two values");
    c.y_low = r[0];
    c.y_high = r[1];
  }
  if (s.has("v_range")) {
    const auto r = s.get<std::vector<double>>("v_range");
    if (r.size() != 2) throw ConfigError("field '" + s.field("v_range") + "' needs two values");
    c.v_low = r[0];
    c.v_high = r[1];
  }
  c.guard_margin = s.get<double>("guard_margin", c.guard_margin);
  c.max_order = s.get<int>("max_order", c.max_order);
  c.lambdas = read_lambdas(s);
  c.stlsq.max_iters = s.get<int>("max_iters", c.stlsq.max_iters);
  c.stlsq.normalize_columns = s.get<bool>("normalize_columns", c.stlsq.normalize_columns);
  s.finish();

  if (c.regimes.empty() || c.cluster_sizes.empty() || c.noise_levels.empty()) {
    throw ConfigError("sweep grids must be non-empty");
  }
  for (Index k : c.cluster_sizes) {
    if (k < 1) throw ConfigError("field 'sweep.cluster_sizes' entries must be >= 1");
  }
  for (double e : c.noise_levels) {
    if (!(e >= 0.0)) throw ConfigError("field 'sweep.noise_levels' entries must be >= 0");
  }
  if (c.realizations < 1) throw ConfigError("field 'sweep.realizations' must be >= 1");
  if (c.training_trajectories < 1) {
    throw ConfigError("field 'sweep.training_trajectories' must be >= 1");
  }
  if (!(c.y_low <= c.y_high) || !(c.v_low <= c.v_high)) {
    throw ConfigError("sweep ranges must be ordered low, high");
  }
  if (c.lambdas.empty()) throw ConfigError("field 'sweep.lambdas' must be non-empty");
  if (!(c.hopper.kappa > 0.0) || !(c.simulation.dt > 0.0) || !(c.simulation.t_end > 0.0) ||
      c.simulation.substeps < 1) {
    throw ConfigError("hopper settings must be positive");
  }
}

json sweep_json(const SweepConfig& c) {
  json regimes = json::array();
  for (auto r : c.regimes) regimes.push_back(regime_name(r));
  json j;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["hopper"] = hopper_json(c.hopper, c.simulation);
  j["sweep"] = {{"regimes", regimes},
                {"cluster_sizes", c.cluster_sizes},
                {"noise_levels", c.noise_levels},
                {"realizations", c.realizations},
                {"training_trajectories", c.training_trajectories},
                {"y_range", {c.y_low, c.y_high}},
                {"v_range", {c.v_low, c.v_high}},
                {"guard_margin", c.guard_margin},
                {"max_order", c.max_order},
                {"lambdas", c.lambdas},
                {"max_iters", c.stlsq.max_iters},
                {"normalize_columns", c.stlsq.normalize_columns}};
  return j;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

LoadedConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override,
                          std::optional<unsigned> jobs_override) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw ConfigError("syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(column));
  }

  LoadedConfig out;
  Section root(doc, "");
  const std::uint64_t seed = root.get<std::uint64_t>("seed", 1);
  const unsigned jobs = root.get<unsigned>("jobs", 1);
  if (root.has("sweep")) {
    out.kind = ConfigKind::Sweep;
    read_sweep(root, out);
    out.sweep.seed = seed_override.value_or(seed);
    out.sweep.jobs = jobs_override.value_or(jobs);
    root.finish();
    out.canonical = sweep_json(out.sweep).dump();
  } else {
    out.kind = ConfigKind::Pipeline;
    read_pipeline(root, out);
    out.pipeline.seed = seed_override.value_or(seed);
    out.pipeline.jobs = jobs_override.value_or(jobs);
    root.finish();
    out.pipeline.validate();
    out.canonical = pipeline_json(out.pipeline).dump();
  }
  out.hash = fnv1a(out.canonical);
  return out;
}

LoadedConfig load_config(const std::filesystem::path& path,
                         std::optional<std::uint64_t> seed_override,
                         std::optional<unsigned> jobs_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), seed_override, jobs_override);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_trajectory_csv(std::ostream& out, const TrajectorySet& set, Index traj) {
  const Index n = set.dimension();
  out << "traj_id,t";
  for (Index j = 0; j < n; ++j) out << ",x" << j + 1;
  for (Index j = 0; j < n; ++j) out << ",dx" << j + 1;
  out << ",regime_label\n";
  for (Index i = 0; i < set.rows(); ++i) {
    const Index id = set.trajectory_of(i);
    if (traj >= 0 && id != traj) continue;
    out << id << ',' << format_double(set.times[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < n; ++j) out << ',' << format_double(set.states(i, j));
    for (Index j = 0; j < n; ++j) out << ',' << format_double(set.derivatives(i, j));
    out << ',' << set.regime_labels[static_cast<std::size_t>(i)] << '\n';
  }
}

std::string catalog_json(const ModelCatalog& catalog, const FeatureLibrary& library,
                         const std::vector<std::string>& equation_names, Index anchors) {
  json doc;
  doc["version"] = kVersion;
  doc["anchors"] = anchors;
  doc["equations"] = equation_names;
  doc["library"] = {{"variables", library.variable_names()},
                    {"terms", library.exponents()},
                    {"term_names", library.term_names()}};
  json entries = json::array();
  std::size_t rank = 1;
  for (const CatalogEntry* entry : catalog.rank_by_frequency()) {
    json positions = json::array();
    for (const auto& p : entry->signature.positions()) positions.push_back({p.equation, p.term});
    json contributors = json::array();
    for (const auto& c : entry->contributions) contributors.push_back(c.anchor);
    entries.push_back({{"rank", rank++},
                       {"signature", entry->signature.key()},
                       {"description", entry->signature.describe(library, equation_names)},
                       {"positions", positions},
                       {"k", entry->signature.size()},
                       {"frequency", entry->frequency()},
                       {"mean_aicc", entry->mean_aicc()},
                       {"representative", matrix_json(entry->representative())},
                       {"anchors", contributors}});
  }
  doc["entries"] = entries;
  return doc.dump(2) + "\n";
}

void write_regime_map_csv(std::ostream& out, const std::vector<RegimeMapRow>& rows,
                          const FeatureLibrary& library,
                          const std::vector<std::string>& equation_names) {
  const Index d = rows.empty() ? 0 : rows.front().coordinates.size();
  out << "anchor_index,traj_id,t";
  for (Index c = 0; c < d; ++c) out << ",c" << c + 1;
  out << ",true_label,resolved,frequency_rank,model_signature,k,aicc";
  for (const auto& eq : equation_names) {
    for (const auto& term : library.term_names()) out << ',' << csv_escape(eq + ":" + term);
  }
  out << '\n';
  const Index p = library.size();
  const auto n = static_cast<Index>(equation_names.size());
  for (const auto& row : rows) {
    out << row.anchor << ',' << row.trajectory << ',' << format_double(row.time);
    for (Index c = 0; c < d; ++c) out << ',' << format_double(row.coordinates(c));
    out << ',' << row.true_label << ',' << (row.resolved ? 1 : 0) << ',' << row.frequency_rank
        << ',' << (row.resolved ? row.signature.key() : std::string("unresolved")) << ','
        << (row.resolved ? row.signature.size() : 0) << ',' << format_double(row.aicc);
    for (Index j = 0; j < n; ++j) {
      for (Index l = 0; l < p; ++l) {
        out << ',' << format_double(row.resolved ? row.coefficients(l, j) : 0.0);
      }
    }
    out << '\n';
  }
}

void write_scoreboard_csv(std::ostream& out, const std::vector<ClusterOutcome>& outcomes) {
  out << "anchor_index,model_signature,k,aicc,rel_aicc\n";
  for (const auto& outcome : outcomes) {
    for (const auto& s : outcome.scored) {
      out << outcome.cluster.anchor << ',' << s.model.signature().key() << ',' << s.model.k << ','
          << format_double(s.aicc) << ',' << format_double(s.rel_aicc) << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "regime,K,epsilon,kappa,kappa_eps,success_fraction\n";
  for (const auto& c : cells) {
    out << c.regime << ',' << c.cluster_size << ',' << format_double(c.epsilon) << ','
        << format_double(c.kappa) << ',' << format_double(c.kappa_eps) << ','
        << format_double(c.success_fraction) << '\n';
  }
}

std::string RunManifest::to_json() const {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  json doc = {{"command", command},
              {"version", version},
              {"config_hash", hash},
              {"seed", seed},
              {"started", started},
              {"finished", finished},
              {"files", files}};
  return doc.dump(2) + "\n";
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void write_file(const std::filesystem::path& dir, const std::string& name,
                const std::string& content, RunManifest& manifest) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
  manifest.files.push_back(name);
}

}  // namespace hsindy
