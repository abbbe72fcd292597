#include "cli.hpp"

#include "settings.hpp"

#include "ecgraph/classifier.hpp"
#include "ecgraph/correction.hpp"
#include "ecgraph/errors.hpp"
#include "ecgraph/filters.hpp"
#include "ecgraph/format.hpp"
#include "ecgraph/graph.hpp"
#include "ecgraph/learning.hpp"
#include "ecgraph/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace ecgraph::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Option tables

std::vector<OptionSpec> output_options() {
  return {
      {"seed", Kind::Int, "Seed for every random draw (default 0)"},
      {"out", Kind::Text, "Directory for output files (default: stdout)"},
      {"format", Kind::Text, "Table format: csv or json"},
      {"deterministic", Kind::Flag,
       "Pin unset seeds to 0 and omit timestamps and timings (default on)"},
  };
}

std::vector<OptionSpec> graph_options() {
  return {
      {"graph", Kind::Text, "Edge-list file"},
      {"grid", Kind::Text, "Grid graph RxC"},
      {"er", Kind::Text, "Erdos-Renyi graph n,avg_degree"},
      {"edges", Kind::Text, "Inline edge list, edges separated by ';'"},
      {"nodes", Kind::Int, "Node count hint for edge lists"},
  };
}

std::vector<OptionSpec> concat(std::vector<std::vector<OptionSpec>> groups) {
  std::vector<OptionSpec> all;
  for (auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  return all;
}

struct Command {
  std::string name;
  std::string description;
  std::vector<OptionSpec> options;
  std::function<void(const Settings&, std::ostream&, std::ostream&)> body;
};

// ---------------------------------------------------------------------------
// Shared plumbing

enum class Format { Csv, Json };

struct RunContext {
  bool deterministic = true;
  std::uint64_t seed = 0;
  Format format = Format::Csv;
  std::optional<fs::path> out_dir;
};

RunContext make_context(const Settings& s, std::ostream& err) {
  RunContext ctx;
  ctx.deterministic = s.flag("deterministic", true);
  const std::string format = s.text("format", "csv");
  if (format == "csv") {
    ctx.format = Format::Csv;
  } else if (format == "json") {
    ctx.format = Format::Json;
  } else {
    throw ValidationError("--format must be csv or json, got '" + format + "'");
  }
  if (s.has("seed")) {
    const std::int64_t seed = s.integer("seed", 0);
    if (seed < 0) throw ValidationError("--seed must be non-negative");
    ctx.seed = static_cast<std::uint64_t>(seed);
  } else if (!ctx.deterministic) {
    ctx.seed = std::random_device{}();
    err << "seed=" << ctx.seed << " (drawn; pass --seed to repeat this run)\n";
  }
  if (const auto out = s.maybe_text("out")) ctx.out_dir = fs::path(*out);
  return ctx;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<ordered_json>> rows;

  void add(std::vector<ordered_json> row) { rows.push_back(std::move(row)); }
};

std::string cell_text(const ordered_json& cell) {
  if (cell.is_number_float()) return format_double(cell.get<double>());
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_null()) return "";
  return cell.dump();
}

std::string render(const Table& table, Format format, const std::optional<std::string>& stamp) {
  std::ostringstream os;
  if (format == Format::Csv) {
    if (stamp) os << "# generated " << *stamp << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      os << (c ? "," : "") << table.columns[c];
    }
    os << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << cell_text(row[c]);
      os << "\n";
    }
    return os.str();
  }
  ordered_json doc = ordered_json::object();
  if (stamp) doc["generated"] = *stamp;
  auto rows = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json obj = ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[table.columns[c]] = row[c];
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << content;
  if (!file) throw std::runtime_error("write failed for " + path.string());
}

/// Collects every artifact of a run in memory and writes them once at the end.
class Outputs {
 public:
  explicit Outputs(const RunContext& ctx) : ctx_(ctx) {
    if (!ctx.deterministic) stamp_ = utc_timestamp();
  }

  // The primary table goes to stdout when no output directory is set.
  void primary(std::string stem, Table table) { add(std::move(stem), std::move(table), true); }
  void secondary(std::string stem, Table table) { add(std::move(stem), std::move(table), false); }
  void raw(std::string filename, std::string content) {
    raw_.emplace_back(std::move(filename), std::move(content));
  }

  void flush(std::ostream& out) const {
    const std::string ext = ctx_.format == Format::Csv ? ".csv" : ".json";
    if (!ctx_.out_dir) {
      for (const auto& t : tables_) {
        if (t.primary) out << render(t.table, ctx_.format, stamp_);
      }
      return;
    }
    std::error_code ec;
    fs::create_directories(*ctx_.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + ctx_.out_dir->string() + ": " + ec.message());
    for (const auto& t : tables_) {
      write_file(*ctx_.out_dir / (t.stem + ext), render(t.table, ctx_.format, stamp_));
    }
    for (const auto& [name, content] : raw_) write_file(*ctx_.out_dir / name, content);
  }

 private:
  struct Entry {
    std::string stem;
    Table table;
    bool primary;
  };

  void add(std::string stem, Table table, bool primary) {
    tables_.push_back({std::move(stem), std::move(table), primary});
  }

  const RunContext& ctx_;
  std::optional<std::string> stamp_;
  std::vector<Entry> tables_;
  std::vector<std::pair<std::string, std::string>> raw_;
};

std::pair<Index, Index> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw ValidationError("--grid expects RxC, got '" + text + "'");
  const auto rows = parse_int(text.substr(0, x), "--grid rows");
  const auto cols = parse_int(text.substr(x + 1), "--grid cols");
  if (rows < 1 || cols < 1) throw ValidationError("--grid dimensions must be positive");
  return {rows, cols};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::pair<double, double> jacobi_ab(const Settings& s) {
  const auto ab = s.reals("jacobi-ab", {1.0, 1.0});
  if (ab.size() != 2) throw ValidationError("--jacobi-ab expects a,b");
  return {ab[0], ab[1]};
}

std::vector<Basis> parse_bases(const Settings& s, const std::string& fallback) {
  const auto [a, b] = jacobi_ab(s);
  std::vector<Basis> bases;
  for (const auto& name : split_list(s.text("basis", fallback))) {
    bases.push_back(parse_basis(name, a, b));
    validate_basis(bases.back());
  }
  if (bases.empty()) throw ValidationError("--basis must name at least one basis");
  return bases;
}

int checked_int(const Settings& s, std::string_view key, std::int64_t fallback, std::int64_t lo,
                std::int64_t hi) {
  const auto value = s.integer(key, fallback);
  if (value < lo || value > hi) {
    throw ValidationError("--" + std::string(key) + " must lie in [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "], got " + std::to_string(value));
  }
  return static_cast<int>(value);
}

double checked_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("beta must lie in [0, 1], got " + format_double(beta));
  }
  return beta;
}

/// Resolves the graph source without decomposing anything.
struct GraphSource {
  std::function<RandomGraph()> build;
  std::string description;
};

GraphSource graph_source(const Settings& s, std::uint64_t seed) {
  const std::vector<std::string> keys{"graph", "grid", "er", "edges"};
  const auto given = std::count_if(keys.begin(), keys.end(), [&](auto& k) { return s.has(k); });
  if (given != 1) {
    throw ValidationError("exactly one graph source is required: --graph, --grid, --er or --edges");
  }
  std::optional<Index> hint;
  if (s.has("nodes")) {
    const auto n = s.integer("nodes", 0);
    if (n < 1) throw ValidationError("--nodes must be positive");
    hint = n;
  }

  if (const auto path = s.maybe_text("graph")) {
    return {[p = *path, hint] { return RandomGraph{load_edge_list(p, hint), 0}; }, *path};
  }
  if (const auto grid = s.maybe_text("grid")) {
    const auto [rows, cols] = parse_grid(*grid);
    if (rows * cols < 2) throw ValidationError("--grid needs at least two nodes");
    return {[rows, cols] { return RandomGraph{grid_graph(rows, cols), 0}; }, "grid " + *grid};
  }
  if (const auto er = s.maybe_text("er")) {
    const auto parts = parse_real_list(*er, "--er");
    if (parts.size() != 2) throw ValidationError("--er expects n,avg_degree");
    const Index n = static_cast<Index>(parts[0]);
    if (static_cast<double>(n) != parts[0] || n < 2) {
      throw ValidationError("--er node count must be an integer >= 2");
    }
    const double d = parts[1];
    if (!(d > 0.0 && d <= static_cast<double>(n - 1))) {
      throw ValidationError("--er average degree must lie in (0, n-1]");
    }
    return {[n, d, seed] { return erdos_renyi(n, d, seed); }, "erdos-renyi " + *er};
  }
  std::string text = s.text("edges", "");
  std::replace(text.begin(), text.end(), ';', '\n');
  Graph g = from_edge_list(text, hint);
  return {[g] { return RandomGraph{g, 0}; }, "inline edge list"};
}

EigenSystem maybe_shuffle(const Settings& s, EigenSystem eig, std::uint64_t seed) {
  if (!s.flag("shuffle-ties", false)) return eig;
  return shuffle_tie_groups(eig, kDefaultDistinctTolerance, seed);
}

double seconds_or_zero(const RunContext& ctx, double seconds) {
  return ctx.deterministic ? 0.0 : seconds;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_stats(const Settings& s, std::ostream& out, std::ostream& err) {
  const RunContext ctx = make_context(s, err);
  const double tol = s.real("tol", kDefaultDistinctTolerance);
  if (!(tol >= 0.0)) throw ValidationError("--tol must be non-negative");
  const double beta = checked_beta(s.real("beta", 1.0));
  const GraphSource source = graph_source(s, ctx.seed);

  const RandomGraph rg = source.build();
  const EigenSystem eig = maybe_shuffle(s, eigendecompose(rg.graph), ctx.seed);
  const SpectrumStats stats = count_distinct(as_span(eig.eigenvalues()), tol);
  const CorrectedSpectrum spec = correct(eig, beta);
  const SpectrumStats corrected = count_distinct(as_span(spec.mu), tol);
  const MonotonicityReport mono = verify_strictly_increasing(as_span(spec.mu));

  Table table{{"n", "edges", "tol", "distinct", "p_distinct", "multiplicity_at_one", "beta",
               "distinct_corrected", "min_gap_corrected"},
              {}};
  table.add({stats.n_total, rg.graph.num_edges(), tol, stats.n_distinct, stats.p_distinct,
             stats.multiplicity_at_one, beta, corrected.n_distinct,
             std::isfinite(mono.min_gap) ? ordered_json(mono.min_gap) : ordered_json(nullptr)});

  Table spectrum{{"index", "lambda", "upsilon", "mu"}, {}};
  for (Index i = 0; i < spec.mu.size(); ++i) {
    spectrum.add({i, spec.lambda(i), spec.upsilon(i), spec.mu(i)});
  }

  Outputs outputs(ctx);
  outputs.primary("stats", std::move(table));
  outputs.secondary("spectrum", std::move(spectrum));
  outputs.flush(out);

  err << "n=" << stats.n_total << ", distinct=" << stats.n_distinct
      << ", p=" << percent(stats.p_distinct) << "\n";
  if (beta < 1.0) {
    err << "beta=" << format_double(beta) << ": distinct=" << corrected.n_distinct
        << ", min gap=" << format_double(mono.min_gap) << "\n";
  }
}

void cmd_hist(const Settings& s, std::ostream& out, std::ostream& err) {
  const RunContext ctx = make_context(s, err);
  const int bins = checked_int(s, "bins", 20, 1, 1'000'000);
  const double beta = checked_beta(s.real("beta", 1.0));
  const GraphSource source = graph_source(s, ctx.seed);

  const EigenSystem eig = eigendecompose(source.build().graph);
  const CorrectedSpectrum spec = correct(eig, beta);
  const Histogram hist = spectrum_histogram(as_span(spec.mu), bins);

  Table table{{"bin_left", "bin_right", "density"}, {}};
  std::size_t peak = 0;
  for (std::size_t b = 0; b < hist.densities.size(); ++b) {
    table.add({hist.bin_edges[b], hist.bin_edges[b + 1], hist.densities[b]});
    if (hist.densities[b] > hist.densities[peak]) peak = b;
  }
  Outputs outputs(ctx);
  outputs.primary("histogram", std::move(table));
  outputs.flush(out);

  err << "n=" << eig.size() << ", bins=" << bins << ", peak bin [" << format_double(hist.bin_edges[peak])
      << ", " << format_double(hist.bin_edges[peak + 1]) << "]\n";
}

void cmd_random_spectrum(const Settings& s, std::ostream& out, std::ostream& err) {
  const RunContext ctx = make_context(s, err);
  const int n = checked_int(s, "n", 1000, 2, 20000);
  const auto degrees = s.reals("degrees", {2.0, 10.0, 100.0});
  for (const double d : degrees) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw ValidationError("degree " + format_double(d) + " must be positive");
    }
  }
  const auto window = s.reals("window", {0.9, 1.1});
  if (window.size() != 2 || !(window[0] <= window[1])) {
    throw ValidationError("--window expects lo,hi with lo <= hi");
  }
  const double tol = s.real("tol", kDefaultDistinctTolerance);
  if (!(tol >= 0.0)) throw ValidationError("--tol must be non-negative");

  Table table{{"n", "degree", "seed", "edges", "repaired_nodes", "distinct", "p_distinct",
               "window_lo", "window_hi", "fraction_in_window"},
              {}};
  std::vector<double> fractions;
  for (const double d : degrees) {
    // Degrees at or above n-1 mean p = 1: the complete graph.
    const double feasible = std::min(d, static_cast<double>(n - 1));
    if (feasible < d) {
      err << "degree " << format_double(d) << " exceeds n-1; using the complete graph\n";
    }
    const RandomGraph rg = erdos_renyi(n, feasible, ctx.seed);
    const EigenSystem eig = eigendecompose(rg.graph);
    const auto values = as_span(eig.eigenvalues());
    const SpectrumStats stats = count_distinct(values, tol);
    fractions.push_back(fraction_in_range(values, window[0], window[1]));
    table.add({n, d, ctx.seed, rg.graph.num_edges(), rg.repaired_nodes, stats.n_distinct,
               stats.p_distinct, window[0], window[1], fractions.back()});
  }
  Outputs outputs(ctx);
  outputs.primary("random_spectrum", std::move(table));
  outputs.flush(out);

  for (std::size_t i = 0; i < degrees.size(); ++i) {
    err << "degree " << format_double(degrees[i]) << ": " << percent(fractions[i]) << " in ["
        << format_double(window[0]) << ", " << format_double(window[1]) << "]\n";
  }
  if (fractions.size() > 1) {
    const bool increasing = std::adjacent_find(fractions.begin(), fractions.end(),
                                               std::greater_equal<>()) == fractions.end();
    err << "strictly increasing across degrees: " << (increasing ? "yes" : "no") << "\n";
  }
}

void cmd_fit_filter(const Settings& s, std::ostream& out, std::ostream& err) {
  const RunContext ctx = make_context(s, err);
  FilterExperimentConfig config;
  if (s.has("graph") || s.has("er") || s.has("edges")) {
    throw ValidationError("fit-filter runs on grid graphs only; use --grid RxC");
  }
  std::tie(config.rows, config.cols) = parse_grid(s.text("grid", "16x16"));
  config.images = checked_int(s, "images", config.images, 1, 100000);
  config.smoothing_passes = checked_int(s, "smoothing", config.smoothing_passes, 0, 10000);
  config.signal_seed = ctx.seed;
  if (s.has("targets")) {
    config.targets.clear();
    for (const auto& name : split_list(s.text("targets", ""))) {
      config.targets.push_back(parse_target(name));
    }
  }
  config.bases = parse_bases(s, "gpr,bern,jacobi");
  if (s.has("beta") && s.has("beta-grid")) {
    throw ValidationError("give either --beta or --beta-grid, not both");
  }
  if (s.has("beta")) config.beta_grid = {s.real("beta", 1.0)};
  if (s.has("beta-grid")) config.beta_grid = s.reals("beta-grid", {});
  config.fit.order = checked_int(s, "order", config.fit.order, 0, 1000);
  config.fit.learning_rate = s.real("lr", config.fit.learning_rate);
  config.fit.max_iters = checked_int(s, "max-iters", config.fit.max_iters, 1, 100'000'000);
  config.fit.seed = ctx.seed;
  config.with_oracle = s.flag("oracle", false);
  config.shuffle_ties = s.flag("shuffle-ties", false);
  validate(config);

  const auto start = std::chrono::steady_clock::now();
  const FilterExperimentReport report = run_filter_experiment(config);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Table table{{"target", "basis", "beta", "K", "mse", "seconds"}, {}};
  if (config.with_oracle) table.columns.push_back("oracle_mse");
  for (const FilterRecord& r : report.records) {
    std::vector<ordered_json> row{std::string(target_name(r.target)), basis_name(r.basis), r.beta,
                                  r.order, r.mse, seconds_or_zero(ctx, r.seconds)};
    if (config.with_oracle) row.emplace_back(r.oracle_mse ? ordered_json(*r.oracle_mse) : nullptr);
    table.add(std::move(row));
  }
  Table summary{{"target", "basis", "baseline_mse", "best_beta", "best_mse", "improvement"}, {}};
  for (const FilterSummary& f : report.summaries) {
    summary.add({std::string(target_name(f.target)), basis_name(f.basis), f.baseline_mse,
                 f.best_beta, f.best_mse, f.improvement});
  }

  Outputs outputs(ctx);
  outputs.primary("filter_report", std::move(table));
  outputs.secondary("filter_summary", std::move(summary));
  outputs.raw("filter_summary.json", filter_summary_json(report));
  outputs.flush(out);

  err << "grid " << config.rows << "x" << config.cols << ", " << config.images
      << " signals, distinct eigenvalues " << report.spectrum.n_distinct << "/"
      << report.spectrum.n_total << "\n";
  for (const FilterSummary& f : report.summaries) {
    err << target_name(f.target) << " " << basis_name(f.basis)
        << ": beta=1 mse=" << format_double(f.baseline_mse)
        << ", best beta=" << format_double(f.best_beta) << " mse=" << format_double(f.best_mse)
        << " (" << percent(f.improvement) << ")\n";
  }
  if (!ctx.deterministic) err << "elapsed " << elapsed << " s\n";
}

struct ClassifySetup {
  std::function<std::pair<Graph, LabeledDataset>()> build;
};

ClassifySetup classify_setup(const Settings& s, const RunContext& ctx) {
  const bool files = s.has("features") || s.has("labels");
  const bool graph_flags = s.has("graph") || s.has("grid") || s.has("er") || s.has("edges");
  if (files || graph_flags) {
    if (s.has("sbm")) throw ValidationError("--sbm cannot be combined with dataset files");
    if (!s.has("features") || !s.has("labels")) {
      throw ValidationError("a graph dataset needs both --features and --labels");
    }
    const GraphSource source = graph_source(s, ctx.seed);
    std::optional<SplitFiles> splits;
    if (const auto text = s.maybe_text("splits")) {
      const auto parts = split_list(*text);
      if (parts.size() != 3) throw ValidationError("--splits expects train,val,test files");
      splits = SplitFiles{parts[0], parts[1], parts[2]};
    }
    const fs::path features = s.text("features", "");
    const fs::path labels = s.text("labels", "");
    return {[=] {
      Graph g = source.build().graph;
      LabeledDataset data = load_labeled_dataset(features, labels, splits, ctx.seed);
      if (data.features.rows() != g.num_nodes()) {
        throw ValidationError("dataset has " + std::to_string(data.features.rows()) +
                              " rows but the graph has " + std::to_string(g.num_nodes()) +
                              " nodes");
      }
      return std::pair{std::move(g), std::move(data)};
    }};
  }

  SbmDatasetConfig sbm;
  const auto parts = s.reals("sbm", {200.0, sbm.p_in, sbm.p_out});
  if (parts.size() != 3) throw ValidationError("--sbm expects n,p_in,p_out");
  sbm.nodes = static_cast<Index>(parts[0]);
  if (static_cast<double>(sbm.nodes) != parts[0]) {
    throw ValidationError("--sbm node count must be an integer");
  }
  sbm.p_in = parts[1];
  sbm.p_out = parts[2];
  sbm.classes = checked_int(s, "classes", sbm.classes, 2, 1000);
  sbm.feature_dim = checked_int(s, "feature-dim", sbm.feature_dim, 1, 100000);
  sbm.signal = s.real("signal", sbm.signal);
  sbm.noise = s.real("noise", sbm.noise);
  sbm.random_labels = s.flag("random-labels", false);
  sbm.seed = ctx.seed;
  if (sbm.nodes < 2 * sbm.classes) throw ValidationError("--sbm needs at least 2 nodes per class");
  if (!(sbm.p_in >= 0.0 && sbm.p_in <= 1.0 && sbm.p_out >= 0.0 && sbm.p_out <= 1.0)) {
    throw ValidationError("--sbm probabilities must lie in [0, 1]");
  }
  if (sbm.feature_dim < sbm.classes) {
    throw ValidationError("--feature-dim must be at least the number of classes");
  }
  if (!(sbm.noise >= 0.0)) throw ValidationError("--noise must be non-negative");
  return {[sbm] {
    SyntheticGraphDataset ds = make_sbm_dataset(sbm);
    return std::pair{std::move(ds.graph), std::move(ds.data)};
  }};
}

void cmd_classify(const Settings& s, std::ostream& out, std::ostream& err) {
  const RunContext ctx = make_context(s, err);
  ClassifierConfig config;
  const auto bases = parse_bases(s, "gpr");
  if (bases.size() != 1) throw ValidationError("classify trains one basis at a time");
  config.basis = bases.front();
  config.order = checked_int(s, "order", config.order, 0, 1000);
  config.learning_rate = s.real("lr", config.learning_rate);
  config.weight_decay = s.real("weight-decay", config.weight_decay);
  config.max_epochs = checked_int(s, "epochs", config.max_epochs, 1, 10'000'000);
  config.patience = checked_int(s, "patience", config.patience, 1, 10'000'000);
  config.seed = ctx.seed;
  validate(config);

  const bool sweep = s.flag("beta-sweep", false);
  std::vector<double> betas;
  if (sweep) {
    if (s.has("beta")) throw ValidationError("--beta-sweep uses --beta-grid, not --beta");
    betas = s.reals("beta-grid", classification_beta_grid());
    if (std::find(betas.begin(), betas.end(), 1.0) == betas.end()) betas.push_back(1.0);
  } else {
    if (s.has("beta-grid")) throw ValidationError("--beta-grid requires --beta-sweep");
    betas = {s.real("beta", 1.0)};
  }
  for (const double b : betas) checked_beta(b);
  const ClassifySetup setup = classify_setup(s, ctx);

  const auto [graph, data] = setup.build();
  validate(data);
  const EigenSystem eig = maybe_shuffle(s, eigendecompose(graph), ctx.seed);

  std::vector<ClassifierReport> reports;
  for (const double beta : betas) {
    reports.push_back(train_classifier(data, eig, correct(eig, beta), config));
  }

  Table detail{{"beta", "basis", "K", "train_accuracy", "val_accuracy", "test_accuracy",
                "best_epoch", "epochs_run", "final_loss", "seconds"},
               {}};
  for (const ClassifierReport& r : reports) {
    detail.add({r.beta, basis_name(config.basis), config.order, r.train_accuracy,
                r.val_accuracy, r.test_accuracy, r.best_epoch, r.epochs_run, r.final_loss,
                seconds_or_zero(ctx, r.wall_seconds)});
  }

  Outputs outputs(ctx);
  if (!sweep) {
    outputs.primary("classify", std::move(detail));
    outputs.flush(out);
    const ClassifierReport& r = reports.front();
    err << basis_name(config.basis) << " K=" << config.order << " beta=" << format_double(r.beta)
        << ": train " << format_double(r.train_accuracy) << ", val "
        << format_double(r.val_accuracy) << ", test " << format_double(r.test_accuracy) << "\n";
    return;
  }

  // Ties on validation accuracy keep the smallest beta in grid order.
  const auto best = std::max_element(
      reports.begin(), reports.end(),
      [](const ClassifierReport& a, const ClassifierReport& b) {
        return a.val_accuracy < b.val_accuracy;
      });
  Table curve{{"beta", "accuracy"}, {}};
  for (const ClassifierReport& r : reports) curve.add({r.beta, r.test_accuracy});
  Table selection{{"criterion", "beta", "val_accuracy", "test_accuracy"}, {}};
  selection.add({"validation_accuracy", best->beta, best->val_accuracy, best->test_accuracy});

  outputs.primary("beta_sweep", std::move(curve));
  outputs.secondary("beta_sweep_detail", std::move(detail));
  outputs.secondary("beta_selection", std::move(selection));
  outputs.flush(out);
  err << "swept " << reports.size() << " beta values; selected beta=" << format_double(best->beta)
      << " by validation accuracy " << format_double(best->val_accuracy) << ", test accuracy "
      << format_double(best->test_accuracy) << "\n";
}

std::vector<Command> commands() {
  const auto common = output_options();
  const auto graph = graph_options();
  const std::vector<OptionSpec> tol{{"tol", Kind::Real, "Distinct-eigenvalue tolerance"}};
  const std::vector<OptionSpec> beta{
      {"beta", Kind::Real, "Correction weight in [0, 1]"},
      {"shuffle-ties", Kind::Flag, "Randomly reorder eigenvectors inside eigenvalue ties"}};
  const std::vector<OptionSpec> model{
      {"basis", Kind::Text, "Polynomial basis: gpr, bern or jacobi"},
      {"jacobi-ab", Kind::RealList, "Jacobi parameters a,b (default 1,1)"},
      {"order", Kind::Int, "Polynomial order K (default 10)"},
      {"beta-grid", Kind::RealList, "Comma-separated beta values"},
      {"lr", Kind::Real, "Learning rate"},
  };

  return {
      {"stats", "Distinct-eigenvalue statistics of a graph",
       concat({graph, common, tol, beta}), cmd_stats},
      {"hist", "Eigenvalue density histogram over [0, 2]",
       concat({graph, common, beta, {{"bins", Kind::Int, "Number of bins (default 20)"}}}),
       cmd_hist},
      {"random-spectrum", "Spectrum concentration of Erdos-Renyi graphs",
       concat({common,
               tol,
               {{"n", Kind::Int, "Node count (default 1000)"},
                {"degrees", Kind::RealList, "Average degrees (default 2,10,100)"},
                {"window", Kind::RealList, "Concentration window lo,hi (default 0.9,1.1)"}}}),
       cmd_random_spectrum},
      {"fit-filter", "Learn target filters on a grid graph across a beta grid",
       concat({{{"grid", Kind::Text, "Grid graph RxC (default 16x16)"},
                {"graph", Kind::Text, "Not supported; fit-filter uses grids"},
                {"er", Kind::Text, "Not supported; fit-filter uses grids"},
                {"edges", Kind::Text, "Not supported; fit-filter uses grids"}},
               common, beta, model,
               {{"images", Kind::Int, "Number of synthetic signals (default 10)"},
                {"smoothing", Kind::Int, "Smoothing passes per signal (default 2)"},
                {"targets", Kind::Text, "Target filters: low,high,band,reject,comb"},
                {"max-iters", Kind::Int, "Gradient-descent iterations (default 20000)"},
                {"oracle", Kind::Flag, "Add the least-squares oracle column"}}}),
       cmd_fit_filter},
      {"classify", "Train the spectral node classifier",
       concat({graph, common, beta, model,
               {{"features", Kind::Text, "Features CSV"},
                {"labels", Kind::Text, "Labels CSV"},
                {"splits", Kind::Text, "Split index files train,val,test"},
                {"sbm", Kind::RealList, "Synthetic block model n,p_in,p_out (default)"},
                {"classes", Kind::Int, "Classes of the synthetic dataset (default 2)"},
                {"feature-dim", Kind::Int, "Feature dimension of the synthetic dataset"},
                {"signal", Kind::Real, "Class signal strength of synthetic features"},
                {"noise", Kind::Real, "Feature noise stddev of the synthetic dataset"},
                {"random-labels", Kind::Flag, "Draw labels independently of the graph"},
                {"weight-decay", Kind::Real, "L2 penalty on the weights"},
                {"epochs", Kind::Int, "Maximum epochs (default 1000)"},
                {"patience", Kind::Int, "Early-stopping patience (default 200)"},
                {"beta-sweep", Kind::Flag, "Train across --beta-grid and emit beta,accuracy"}}}),
       cmd_classify},
  };
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral graph filtering with eigenvalue correction", "ecgraph"};
  app.require_subcommand(1);

  const std::vector<Command> table = commands();
  struct Bound {
    const Command* command;
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::string config;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const Command& cmd : table) {
    auto b = std::make_unique<Bound>();
    b->command = &cmd;
    b->app = app.add_subcommand(cmd.name, cmd.description);
    b->app->add_option("--config", b->config, "JSON config file; flags override its values");
    for (const OptionSpec& opt : cmd.options) {
      if (opt.kind != Kind::Flag) {
        static const std::map<Kind, std::string> type_names{
            {Kind::Int, "INT"}, {Kind::Real, "FLOAT"}, {Kind::Text, "TEXT"},
            {Kind::RealList, "LIST"}};
        b->app->add_option("--" + opt.name, b->values[opt.name], opt.help)
            ->type_name(type_names.at(opt.kind));
      } else if (opt.name == "deterministic") {
        b->app->add_flag("--deterministic,!--no-deterministic", b->flags[opt.name], opt.help);
      } else {
        b->app->add_flag("--" + opt.name, b->flags[opt.name], opt.help);
      }
    }
    bound.push_back(std::move(b));
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    for (const auto& b : bound) {
      if (b->app->parsed()) {
        err << "error: " << e.what() << "\n" << b->app->help();
        return kExitValidation;
      }
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }

  for (const auto& b : bound) {
    if (!b->app->parsed()) continue;
    try {
      std::map<std::string, std::string> given;
      for (const OptionSpec& opt : b->command->options) {
        if (b->app->get_option("--" + opt.name)->count() == 0) continue;
        if (opt.kind == Kind::Flag) {
          given[opt.name] = b->flags[opt.name] ? "true" : "false";
        } else {
          given[opt.name] = b->values[opt.name];
        }
      }
      const nlohmann::json file =
          b->config.empty() ? nlohmann::json() : read_config_file(b->config);
      const Settings settings = Settings::merge(b->command->options, file, given);
      b->command->body(settings, out, err);
      return kExitOk;
    } catch (const ValidationError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const NumericError& e) {
      err << "numeric error: " << e.what() << "\n";
      return kExitNumeric;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }
  return kExitFailure;
}

}  // namespace ecgraph::cli
