// smallcells: simulation and verification toolkit for the shape of small
// cells in stationary Poisson line/hyperplane tessellations.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smallcells/analytic.hpp"
#include "smallcells/common.hpp"
#include "smallcells/experiments.hpp"
#include "smallcells/io.hpp"
#include "smallcells/model.hpp"
#include "smallcells/sampler.hpp"

namespace sc = smallcells;

namespace {

struct Opts {
  std::string model_path;
  bool std2d = false;
  bool std3d = false;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  std::uint32_t k = 150;
  std::uint32_t threads = 0;  // 0 = unset; env/1 fallback
  std::string out;
  std::string eps_csv;
  std::string threshold_csv;
  std::string functional;
  std::string window_csv;
  std::string quantity;
  int max_subdivisions = 0;  // 0 = library default
};

void add_model_flags(CLI::App* cmd, Opts& o) {
  cmd->add_option("--model", o.model_path,
                  "model description file (key=value format)");
  cmd->add_flag("--standard-2d", o.std2d,
                "orthogonal two-direction planar model with unit edge rates");
  cmd->add_flag("--standard-3d", o.std3d,
                "axis-aligned spatial model with unit edge rates");
}

sc::TessellationModel resolve_model(const Opts& o) {
  const int picked = (o.model_path.empty() ? 0 : 1) + (o.std2d ? 1 : 0) +
                     (o.std3d ? 1 : 0);
  if (picked != 1)
    throw std::invalid_argument(
        "choose exactly one of --model, --standard-2d, --standard-3d");
  if (o.std2d) return sc::standard_model_2d();
  if (o.std3d) return sc::standard_model_3d();
  return sc::model_from_file(o.model_path);
}

std::uint32_t resolve_threads(const Opts& o) {
  if (o.threads > 0) return o.threads;
  if (const char* env = std::getenv("SMALLCELLS_THREADS")) {
    const std::string s(env);
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("SMALLCELLS_THREADS is not a number: " + s);
    }
    if (used != s.size() || v == 0 || v > 0xFFFFFFFFul)
      throw std::invalid_argument("SMALLCELLS_THREADS is not a valid thread "
                                  "count: " +
                                  s);
    return static_cast<std::uint32_t>(v);
  }
  return 1;
}

std::vector<double> parse_list(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    std::string item = csv.substr(pos, comma - pos);
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    item = a == std::string::npos ? std::string() : item.substr(a, b - a + 1);
    if (item.empty())
      throw std::invalid_argument(std::string(what) +
                                  ": empty entry in list '" + csv + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad number '" +
                                  item + "'");
    }
    if (used != item.size())
      throw std::invalid_argument(std::string(what) + ": bad number '" +
                                  item + "'");
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

sc::QuadratureConfig quad_config(const Opts& o) {
  sc::QuadratureConfig cfg;
  if (o.max_subdivisions != 0) {
    if (o.max_subdivisions < 1)
      throw std::invalid_argument("--max-subdivisions must be >= 1");
    cfg.max_subdivisions = o.max_subdivisions;
  }
  return cfg;
}

// stdout when --out is absent, <out>/<name> otherwise.
void emit(const std::string& out_dir, const std::string& name,
          const std::string& content) {
  if (out_dir.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::create_directories(out_dir);
  sc::write_text_file((std::filesystem::path(out_dir) / name).string(),
                      content);
}

int run_rates(const Opts& o) {
  const sc::EdgeRates rates = sc::edge_rates(resolve_model(o));
  std::string line;
  for (std::size_t i = 0; i < rates.rates.size(); ++i) {
    if (i) line += ' ';
    line += sc::fmt17(rates.rates[i]);
  }
  line += '\n';
  emit(o.out, "rates.txt", line);
  return 0;
}

int run_sample(const Opts& o) {
  const sc::TessellationModel model = resolve_model(o);
  sc::SampleStreamSpec spec{o.seed, o.n, resolve_threads(o)};
  emit(o.out, "cells.csv", sc::csv_cells(sc::sample_stream(model, spec)));
  return 0;
}

int run_tessellate(const Opts& o) {
  const sc::TessellationModel model = resolve_model(o);
  const std::vector<double> win = parse_list(o.window_csv, "--window");
  if (win.size() != 4)
    throw std::invalid_argument("--window expects x0,y0,x1,y1");
  const sc::WindowTessellation tess =
      sc::sample_window_tessellation(model, o.seed, win[0], win[1], win[2],
                                     win[3]);
  emit(o.out, "segments.csv", sc::csv_segments(tess));
  return 0;
}

int run_topk(const Opts& o) {
  const sc::TessellationModel model = resolve_model(o);
  if (o.functional.empty())
    throw std::invalid_argument("--functional is required for topk");
  const sc::SizeFunctional f = sc::functional_from_token(o.functional);
  sc::SampleStreamSpec spec{o.seed, o.n, resolve_threads(o)};
  const sc::TopKSelection sel = sc::select_k_smallest(model, spec, f, o.k);
  emit(o.out, "topk_" + o.functional + ".csv",
       sc::csv_topk(sel, model.dimension));
  return 0;
}

// Quantities share one row schema; unused parameter columns stay empty.
struct AnalyticRow {
  std::string quantity, gamma1, gamma2, eps, threshold, value, method,
      est_error;
};

std::string analytic_csv(const std::vector<AnalyticRow>& rows) {
  std::string out =
      "quantity,gamma1,gamma2,eps,threshold,value,method,est_error\n";
  for (const AnalyticRow& r : rows) {
    out += r.quantity + ',' + r.gamma1 + ',' + r.gamma2 + ',' + r.eps + ',' +
           r.threshold + ',' + r.value + ',' + r.method + ',' + r.est_error +
           '\n';
  }
  return out;
}

int run_analytic(const Opts& o) {
  const sc::TessellationModel model = resolve_model(o);
  if (o.quantity.empty())
    throw std::invalid_argument("--quantity is required for analytic");
  if (o.threshold_csv.empty())
    throw std::invalid_argument("--threshold is required for analytic");
  const std::vector<double> thresholds =
      parse_list(o.threshold_csv, "--threshold");
  const std::vector<double> eps_list =
      o.eps_csv.empty() ? std::vector<double>{} : parse_list(o.eps_csv, "--eps");
  const sc::QuadratureConfig cfg = quad_config(o);

  const sc::EdgeRates rates = sc::edge_rates(model);
  if (model.dimension != 2)
    throw std::invalid_argument("analytic: 2D models only");
  const sc::RatePair pair = sc::RatePair::from_edge_rates(rates);
  const std::string g1 = sc::fmt17(pair.gamma1), g2 = sc::fmt17(pair.gamma2);

  // The area laws are available for equal edge rates (unit-rate laws after
  // rescaling); resolved lazily so perimeter quantities work for any rates.
  auto need_equal_rate = [&]() {
    const std::optional<double> g = sc::equal_rate(rates);
    if (!g)
      throw std::invalid_argument(
          "analytic: quantity '" + o.quantity +
          "' needs equal edge rates (got " + sc::fmt17(pair.gamma1) + ", " +
          sc::fmt17(pair.gamma2) + ")");
    return *g;
  };

  auto require_eps = [&]() {
    if (eps_list.empty())
      throw std::invalid_argument("analytic: quantity '" + o.quantity +
                                  "' needs --eps");
  };

  std::vector<AnalyticRow> rows;
  auto add = [&](const std::string& eps, const std::string& threshold,
                 double value, const char* method,
                 const std::string& est_error) {
    rows.push_back({o.quantity, g1, g2, eps, threshold, sc::fmt17(value),
                    method, est_error});
  };

  if (o.quantity == "cdf-half-perimeter") {
    for (double p : thresholds)
      add("", sc::fmt17(p), sc::cdf_half_perimeter(pair, p), "closed-form",
          "");
  } else if (o.quantity == "joint-sigma-perimeter") {
    require_eps();
    for (double e : eps_list)
      for (double p : thresholds)
        add(sc::fmt17(e), sc::fmt17(p), sc::joint_sigma_perimeter(pair, e, p),
            "closed-form", "");
  } else if (o.quantity == "cond-sigma-perimeter") {
    require_eps();
    for (double e : eps_list)
      for (double p : thresholds) {
        const sc::PerimeterConditional c =
            sc::cond_sigma_given_perimeter_detail(pair, e, p, cfg);
        add(sc::fmt17(e), sc::fmt17(p), c.value,
            c.used_quadrature ? "quadrature" : "closed-form", "");
      }
  } else if (o.quantity == "prob-area-less") {
    const double g = need_equal_rate();
    for (double a : thresholds) {
      const sc::AreaProbMethods m =
          sc::prob_area_less_methods(g * g * a, cfg);
      add("", sc::fmt17(a), m.direct, "triple-check",
          sc::fmt17(m.max_spread));
    }
  } else if (o.quantity == "numerator-sigma-area") {
    const double g = need_equal_rate();
    require_eps();
    for (double e : eps_list)
      for (double a : thresholds) {
        double err = 0.0;
        const double v = sc::numerator_sigma_area(e, g * g * a, cfg, &err);
        add(sc::fmt17(e), sc::fmt17(a), v, "quadrature", sc::fmt17(err));
      }
  } else if (o.quantity == "cond-sigma-area") {
    const double g = need_equal_rate();
    require_eps();
    for (double e : eps_list)
      for (double a : thresholds)
        add(sc::fmt17(e), sc::fmt17(a),
            sc::cond_sigma_given_area(e, g * g * a, cfg), "quadrature", "");
  } else if (o.quantity == "cond-tau-area") {
    const double g = need_equal_rate();
    require_eps();
    for (double e : eps_list)
      for (double a : thresholds)
        add(sc::fmt17(e), sc::fmt17(a),
            sc::cond_tau_given_area(g * e, g * g * a, cfg), "quadrature", "");
  } else if (o.quantity == "e1") {
    for (double x : thresholds)
      add("", sc::fmt17(x), sc::exp_integral_e1(x), "special-function", "");
  } else {
    throw std::invalid_argument(
        "analytic: unknown quantity '" + o.quantity +
        "' (expected cdf-half-perimeter, joint-sigma-perimeter, "
        "cond-sigma-perimeter, prob-area-less, numerator-sigma-area, "
        "cond-sigma-area, cond-tau-area or e1)");
  }

  emit(o.out, "analytic.csv", analytic_csv(rows));
  return 0;
}

std::string study_config_json(const Opts& o, const sc::TessellationModel& model,
                              std::uint32_t threads) {
  sc::JsonWriter w;
  w.begin_object();
  w.key("subcommand").value("study");
  w.key("model_source")
      .value(o.std2d ? "--standard-2d"
                     : (o.std3d ? "--standard-3d" : o.model_path));
  w.key("n").value(o.n);
  w.key("k").value(static_cast<std::uint64_t>(o.k));
  w.key("seed").value(o.seed);
  w.key("threads").value(static_cast<std::uint64_t>(threads));
  // No output path here: the report lives in that directory already, and
  // keeping it out makes identical runs byte-identical wherever they land.
  w.key("functionals").begin_array();
  for (sc::SizeFunctional f : sc::applicable_functionals(model.dimension))
    w.value(sc::functional_token(f));
  w.end_array();
  w.key("sigma_bins").value(std::uint64_t{10});
  w.key("tau_bins").value(std::uint64_t{10});
  w.end_object();
  std::string s = w.take();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

int run_study(const Opts& o) {
  const sc::TessellationModel model = resolve_model(o);
  if (o.out.empty())
    throw std::invalid_argument("--out directory is required for study");
  const std::uint32_t threads = resolve_threads(o);
  const sc::StudyReport rep =
      sc::run_small_cell_study(model, o.n, o.k, o.seed, threads);
  sc::write_study_artifacts(rep, o.out, study_config_json(o, model, threads));
  return 0;
}

int run_convergence(const Opts& o) {
  const sc::TessellationModel model = resolve_model(o);
  if (o.out.empty())
    throw std::invalid_argument("--out directory is required for convergence");
  const std::vector<double> eps = parse_list(
      o.eps_csv.empty() ? "0.25,0.5,0.75" : o.eps_csv, "--eps");
  const std::vector<double> thresholds = parse_list(
      o.threshold_csv.empty() ? "0.05,0.1,0.2,0.5,1" : o.threshold_csv,
      "--threshold");
  const sc::SizeFunctional conditioning =
      o.functional.empty() ? sc::SizeFunctional::EdgeProductArea
                           : sc::functional_from_token(o.functional);
  const sc::ConvergenceReport rep = sc::run_convergence_study(
      model, eps, thresholds, o.n, o.seed, resolve_threads(o), conditioning,
      quad_config(o));
  sc::write_convergence_artifacts(rep, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulation and verification toolkit for the asymptotic shape of "
      "small cells in stationary Poisson line/hyperplane tessellations"};
  app.require_subcommand(1);

  Opts o;
  int which = 0;

  CLI::App* rates = app.add_subcommand("rates", "print the edge-length rates");
  add_model_flags(rates, o);
  rates->add_option("--out", o.out, "output directory (default: stdout)");
  rates->callback([&] { which = 1; });

  CLI::App* sample =
      app.add_subcommand("sample", "dump typical-cell edge lengths as CSV");
  add_model_flags(sample, o);
  sample->add_option("--n", o.n, "number of cells")->required();
  sample->add_option("--seed", o.seed, "stream seed");
  sample->add_option("--threads", o.threads, "worker threads");
  sample->add_option("--out", o.out, "output directory (default: stdout)");
  sample->callback([&] { which = 2; });

  CLI::App* tess = app.add_subcommand(
      "tessellate", "realize the line process in a window, CSV of segments");
  add_model_flags(tess, o);
  tess->add_option("--seed", o.seed, "realization seed");
  tess->add_option("--window", o.window_csv, "window as x0,y0,x1,y1")
      ->required();
  tess->add_option("--out", o.out, "output directory (default: stdout)");
  tess->callback([&] { which = 3; });

  CLI::App* analytic = app.add_subcommand(
      "analytic", "evaluate an analytic quantity on a parameter grid");
  add_model_flags(analytic, o);
  analytic->add_option("--quantity", o.quantity,
                       "cdf-half-perimeter | joint-sigma-perimeter | "
                       "cond-sigma-perimeter | prob-area-less | "
                       "numerator-sigma-area | cond-sigma-area | "
                       "cond-tau-area | e1");
  analytic->add_option("--eps", o.eps_csv, "eps grid (comma separated)");
  analytic->add_option("--threshold", o.threshold_csv,
                       "threshold grid (comma separated)");
  analytic->add_option("--max-subdivisions", o.max_subdivisions,
                       "quadrature subdivision budget");
  analytic->add_option("--out", o.out, "output directory (default: stdout)");
  analytic->callback([&] { which = 4; });

  CLI::App* study = app.add_subcommand(
      "study", "small-cell shape study over every applicable functional");
  add_model_flags(study, o);
  study->add_option("--n", o.n, "stream length")->default_val("100000000");
  study->add_option("--k", o.k, "cells to retain")->default_val("150");
  study->add_option("--seed", o.seed, "stream seed");
  study->add_option("--threads", o.threads, "worker threads");
  study->add_option("--out", o.out, "output directory")->required();
  study->callback([&] { which = 5; });

  CLI::App* conv = app.add_subcommand(
      "convergence", "Monte Carlo vs quadrature for the conditional laws");
  add_model_flags(conv, o);
  conv->add_option("--n", o.n, "stream length")->default_val("10000000");
  conv->add_option("--seed", o.seed, "stream seed");
  conv->add_option("--threads", o.threads, "worker threads");
  conv->add_option("--eps", o.eps_csv, "eps grid (default 0.25,0.5,0.75)");
  conv->add_option("--threshold", o.threshold_csv,
                   "threshold grid (default 0.05,0.1,0.2,0.5,1)");
  conv->add_option("--functional", o.functional,
                   "conditioning: area (default) or half-perimeter");
  conv->add_option("--max-subdivisions", o.max_subdivisions,
                   "quadrature subdivision budget");
  conv->add_option("--out", o.out, "output directory")->required();
  conv->callback([&] { which = 6; });

  CLI::App* topk = app.add_subcommand(
      "topk", "retain the k smallest cells by one functional");
  add_model_flags(topk, o);
  topk->add_option("--n", o.n, "stream length")->required();
  topk->add_option("--k", o.k, "cells to retain")->default_val("150");
  topk->add_option("--seed", o.seed, "stream seed");
  topk->add_option("--threads", o.threads, "worker threads");
  topk->add_option("--functional", o.functional, "size functional token");
  topk->add_option("--out", o.out, "output directory (default: stdout)");
  topk->callback([&] { which = 7; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    switch (which) {
      case 1: return run_rates(o);
      case 2: return run_sample(o);
      case 3: return run_tessellate(o);
      case 4: return run_analytic(o);
      case 5: return run_study(o);
      case 6: return run_convergence(o);
      case 7: return run_topk(o);
    }
    return 1;
  } catch (const sc::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
