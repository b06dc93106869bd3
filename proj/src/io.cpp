#include "smallcells/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "smallcells/common.hpp"

namespace smallcells {

JsonWriter& JsonWriter::begin_object() {
  prepare_for_value();
  out_ += '{';
  has_items_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  bool had = has_items_.back();
  has_items_.pop_back();
  if (had) newline_indent();
  out_ += '}';
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  prepare_for_value();
  out_ += '[';
  has_items_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  bool had = has_items_.back();
  has_items_.pop_back();
  if (had) newline_indent();
  out_ += ']';
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& name) {
  if (has_items_.back()) out_ += ',';
  has_items_.back() = true;
  newline_indent();
  out_ += '"';
  out_ += json_escape(name);
  out_ += "\": ";
  pending_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  prepare_for_value();
  // JSON has no literal for non-finite numbers; quote them instead of
  // emitting something unparseable. Study artifacts are all finite.
  if (std::isfinite(v)) {
    out_ += fmt17(v);
  } else {
    out_ += '"';
    out_ += fmt17(v);
    out_ += '"';
  }
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  prepare_for_value();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  prepare_for_value();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
  prepare_for_value();
  out_ += '"';
  out_ += json_escape(v);
  out_ += '"';
  return *this;
}

JsonWriter& JsonWriter::value(const char* v) {
  return value(std::string(v));
}

JsonWriter& JsonWriter::raw(const std::string& rendered) {
  prepare_for_value();
  out_ += rendered;
  return *this;
}

std::string JsonWriter::take() {
  out_ += '\n';
  return std::move(out_);
}

void JsonWriter::prepare_for_value() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!has_items_.empty()) {
    if (has_items_.back()) out_ += ',';
    has_items_.back() = true;
    newline_indent();
  }
}

void JsonWriter::newline_indent() {
  out_ += '\n';
  out_.append(2 * has_items_.size(), ' ');
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

std::string csv_topk(const TopKSelection& sel, int dimension) {
  std::string out = "sample_index";
  for (int i = 1; i <= dimension; ++i)
    out += ",edge_" + std::to_string(i);
  out += ",size\n";
  for (const TopKEntry& e : sel.entries) {
    out += std::to_string(e.sample_index);
    for (double x : e.edge_lengths) {
      out += ',';
      out += fmt17(x);
    }
    out += ',';
    out += fmt17(e.size);
    out += '\n';
  }
  return out;
}

std::string csv_histogram(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double lo = h.lo + width * static_cast<double>(i);
    const double hi =
        i + 1 == h.counts.size() ? h.hi : h.lo + width * (static_cast<double>(i) + 1.0);
    out += fmt17(lo);
    out += ',';
    out += fmt17(hi);
    out += ',';
    out += std::to_string(h.counts[i]);
    out += '\n';
  }
  return out;
}

std::string csv_cells(const std::vector<TypicalCell>& cells) {
  std::string out;
  for (const TypicalCell& c : cells) {
    for (std::size_t i = 0; i < c.edge_lengths.size(); ++i) {
      if (i) out += ',';
      out += fmt17(c.edge_lengths[i]);
    }
    out += '\n';
  }
  return out;
}

std::string csv_segments(const WindowTessellation& tess) {
  std::string out = "family,offset,x0,y0,x1,y1\n";
  for (const Segment& s : tess.segments) {
    out += std::to_string(s.family);
    out += ',';
    out += fmt17(s.offset);
    out += ',';
    out += fmt17(s.x0);
    out += ',';
    out += fmt17(s.y0);
    out += ',';
    out += fmt17(s.x1);
    out += ',';
    out += fmt17(s.y1);
    out += '\n';
  }
  return out;
}

namespace {

std::string fit_label(const DecayFit& f) {
  std::string s = "power a^" + fmt17(f.exponent) + " r2=" + fmt17(f.r_squared) +
                  " ssr=" + fmt17(f.power_ssr);
  if (!std::isnan(f.log_recip_coeff)) {
    s += "; log-recip c=" + fmt17(f.log_recip_coeff) +
         " ssr=" + fmt17(f.log_recip_ssr);
    s += f.prefer_log_recip ? "; prefer=log-recip" : "; prefer=power";
  }
  return s;
}

}  // namespace

std::string csv_convergence(const ConvergenceReport& rep, ShapeKind kind) {
  std::string out = "eps,threshold,mc,se,quad,z,model_fit\n";
  for (const ConvergenceRow& r : rep.rows) {
    if (r.kind != kind) continue;
    std::string fit;
    for (const ConvergenceFit& f : rep.fits)
      if (f.kind == kind && f.eps == r.eps) fit = fit_label(f.fit);
    out += fmt17(r.eps);
    out += ',';
    out += fmt17(r.threshold);
    out += ',';
    out += fmt17(r.mc);
    out += ',';
    out += fmt17(r.se);
    out += ',';
    out += fmt17(r.quad);
    out += ',';
    out += fmt17(r.z);
    out += ',';
    out += fit;
    out += '\n';
  }
  return out;
}

namespace {

void histogram_json(JsonWriter& w, const Histogram& h) {
  w.begin_object();
  w.key("lo").value(h.lo);
  w.key("hi").value(h.hi);
  w.key("counts").begin_array();
  for (std::uint64_t c : h.counts) w.value(static_cast<std::uint64_t>(c));
  w.end_array();
  w.key("underflow").value(h.underflow);
  w.key("overflow").value(h.overflow);
  w.end_object();
}

// Extremes among the 150 smallest cells in the published 10^12-sample
// reference run of the unit-rate standard models, echoed verbatim. At desk
// scale these magnitudes cannot be reproduced; they are orientation only.
struct ReferenceExtreme {
  const char* quantity;
  const char* min;
  const char* max;
};

constexpr ReferenceExtreme kReference2D[] = {
    {"area", "1.79e-14", "8.46e-12"},
    {"perimeter", "1.06e-6", "3.52e-5"},
};

constexpr ReferenceExtreme kReference3D[] = {
    {"volume", "3.20e-15", "4.97e-13"},
    {"surface area", "1.74e-8", "3.58e-7"},
    {"total edge length", "6.80e-4", "3.88e-3"},
};

}  // namespace

std::string study_report_json(const StudyReport& rep,
                              const std::string& config_json) {
  JsonWriter w;
  w.begin_object();

  w.key("config");
  if (config_json.empty())
    w.begin_object().end_object();
  else
    w.raw(config_json);

  w.key("model").begin_object();
  w.key("dimension").value(static_cast<std::uint64_t>(rep.model.dimension));
  w.key("gamma").value(rep.model.gamma);
  w.key("atoms").begin_array();
  for (const DirectionAtom& a : rep.model.atoms) {
    w.begin_object();
    w.key("direction").begin_array();
    for (double x : a.direction) w.value(x);
    w.end_array();
    w.key("weight").value(a.weight);
    w.end_object();
  }
  w.end_array();
  w.key("edge_rates").begin_array();
  for (double r : edge_rates(rep.model).rates) w.value(r);
  w.end_array();
  w.end_object();

  w.key("n").value(rep.n);
  w.key("k").value(static_cast<std::uint64_t>(rep.k));
  w.key("seed").value(rep.seed);
  w.key("worker_hint").value(static_cast<std::uint64_t>(rep.worker_hint));

  w.key("functionals").begin_array();
  for (const FunctionalStudy& fs : rep.functionals) {
    w.begin_object();
    w.key("functional").value(functional_token(fs.selection.functional));
    w.key("min_size").value(fs.min_size);
    w.key("max_size").value(fs.max_size);
    w.key("short_of_k").value(fs.selection.short_of_k);
    w.key("sigma_histogram");
    histogram_json(w, fs.sigma_hist);
    w.key("tau_histogram");
    histogram_json(w, fs.tau_hist);
    w.key("top_cells").begin_array();
    for (const TopKEntry& e : fs.selection.entries) {
      w.begin_object();
      w.key("sample_index").value(e.sample_index);
      w.key("edge_lengths").begin_array();
      for (double x : e.edge_lengths) w.value(x);
      w.end_array();
      w.key("size").value(e.size);
      w.end_object();
    }
    w.end_array();
    w.end_object();
  }
  w.end_array();

  w.key("reference_extremes").begin_object();
  w.key("note").value(
      "Size extremes of the 150 smallest cells in the published 10^12-sample "
      "reference run of the unit-rate standard model. Extreme values do not "
      "transfer across sample counts; these are orientation only, NOT "
      "comparable to this run.");
  w.key("rows").begin_array();
  if (rep.model.dimension == 2) {
    for (const ReferenceExtreme& r : kReference2D) {
      w.begin_object();
      w.key("quantity").value(r.quantity);
      w.key("min").value(r.min);
      w.key("max").value(r.max);
      w.end_object();
    }
  } else if (rep.model.dimension == 3) {
    for (const ReferenceExtreme& r : kReference3D) {
      w.begin_object();
      w.key("quantity").value(r.quantity);
      w.key("min").value(r.min);
      w.key("max").value(r.max);
      w.end_object();
    }
  }
  w.end_array();
  w.end_object();

  w.end_object();
  return w.take();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_study_artifacts(const StudyReport& rep, const std::string& dir,
                           const std::string& config_json) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  for (const FunctionalStudy& fs : rep.functionals) {
    const std::string token = functional_token(fs.selection.functional);
    write_text_file((base / ("topk_" + token + ".csv")).string(),
                    csv_topk(fs.selection, rep.model.dimension));
    write_text_file((base / ("hist_" + token + "_sigma.csv")).string(),
                    csv_histogram(fs.sigma_hist));
    write_text_file((base / ("hist_" + token + "_tau.csv")).string(),
                    csv_histogram(fs.tau_hist));
  }
  write_text_file((base / "report.json").string(),
                  study_report_json(rep, config_json));
}

void write_convergence_artifacts(const ConvergenceReport& rep,
                                 const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_text_file((base / "convergence.csv").string(),
                  csv_convergence(rep, ShapeKind::Sigma));
  bool has_tau = false;
  for (const ConvergenceRow& r : rep.rows)
    if (r.kind == ShapeKind::Tau) has_tau = true;
  if (has_tau)
    write_text_file((base / "convergence_tau.csv").string(),
                    csv_convergence(rep, ShapeKind::Tau));
}

}  // namespace smallcells
