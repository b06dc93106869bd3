#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smallcells/experiments.hpp"

namespace smallcells {

// Minimal JSON emitter. Every float goes through fmt17 so artifacts honor
// the 17-significant-digit policy and reruns are byte-identical; key order
// is insertion order. (Shortest-round-trip double printing, which most
// JSON libraries do, would violate the digit policy.)
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& name);
  JsonWriter& value(double v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(bool v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v);
  // Splices pre-rendered JSON (e.g. the CLI's config echo) as one value.
  JsonWriter& raw(const std::string& rendered);
  std::string take();

 private:
  void prepare_for_value();
  void newline_indent();

  std::string out_;
  std::vector<bool> has_items_;  // one flag per open container
  bool pending_key_ = false;
};

std::string json_escape(const std::string& s);

// CSV renderers; all floats via fmt17, rows newline-terminated.
std::string csv_topk(const TopKSelection& sel, int dimension);
std::string csv_histogram(const Histogram& h);
std::string csv_cells(const std::vector<TypicalCell>& cells);
std::string csv_segments(const WindowTessellation& tess);
// One shape kind per file: eps,threshold,mc,se,quad,z,model_fit.
std::string csv_convergence(const ConvergenceReport& rep, ShapeKind kind);

// Full study report: config echo, model with derived edge rates, every
// selection with histograms, and the published reference extremes (echoed
// as quoted literals and labeled non-comparable).
std::string study_report_json(const StudyReport& rep,
                              const std::string& config_json);

void write_text_file(const std::string& path, const std::string& content);

// topk_<functional>.csv, hist_<functional>_sigma.csv,
// hist_<functional>_tau.csv per functional, plus report.json.
void write_study_artifacts(const StudyReport& rep, const std::string& dir,
                           const std::string& config_json);

// convergence.csv (sigma rows) and convergence_tau.csv when tau rows exist.
void write_convergence_artifacts(const ConvergenceReport& rep,
                                 const std::string& dir);

}  // namespace smallcells
