#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wprg/derand.hpp"
#include "wprg/parallel.hpp"
#include "wprg/perm.hpp"
#include "wprg/robp.hpp"
#include "wprg/wprg.hpp"

namespace wprg {

/// One stage of a schedule file. Stages are `kind key=value ...` lines.
struct ScheduleStage {
  std::string kind;  // length | alphabet | sampler | perm-level | derand-level
  std::map<std::string, std::string> params;

  int geti(const std::string& key, int fallback) const;
  double getd(const std::string& key, double fallback) const;
  std::string gets(const std::string& key, const std::string& fallback) const;
};

struct Schedule {
  std::vector<ScheduleStage> stages;
};

Schedule schedule_from_string(const std::string& text);
std::string schedule_to_string(const Schedule& s);

struct ExperimentConfig {
  std::string family = "permutation";  // permutation | regular | general
  int n = 8, w = 4, s = 1;
  int count = 10;
  uint64_t rng_seed = 1;  // mandatory, no ambient randomness
  int cap_seed_bits = 24;
  RunMode mode = RunMode::Reproducible;
  double eps = 0.125;
  std::string schedule_path;
  std::string out_dir;
};

ExperimentConfig config_from_string(const std::string& text);
std::string config_to_string(const ExperimentConfig& c);

std::vector<Robp> gen_instances(const ExperimentConfig& c);

struct ReportRow {
  std::string instance_id;
  std::string klass;
  int n = 0, w = 0, s = 0;
  std::string pipeline;
  double declared_eps = 0;
  double measured_err = 0;
  double seed_bits = 0;
  double weight_bound = 0;
  int64_t wall_ms = 0;

  double ratio() const;
};

struct Report {
  std::vector<ReportRow> rows;
  bool all_within_declared() const;
  double max_ratio() const;
};

std::string report_to_csv(const Report& r);
Report report_from_csv(const std::string& text);

/// Runs the configured pipeline over generated instances. Dispatch: a
/// schedule with derand-level stages runs the recursive regular estimator;
/// perm-level stages run the permutation pipeline; length/alphabet stages
/// run the composed reduction with a uniform tail.
Report run_suite(const ExperimentConfig& c, const Schedule& sched);

/// Builds the composed reduction for length/alphabet schedules, measuring
/// the stage hypotheses on the given instances.
WeightedReduction build_pipeline(const Schedule& sched, Shape shape,
                                 const std::vector<Robp>& probes,
                                 uint64_t cap);

}  // namespace wprg
