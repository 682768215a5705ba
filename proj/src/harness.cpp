#include "wprg/harness.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wprg/rng.hpp"

namespace wprg {

int ScheduleStage::geti(const std::string& key, int fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : std::stoi(it->second);
}

double ScheduleStage::getd(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : std::stod(it->second);
}

std::string ScheduleStage::gets(const std::string& key,
                                const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Schedule schedule_from_string(const std::string& text) {
  Schedule s;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head != "stage") throw std::invalid_argument("schedule: expected 'stage', got " + head);
    ScheduleStage st;
    ls >> st.kind;
    std::string tok;
    while (ls >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("schedule: expected key=value, got " + tok);
      st.params[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    s.stages.push_back(std::move(st));
  }
  return s;
}

std::string schedule_to_string(const Schedule& s) {
  std::ostringstream os;
  for (const auto& st : s.stages) {
    os << "stage " << st.kind;
    for (const auto& [k, v] : st.params) os << ' ' << k << '=' << v;
    os << '\n';
  }
  return os.str();
}

ExperimentConfig config_from_string(const std::string& text) {
  ExperimentConfig c;
  std::istringstream is(text);
  std::string line;
  bool have_seed = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "family") ls >> c.family;
    else if (key == "n") ls >> c.n;
    else if (key == "w") ls >> c.w;
    else if (key == "s") ls >> c.s;
    else if (key == "count") ls >> c.count;
    else if (key == "rng-seed") { ls >> c.rng_seed; have_seed = true; }
    else if (key == "cap-seeds") ls >> c.cap_seed_bits;
    else if (key == "eps") ls >> c.eps;
    else if (key == "schedule") ls >> c.schedule_path;
    else if (key == "out") ls >> c.out_dir;
    else if (key == "mode") {
      std::string m;
      ls >> m;
      if (m == "fast") c.mode = RunMode::Fast;
      else if (m == "reproducible") c.mode = RunMode::Reproducible;
      else throw std::invalid_argument("config: unknown mode " + m);
    } else {
      throw std::invalid_argument("config: unknown key " + key);
    }
  }
  if (!have_seed) throw std::invalid_argument("config: rng-seed is mandatory");
  if (c.n < 1 || c.w < 1 || c.s < 1 || c.count < 0 || c.cap_seed_bits < 1)
    throw std::invalid_argument("config: invalid shape or caps");
  return c;
}

std::string config_to_string(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "family " << c.family << '\n'
     << "n " << c.n << '\n'
     << "w " << c.w << '\n'
     << "s " << c.s << '\n'
     << "count " << c.count << '\n'
     << "rng-seed " << c.rng_seed << '\n'
     << "cap-seeds " << c.cap_seed_bits << '\n'
     << "eps " << c.eps << '\n'
     << "mode " << (c.mode == RunMode::Fast ? "fast" : "reproducible") << '\n';
  if (!c.schedule_path.empty()) os << "schedule " << c.schedule_path << '\n';
  if (!c.out_dir.empty()) os << "out " << c.out_dir << '\n';
  return os.str();
}

std::vector<Robp> gen_instances(const ExperimentConfig& c) {
  std::vector<Robp> out;
  out.reserve(c.count);
  CounterRng root(c.rng_seed);
  for (int i = 0; i < c.count; ++i) {
    CounterRng rng = root.fork(uint64_t(i));
    if (c.family == "permutation")
      out.push_back(random_permutation_robp(c.n, c.w, c.s, rng));
    else if (c.family == "regular")
      out.push_back(random_regular_robp(c.n, c.w, c.s, rng));
    else if (c.family == "general")
      out.push_back(random_general_robp(c.n, c.w, c.s, rng));
    else
      throw std::invalid_argument("gen_instances: unknown family " + c.family);
  }
  return out;
}

double ReportRow::ratio() const {
  if (measured_err == 0) return 0.0;
  if (declared_eps == 0) return std::numeric_limits<double>::infinity();
  return measured_err / declared_eps;
}

bool Report::all_within_declared() const {
  for (const auto& r : rows)
    if (r.measured_err > r.declared_eps + 1e-12) return false;
  return true;
}

double Report::max_ratio() const {
  double m = 0;
  for (const auto& r : rows) m = std::max(m, r.ratio());
  return m;
}

std::string report_to_csv(const Report& r) {
  std::ostringstream os;
  os << "instance_id,class,n,w,s,pipeline,declared_eps,measured_err,ratio,"
        "seed_bits,weight_bound,wall_ms\n";
  os.precision(17);
  for (const auto& row : r.rows) {
    os << row.instance_id << ',' << row.klass << ',' << row.n << ',' << row.w
       << ',' << row.s << ',' << row.pipeline << ',' << row.declared_eps << ','
       << row.measured_err << ',' << row.ratio() << ',' << row.seed_bits << ','
       << row.weight_bound << ',' << row.wall_ms << '\n';
  }
  return os.str();
}

Report report_from_csv(const std::string& text) {
  Report rep;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("report: empty csv");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12) throw std::invalid_argument("report: bad row: " + line);
    ReportRow row;
    row.instance_id = cells[0];
    row.klass = cells[1];
    row.n = std::stoi(cells[2]);
    row.w = std::stoi(cells[3]);
    row.s = std::stoi(cells[4]);
    row.pipeline = cells[5];
    row.declared_eps = std::stod(cells[6]);
    row.measured_err = std::stod(cells[7]);
    row.seed_bits = std::stod(cells[9]);
    row.weight_bound = std::stod(cells[10]);
    row.wall_ms = std::stoll(cells[11]);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

namespace {

Generator stage_base_generator(const ScheduleStage& st, Shape shape) {
  std::string base = st.gets("base", "nz");
  if (base == "nz") {
    int nsrc = st.geti("nsrc", 12);
    int dext = st.geti("dext", nsrc);
    auto ext = ExtractorSpec::leftover_hash(
        nsrc, dext, shape.s, double(nsrc) - std::ceil(std::log2(shape.w)));
    return nz_generator(ext, shape.n);
  }
  if (base == "mixer" || base == "inw") {
    int depth = 0;
    while ((1 << depth) < shape.n) ++depth;
    auto fam = make_mixer_family_auto(shape.s, depth, st.getd("lambda", 0.0),
                                      st.geti("cap", 24));
    return recursive_mixer_generator(std::make_shared<MixerFamily>(fam));
  }
  if (base == "uniform") return true_randomness(shape.n, shape.s);
  throw std::invalid_argument("schedule: unknown base generator " + base);
}

}  // namespace

WeightedReduction build_pipeline(const Schedule& sched, Shape shape,
                                 const std::vector<Robp>& probes,
                                 uint64_t cap) {
  WeightedReduction chain = identity_reduction(shape);
  bool have = false;
  Shape cur = shape;
  for (const auto& st : sched.stages) {
    WeightedReduction next;
    if (st.kind == "length") {
      int k = st.geti("k", 3);
      Generator base = stage_base_generator(st, cur);
      double eps0 = st.getd("eps0", -1.0);
      if (eps0 < 0) {
        // hypothesis measured on the probes when they carry the stage shape
        double worst = have ? 0.5 : 0.0;
        if (!have)
          for (const auto& f : probes)
            worst = std::max(worst, gen_infnorm_error_segments(base, f, cap));
        eps0 = worst * 2.0 * double(cur.n + 1);
      }
      next = length_reduction(base, cur, k, eps0);
    } else if (st.kind == "alphabet") {
      int nsrc = st.geti("nsrc", 14);
      int dext = st.geti("dext", 6);
      auto ext = ExtractorSpec::leftover_hash(
          nsrc, dext, cur.s, double(nsrc) - std::ceil(std::log2(cur.w)));
      // budget taken as the measured quantity scaled by the hybrid slack
      double tv = st.getd("tv", -1.0);
      if (tv < 0) tv = ext.eps_ext;
      next = alphabet_reduction(ext, cur, 3.0 * cur.n * tv, tv);
    } else {
      throw std::invalid_argument("build_pipeline: unsupported stage " + st.kind);
    }
    chain = have ? compose(chain, next) : next;
    have = true;
    cur = chain.target;
  }
  return chain;
}

Report run_suite(const ExperimentConfig& c, const Schedule& sched) {
  Report rep;
  auto instances = gen_instances(c);
  const uint64_t cap = uint64_t(1) << c.cap_seed_bits;
  bool derand = false, perm = false;
  for (const auto& st : sched.stages) {
    if (st.kind == "derand-level") derand = true;
    if (st.kind == "perm-level") perm = true;
  }
  for (size_t idx = 0; idx < instances.size(); ++idx) {
    const Robp& f = instances[idx];
    ReportRow row;
    row.instance_id = c.family + "-" + std::to_string(c.rng_seed) + "-" +
                      std::to_string(idx);
    row.klass = to_string(classify(f));
    row.n = f.length();
    row.w = f.width();
    row.s = f.symbol_bits();
    auto t0 = std::chrono::steady_clock::now();
    double exact = exact_expectation(f);
    if (derand) {
      std::vector<DerandLevelSpec> levels;
      for (const auto& st : sched.stages)
        if (st.kind == "derand-level")
          levels.push_back({st.geti("k", 1), st.getd("lambda", 0.0),
                            st.geti("cap", c.cap_seed_bits)});
      row.pipeline = "derand-recursive";
      auto r = regular_estimator(f, levels, cap);
      row.declared_eps = r.declared_eps;
      row.measured_err = std::abs(r.estimate - exact);
      row.seed_bits = r.final_symbol_bits;
      row.weight_bound = r.index_space;
    } else if (perm) {
      PermSchedule ps;
      for (const auto& st : sched.stages)
        if (st.kind == "perm-level")
          ps.levels.push_back({st.geti("k", 1), st.getd("lambda", 0.0),
                               st.geti("cap", c.cap_seed_bits)});
      row.pipeline = "perm-chain";
      Shape shape{f.length(), f.symbol_bits(), f.width()};
      Wprg g = perm_wprg(shape, c.eps, ps);
      row.declared_eps = g.declared_eps;
      row.measured_err = std::abs(estimate(f, g, cap) - exact);
      row.seed_bits = g.seed_bits;
      row.weight_bound = g.weight_bound;
    } else {
      row.pipeline = "wpr-pipeline";
      Shape shape{f.length(), f.symbol_bits(), f.width()};
      auto chain = build_pipeline(sched, shape, {f}, cap);
      Generator tail = true_randomness(chain.target.n, chain.target.s);
      Wprg g = wprg_from_reduction(chain, tail, 0.0);
      row.declared_eps = g.declared_eps;
      row.measured_err = std::abs(estimate(f, g, cap) - exact);
      row.seed_bits = g.seed_bits;
      row.weight_bound = g.weight_bound;
    }
    auto t1 = std::chrono::steady_clock::now();
    row.wall_ms =
        c.mode == RunMode::Reproducible
            ? 0
            : std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace wprg
