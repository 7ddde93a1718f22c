// Acceptance suite: one PASS/FAIL line per criterion.
//
// Scenario criteria evaluate the shipped scenarios in serial mode; memories are
// cached under --cache so reruns only repeat the evaluation. The process exits
// non-zero when a criterion fails that is not listed with --known-failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "memmo/bench.hpp"

using namespace memmo;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path data;
  fs::path cache;
  fs::path work;
  fs::path cli;
  std::map<std::string, ScenarioReport> reports;
  std::map<std::string, double> seconds;
};

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

const ReportRow& Row(const ScenarioReport& r, const std::string& method) {
  for (const auto& row : r.rows) {
    if (row.method == method) return row;
  }
  throw std::runtime_error("no report row for " + method);
}

const ScenarioReport& Evaluate(Context& ctx, const std::string& id) {
  auto it = ctx.reports.find(id);
  if (it != ctx.reports.end()) return it->second;
  const Scenario s = LoadScenario(ctx.data / "scenarios" / (id + ".json"));
  EvalOptions opt;
  opt.out_dir = ctx.work / id;
  opt.cache_dir = ctx.cache;
  opt.svg_tasks = 0;
  const auto start = std::chrono::steady_clock::now();
  ScenarioReport report = RunScenario(s, opt);
  const double eval = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // A cached memory skips the build, so its recorded build time is added back.
  ctx.seconds[id] = eval + (report.build.wall_time > eval ? report.build.wall_time : 0.0);
  std::fprintf(stderr, "[acceptance] %s evaluated in %.1f s\n", id.c_str(), eval);
  return ctx.reports.emplace(id, std::move(report)).first->second;
}

Outcome Multimodality(Context& ctx) {
  const auto& r = Evaluate(ctx, "base-multimodal");
  const double gpr = Row(r, "gpr").success_pct, knn = Row(r, "knn").success_pct, bgmr = Row(r, "bgmr").success_pct;
  const double minutes = ctx.seconds["base-multimodal"] / 60.0;
  const bool pass = gpr <= 20.0 && knn >= 70.0 && bgmr >= 70.0 && bgmr - gpr >= 40.0 && minutes <= 10.0;
  return {pass, "gpr " + Fmt("%.1f", gpr) + "% knn " + Fmt("%.1f", knn) + "% bgmr " + Fmt("%.1f", bgmr) +
                    "% runtime " + Fmt("%.2f", minutes) + " min"};
}

Outcome UnimodalParity(Context& ctx) {
  const auto& r = Evaluate(ctx, "base-unimodal");
  const double std_rate = Row(r, "std").success_pct;
  double lo = 100.0, hi = 0.0;
  bool above = true;
  std::string detail = "std " + Fmt("%.1f", std_rate) + "%";
  for (const char* m : {"knn", "gpr", "bgmr"}) {
    const double v = Row(r, m).success_pct;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    above = above && v >= std_rate - 5.0;
    detail += std::string(" ") + m + " " + Fmt("%.1f", v) + "%";
  }
  return {hi - lo <= 15.0 && above, detail + " spread " + Fmt("%.1f", hi - lo)};
}

Outcome WarmStartSpeedup(Context& ctx) {
  const auto& r = Evaluate(ctx, "arm-fixed-init");
  std::map<int, const TaskRecord*> baseline;
  for (const auto& rec : r.records) {
    if (rec.method == "std" && rec.success) baseline[rec.task] = &rec;
  }
  double it_std = 0.0, it_gpr = 0.0;
  int both = 0, trivial = 0;
  for (const auto& rec : r.records) {
    if (rec.method != "gpr" || !rec.success || !baseline.count(rec.task)) continue;
    ++both;
    if (baseline[rec.task]->iterations == 0) ++trivial;
    it_std += baseline[rec.task]->iterations;
    it_gpr += rec.iterations;
  }
  if (both == 0 || it_std == 0.0) return {false, "no common successes"};
  const double ratio = it_gpr / it_std;
  return {ratio <= 0.67, "iterations gpr/std " + Fmt("%.3f", ratio) + " over " + std::to_string(both) +
                             " common successes (" + Fmt("%.2f", it_gpr / both) + " vs " + Fmt("%.2f", it_std / both) +
                             ", straight line already optimal on " + std::to_string(trivial) + ")"};
}

/// Serial ensemble success set equals the union of its members' success sets,
/// and its rate is at least every individual row's rate.
bool EnsembleDominates(const Scenario& s, const ScenarioReport& r, std::string& why) {
  std::vector<std::string> members;
  for (const auto& e : s.ensemble) members.push_back(e == "metric" ? "metric_" + s.metric->method : e);
  std::map<int, bool> any, ens;
  for (const auto& rec : r.records) {
    if (rec.method == "ensemble") ens[rec.task] = rec.success;
    if (std::find(members.begin(), members.end(), rec.method) != members.end()) any[rec.task] |= rec.success;
  }
  for (const auto& [task, ok] : ens) {
    if (ok != any[task]) {
      why = s.id + " task " + std::to_string(task) + " breaks the union property";
      return false;
    }
  }
  const double ensemble = Row(r, "ensemble").success_pct;
  for (const auto& row : r.rows) {
    if (row.success_pct > ensemble) {
      why = s.id + " row " + row.method + " beats the ensemble";
      return false;
    }
  }
  return true;
}

Outcome EnsembleDominance(Context& ctx) {
  std::string why;
  for (const char* id : {"base-multimodal", "base-unimodal", "arm-fixed-init", "arm-random-init", "arm-cartesian"}) {
    const Scenario s = LoadScenario(ctx.data / "scenarios" / (std::string(id) + ".json"));
    if (!EnsembleDominates(s, Evaluate(ctx, id), why)) return {false, why};
  }
  const auto& r = Evaluate(ctx, "arm-random-init");
  double best = 0.0;
  std::string best_name;
  for (const auto& row : r.rows) {
    if (row.method != "ensemble" && row.success_pct > best) {
      best = row.success_pct;
      best_name = row.method;
    }
  }
  const double ens = Row(r, "ensemble").success_pct;
  return {ens >= best + 3.0, "union property holds on 5 scenarios; arm-random-init ensemble " + Fmt("%.1f", ens) +
                                 "% vs best " + best_name + " " + Fmt("%.1f", best) + "%"};
}

Outcome MetricGain(Context& ctx) {
  Evaluate(ctx, "arm-fixed-init");
  const auto& r = Evaluate(ctx, "arm-cartesian");
  const auto& metric = Row(r, "metric_gpr_pca");
  const auto& gpr = Row(r, "gpr");
  const bool pass = metric.success_pct >= gpr.success_pct + 10.0 && metric.cost.mean <= gpr.cost.mean;
  return {pass, "metric_gpr_pca " + Fmt("%.1f", metric.success_pct) + "% cost " + Fmt("%.4f", metric.cost.mean) +
                    " vs gpr " + Fmt("%.1f", gpr.success_pct) + "% cost " + Fmt("%.4f", gpr.cost.mean)};
}

Matrix Uniform(int rows, int cols, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Outcome GprOracle(Context&) {
  Matrix X(2, 1), Y(2, 1);
  X << 0.0, 1.0;
  Y << 0.0, 1.0;
  const GprModel m = GprModel::Fit(X, Y, {1.0, 1.0, 1e-8});
  const double d = 1.0 + 1e-8 + m.jitter(), off = std::exp(-0.5), kq = std::exp(-0.125);
  const double det = d * d - off * off;
  const double oracle = kq * (-off / det) + kq * (d / det);
  const double err = std::abs(m.Predict(Vector::Constant(1, 0.5)).y[0] - oracle);

  Rng rng(20240601);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 29, dim = 1 + trial % 4;
    Matrix Xs(n, dim);
    for (int i = 0; i < n;) {
      Xs.row(i) = Uniform(1, dim, rng, -3.0, 3.0);
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) ok = (Xs.row(i) - Xs.row(j)).norm() >= 0.1;
      i += ok;
    }
    const Matrix Ys = Uniform(n, 3, rng, -1.0, 1.0);
    const GprModel g = GprModel::Fit(Xs, Ys, {0.2, 1.0, 1e-8});
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, (g.Predict(Xs.row(i).transpose()).y - Ys.row(i).transpose()).cwiseAbs().maxCoeff());
    }
  }
  return {err <= 1e-10 && worst <= 1e-3,
          "2x2 oracle error " + Fmt("%.2e", err) + "; worst interpolation error " + Fmt("%.2e", worst) + " on 100 sets"};
}

Outcome BgmrModePicking(Context&) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.02);
  const int n = 400;
  Matrix X(n, 1), Y(n, 1);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = i % 2 == 0 ? u(rng) : X(i - 1, 0);
    Y(i, 0) = (i % 2 == 0 ? 1.0 : -1.0) + noise(rng);
  }
  const BgmrModel bgmr = BgmrModel::Fit(X, Y);
  const GprModel gpr = GprModel::Fit(X, Y, GprHyper::Defaults(X, Y));
  const int queries = 500;
  int near = 0, middle = 0;
  double gpr_worst = 0.0;
  for (int q = 0; q < queries; ++q) {
    const Vector x = Vector::Constant(1, -0.95 + 1.9 * q / (queries - 1));
    const double y = bgmr.Predict(x).y[0];
    near += std::min(std::abs(y - 1.0), std::abs(y + 1.0)) <= 0.1;
    middle += y > -0.5 && y < 0.5;
    gpr_worst = std::max(gpr_worst, std::abs(gpr.Predict(x).y[0]));
  }
  const double rate = 100.0 * near / queries;
  return {rate >= 95.0 && middle == 0 && gpr_worst <= 0.1,
          "bgmr near a mode " + Fmt("%.1f", rate) + "%, in (-0.5,0.5) " + std::to_string(middle) + " times, K=" +
              std::to_string(bgmr.components()) + "; gpr max |y| " + Fmt("%.3f", gpr_worst)};
}

Outcome PcaSuite(Context&) {
  Rng rng(11);
  const Matrix full = Uniform(40, 12, rng, -1.0, 1.0);
  const PcaProjection p = PcaProjection::Fit(full, 12);
  const double recon = (p.DecodeRows(p.EncodeRows(full)) - full).cwiseAbs().maxCoeff();

  bool monotone = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix Y = Uniform(30, 10, rng, -1.0, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 10; ++k) {
      const double mse = PcaProjection::Fit(Y, k).ReconstructionMse(Y);
      monotone = monotone && mse <= prev + 1e-14;
      prev = mse;
    }
  }

  // 14 DoF over 30 time points compressed to the default component count.
  const int dy = 14 * 30;
  const PcaProjection big = PcaProjection::Fit(Uniform(200, dy, rng, -1.0, 1.0), PcaProjection::DefaultComponents(200, dy));
  const double ratio = static_cast<double>(big.components()) / dy;
  return {recon <= 1e-8 && monotone && ratio < 1.0 / 8.0,
          "full-rank error " + Fmt("%.2e", recon) + "; monotone over 20 sets " + (monotone ? "yes" : "no") + "; " +
              std::to_string(dy) + " -> " + std::to_string(big.components()) + " floats per path (ratio " +
              Fmt("%.3f", ratio) + ")"};
}

Outcome ConvexExactness(Context&) {
  const auto base = std::make_shared<const Environment>(
      Environment::Base2d("empty", {}, 0.15, {{-3, 3}, {-3, 3}, {-kPi, kPi}}));
  const auto arm = std::make_shared<const Environment>(
      Environment::Arm("free-arm", {0.5, 0.5, 0.5, 0.5}, {}, {{-kPi, kPi}, {-2.6, 2.6}, {-2.6, 2.6}, {-2.6, 2.6}}));
  Rng rng(99);
  std::normal_distribution<double> jitter(0.0, 0.3);
  double worst = 0.0;
  int failed = 0;
  for (const auto& env : {base, arm}) {
    for (int pair = 0; pair < 50; ++pair) {
      Vector a(env->dof()), b(env->dof());
      for (int i = 0; i < env->dof(); ++i) {
        const auto& lim = env->limits()[static_cast<std::size_t>(i)];
        std::uniform_real_distribution<double> u(0.9 * lim.lo, 0.9 * lim.hi);
        a[i] = u(rng);
        b[i] = u(rng);
      }
      Path warm = StraightLinePath(a, b, 30);
      for (int t = 1; t < 30; ++t) {
        for (int i = 0; i < env->dof(); ++i) warm.at(t)[i] += jitter(rng);
      }
      const SolveResult r = Solve({env, a, Configuration(b), 30}, warm);
      failed += !r.valid;
      worst = std::max(worst, std::abs(r.cost - PathCost(StraightLinePath(a, b, 30))));
    }
  }
  return {failed == 0 && worst <= 1e-6,
          "worst cost gap " + Fmt("%.2e", worst) + " over 50 base and 50 arm pairs, invalid " + std::to_string(failed)};
}

std::string Slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Determinism(Context& ctx) {
  const fs::path scenario = ctx.data / "scenarios" / "base-multimodal.json";
  std::string reports[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = ctx.work / ("determinism-" + std::to_string(run));
    fs::remove_all(out);
    const std::string cmd = "\"" + ctx.cli.string() + "\" eval --scenario \"" + scenario.string() + "\" --out \"" +
                            out.string() + "\" --serial --quiet --no-cache --svg 0";
    if (std::system(cmd.c_str()) != 0) return {false, "eval run " + std::to_string(run) + " failed: " + cmd};
    reports[run] = Slurp(out / "report.csv");
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1];
  return {same, same ? "report.csv byte-identical across two fresh serial runs (" + std::to_string(reports[0].size()) +
                           " bytes)"
                     : "report.csv differs between runs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Context ctx;
  std::string data = MEMMO_DATA_DIR, cache = "acceptance-cache", work = "acceptance-out", cli = MEMMO_CLI_PATH;
  std::vector<int> known, only;
  bool fresh = false;
  app.add_option("--data", data, "Repository data directory")->capture_default_str();
  app.add_option("--cache", cache, "Memory cache directory")->capture_default_str();
  app.add_option("--work", work, "Directory for evaluation outputs")->capture_default_str();
  app.add_option("--cli", cli, "Path to the memmo executable")->capture_default_str();
  app.add_option("--known-failure", known, "Criterion whose failure does not fail the run");
  app.add_option("--only", only, "Run only these criteria");
  app.add_flag("--fresh", fresh, "Discard cached memories first");
  CLI11_PARSE(app, argc, argv);
  ctx.data = data;
  ctx.cache = cache;
  ctx.work = work;
  ctx.cli = cli;
  if (fresh) fs::remove_all(ctx.cache);

  using Check = Outcome (*)(Context&);
  const std::vector<std::pair<const char*, Check>> criteria = {
      {"multimodality pattern", Multimodality},   {"unimodal parity", UnimodalParity},
      {"warm-start speedup", WarmStartSpeedup},   {"ensemble dominance", EnsembleDominance},
      {"metric-over-goals gain", MetricGain},     {"GPR oracle", GprOracle},
      {"BGMR mode picking", BgmrModePicking},     {"PCA suite", PcaSuite},
      {"solver convex exactness", ConvexExactness}, {"determinism", Determinism},
  };
  const std::set<int> known_set(known.begin(), known.end()), only_set(only.begin(), only.end());
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only_set.empty() && !only_set.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const bool tolerated = !o.pass && known_set.count(id);
    std::printf("criterion %2d %s  %s: %s%s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str(),
                tolerated ? " [known failure]" : "");
    std::fflush(stdout);
    unexpected += !o.pass && !tolerated;
  }
  return unexpected == 0 ? 0 : 1;
}
