// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Pipeline runs go under
// --work-dir (default: a directory in the system temp dir).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "selflabel/clustering.hpp"
#include "selflabel/encoder.hpp"
#include "selflabel/ensemble.hpp"
#include "selflabel/errors.hpp"
#include "selflabel/metrics.hpp"
#include "selflabel/pipeline.hpp"
#include "selflabel/scoring.hpp"
#include "selflabel/text_io.hpp"
#include "test_util.hpp"

namespace {

using namespace selflabel;
namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

void detail(const std::string& line) { std::cout << "    " << line << '\n'; }

std::string fmt(double v, int prec = 5) {
  std::ostringstream s;
  s.precision(prec);
  s << std::fixed << v;
  return s.str();
}

// --- shared pipeline runs -------------------------------------------------------

struct RunSeries {
  std::uint64_t seed = 0;
  fs::path dir;
  double seconds = 0;
  json report;
};

RunSeries run_default(const fs::path& dir, std::uint64_t seed, std::size_t rounds = 3,
                      const PipelineOptions& opts = {}) {
  PipelineConfig c;
  c.seed = seed;
  c.rounds = rounds;
  c.output_dir = dir;
  const auto t0 = Clock::now();
  const std::string report = run_pipeline(c, opts);
  RunSeries r{seed, dir, seconds_since(t0), report.empty() ? json() : json::parse(report)};
  return r;
}

std::map<std::string, std::string> files_under(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = testutil::slurp(e.path());
  return out;
}

// Label files, reports and every other artifact of rounds 0..rounds plus
// the final report.
std::map<std::string, std::string> run_artifacts(const fs::path& dir, std::size_t rounds) {
  std::map<std::string, std::string> out;
  for (std::size_t r = 0; r <= rounds; ++r) {
    const std::string name = "round_" + std::to_string(r);
    for (auto& [k, v] : files_under(dir / name)) out[name + "/" + k] = v;
  }
  out["final_report.json"] = testutil::slurp(dir / "final_report.json");
  return out;
}

std::string first_difference(const std::map<std::string, std::string>& a,
                             const std::map<std::string, std::string>& b) {
  for (const auto& [k, v] : a) {
    const auto it = b.find(k);
    if (it == b.end()) return k + " missing";
    if (it->second != v) return k + " differs";
  }
  for (const auto& [k, v] : b)
    if (!a.contains(k)) return k + " unexpected";
  return {};
}

// --- criteria -------------------------------------------------------------------

Outcome criterion_trend(const std::vector<RunSeries>& runs) {
  int good = 0;
  bool fast = true;
  for (const auto& r : runs) {
    const auto& nmi_series = r.report["audio_nmi"];
    const auto& eer_series = r.report["audio_eer"];
    const double gain = nmi_series[2].get<double>() - nmi_series[0].get<double>();
    bool decreasing = true;
    std::string eers;
    for (std::size_t i = 0; i < eer_series.size(); ++i) {
      eers += (i ? " > " : "") + fmt(eer_series[i].get<double>());
      if (i > 0 && !(eer_series[i].get<double>() < eer_series[i - 1].get<double>())) decreasing = false;
    }
    const bool ok = gain >= 0.05 && decreasing;
    good += ok;
    fast = fast && r.seconds <= 600.0;
    detail("seed " + std::to_string(r.seed) + ": audio NMI " + fmt(nmi_series[0].get<double>()) + " -> " +
           fmt(nmi_series[2].get<double>()) + " (+" + fmt(gain) + "), audio EER " + eers + ", " +
           fmt(r.seconds, 1) + " s" + (ok ? "" : "  <- fails"));
  }
  return {good >= 2 && fast, std::to_string(good) + "/3 seeds meet NMI gain >= 0.05 and strictly decreasing EER" +
                                 (fast ? "" : "; a run exceeded 10 minutes")};
}

Outcome criterion_fusion(const std::vector<RunSeries>& runs) {
  std::size_t checked = 0, failed = 0;
  double worst = 1e9;
  for (const auto& r : runs)
    for (std::size_t round = 1; round < r.report["round"].size(); ++round) {
      const double a = r.report["audio_nmi"][round].get<double>();
      const double v = r.report["visual_nmi"][round].get<double>();
      const double f = r.report["fused_label_nmi"][round].get<double>();
      const double margin = f - (std::max(a, v) - 0.01);
      worst = std::min(worst, margin);
      ++checked;
      if (margin < 0) {
        ++failed;
        detail("seed " + std::to_string(r.seed) + " round " + std::to_string(round) + ": fused " + fmt(f) +
               " < max(" + fmt(a) + ", " + fmt(v) + ") - 0.01");
      }
    }
  return {failed == 0 && checked > 0, std::to_string(checked - failed) + "/" + std::to_string(checked) +
                                          " rounds with fused NMI >= max(audio, visual) - 0.01 (smallest margin " +
                                          fmt(worst) + ")"};
}

Outcome criterion_hungarian() {
  const auto t0 = Clock::now();
  Rng rng(2026);
  int exact = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(6);
    std::vector<std::vector<std::int64_t>> rows(k, std::vector<std::int64_t>(k));
    ContingencyMatrix m;
    m.k = k;
    for (auto& row : rows)
      for (auto& v : row) {
        v = static_cast<std::int64_t>(rng.below(trial % 2 ? 1000 : 5));
        m.omega.push_back(v);
      }
    const Correspondence c = correspond(m);
    std::int64_t realised = 0;
    for (std::size_t lp = 0; lp < k; ++lp) realised += rows[c.theta[lp]][lp];
    exact += (c.objective == oracle::best_permutation_objective(rows) && realised == c.objective);
  }
  const double secs = seconds_since(t0);
  return {exact == 200 && secs < 5.0,
          std::to_string(exact) + "/200 objectives equal the exhaustive maximum, " + fmt(secs, 3) + " s"};
}

Outcome criterion_metrics() {
  Rng rng(4);
  int eer_ok = 0, dcf_ok = 0, at_points = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    ScoreSet s;
    std::vector<double> scores;
    std::vector<bool> keys;
    for (std::size_t i = 0; i < n; ++i) {
      const bool target = i == 0 ? true : i == 1 ? false : rng.below(2) == 1;
      // Coarse grid so ties occur.
      const double v = std::round((rng.normal() + (target ? 0.8 : 0.0)) * 10.0) / 10.0;
      s.trials.push_back({"e" + std::to_string(i), "t" + std::to_string(i), target});
      s.scores.push_back(v);
      scores.push_back(v);
      keys.push_back(target);
    }
    const auto ref = oracle::eer(scores, keys);
    const double got = eer(s).eer;
    at_points += ref.at_operating_point;
    eer_ok += ref.at_operating_point ? got == ref.eer : std::abs(got - ref.eer) <= 1e-12;
    const DcfParams d{0.05 + 0.9 * rng.uniform(), 1.0 + rng.below(3), 1.0 + rng.below(3)};
    dcf_ok += min_dcf(s, d).min_dcf == oracle::min_dcf(scores, keys, d.p_target, d.c_miss, d.c_fa);
  }
  int nmi_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> a(1 + rng.below(300)), b(a.size());
    for (auto& v : a) v = static_cast<int>(rng.below(1 + trial % 9));
    for (auto& v : b) v = static_cast<int>(rng.below(1 + trial % 7));
    nmi_ok += std::abs(nmi(a, b) - oracle::nmi(a, b)) <= 1e-10;
  }
  const double worked = nmi(std::vector<int>{0, 0, 0, 1, 1, 1}, std::vector<int>{0, 0, 1, 1, 1, 1});
  const bool worked_ok = std::abs(worked - oracle::nmi({0, 0, 0, 1, 1, 1}, {0, 0, 1, 1, 1, 1})) <= 1e-10 &&
                         std::abs(worked - 0.4786) <= 2e-4;
  return {eer_ok == 100 && dcf_ok == 100 && nmi_ok == 100 && worked_ok,
          "EER " + std::to_string(eer_ok) + "/100 (" + std::to_string(at_points) +
              " at operating points, exact), minDCF " + std::to_string(dcf_ok) + "/100 exact, NMI " +
              std::to_string(nmi_ok) + "/100 within 1e-10, worked example " + fmt(worked, 6)};
}

Outcome criterion_gradients() {
  Rng rng(5);
  double worst_con = 0, worst_ce = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t in = 2 + rng.below(5), h = 2 + rng.below(8), d = 2 + rng.below(4);
    const std::size_t m = 2 + rng.below(4);
    const auto denom = trial % 2 ? ContrastiveDenominator::kSimclr : ContrastiveDenominator::kPaper;
    const EncoderParams enc = init_encoder(in, h, d, rng);
    const Matrix views = testutil::gaussian_matrix(2 * m, in, rng);
    const auto r1 = grad_check(contrastive_objective(enc, views, 0.05 + rng.uniform(), denom), flatten(enc), 1e-4);
    worst_con = std::max(worst_con, r1.max_relative_error);

    const std::size_t k = 2 + rng.below(5), n = 3 + rng.below(6);
    const ClassifierHead head = init_head(d, k, rng);
    Assignment labels{std::vector<int>(n), k};
    for (auto& l : labels.labels) l = static_cast<int>(rng.below(k));
    const Matrix x = testutil::gaussian_matrix(n, in, rng);
    const auto r2 = grad_check(classifier_objective(enc, head, x, labels, 0.1), flatten(enc, head), 1e-4);
    worst_ce = std::max(worst_ce, r2.max_relative_error);
  }
  return {worst_con < 1e-4 && worst_ce < 1e-4, "max relative error: contrastive " + fmt(worst_con * 1e6, 3) +
                                                   "e-6, smoothed cross entropy " + fmt(worst_ce * 1e6, 3) +
                                                   "e-6 over 50 instances each"};
}

Outcome criterion_closed_form() {
  auto identical = [](std::size_t rows) {
    Matrix z(rows, 3);
    for (std::size_t r = 0; r < rows; ++r) {
      z(r, 0) = 0.4;
      z(r, 1) = -1.3;
      z(r, 2) = 2.2;
    }
    return z;
  };
  const double m2 = contrastive_loss(identical(4), 0.1).loss;
  const double m3 = contrastive_loss(identical(6), 0.1).loss;
  return {std::abs(m2) <= 1e-9 && std::abs(m3 - std::log(2.0)) <= 1e-9,
          "M=2 loss " + fmt(m2, 12) + ", M=3 loss " + fmt(m3, 12) + " (ln 2 = " + fmt(std::log(2.0), 12) + ")"};
}

Outcome criterion_kmeans() {
  Rng rng(7);
  bool monotone = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testutil::gaussian_matrix(200 + rng.below(800), 2 + rng.below(10), rng);
    KMeansOptions o;
    o.seed = trial;
    o.restarts = 3;
    const auto r = kmeans(x, 2 + rng.below(40), o);
    for (const auto& trace : r.restart_traces)
      for (std::size_t i = 1; i < trace.size(); ++i) monotone = monotone && trace[i] <= trace[i - 1] * (1 + 1e-9);
  }
  const Matrix small = testutil::gaussian_matrix(25, 3, rng);
  const bool k_equals_n = kmeans(small, 25).wss == 0.0;

  Matrix four(4, 2);
  four(1, 1) = 1;
  four(2, 0) = 10;
  four(3, 0) = 10;
  four(3, 1) = 1;
  const double w2 = kmeans(four, 2).wss;

  const Matrix big = testutil::gaussian_matrix(5000, 16, rng);
  KMeansOptions o;
  o.restarts = 2;
  o.threads = 1;
  const auto ref = kmeans(big, 64, o);
  bool thread_free = true;
  for (std::size_t t : {2u, 4u, 7u}) {
    o.threads = t;
    const auto r = kmeans(big, 64, o);
    thread_free = thread_free && r.assignment == ref.assignment && r.centroids.centroids == ref.centroids.centroids &&
                  r.wss == ref.wss;
  }
  return {monotone && k_equals_n && w2 == 1.0 && thread_free,
          std::string("Lloyd monotone: ") + (monotone ? "yes" : "no") + ", K=N gives W=0: " +
              (k_equals_n ? "yes" : "no") + ", 4-point K=2 W=" + fmt(w2, 12) +
              ", bitwise equal for 1/2/4/7 threads: " + (thread_free ? "yes" : "no")};
}

Outcome criterion_elbow() {
  Rng rng(8);
  int hits = 0;
  // Two-segment curves: a steep drop up to the planted knee, then a shallow
  // tail, with jitter of 1% of the total drop.
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6 + rng.below(15);
    const std::size_t knee = 1 + rng.below(n - 2);
    const double steep = rng.uniform(5.0, 50.0), flat = steep * rng.uniform(0.02, 0.2);
    const std::size_t step = 1 + rng.below(500);
    WssCurve c;
    double w = 1000.0;
    for (std::size_t i = 0; i < n; ++i) {
      c.ks.push_back(step * (i + 1));
      c.wss.push_back(w);
      w -= i < knee ? steep : flat;
    }
    const double jitter = 0.01 * (c.wss.front() - c.wss.back());
    for (double& v : c.wss) v += jitter * rng.uniform(-1.0, 1.0);
    const auto sel = select_k_elbow(c);
    const auto idx = static_cast<long>(std::find(c.ks.begin(), c.ks.end(), sel.k) - c.ks.begin());
    const bool hit = std::abs(idx - static_cast<long>(knee)) <= 1;
    hits += hit;
    if (!hit)
      detail("curve " + std::to_string(trial) + ": planted index " + std::to_string(knee) + ", selected " +
             std::to_string(idx));
  }
  const auto linear = select_k_elbow(WssCurve{{5, 10, 15, 20, 25}, {50, 40, 30, 20, 10}});
  return {hits >= 18 && linear.k == 5, std::to_string(hits) + "/20 planted knees recovered within one grid step; "
                                           "linear curve selects K=" + std::to_string(linear.k)};
}

Outcome criterion_asnorm() {
  const double v = as_norm_score(0.6, Vector{1.0, 0.0}, Vector{0.5, 0.1}, 2);
  Rng rng(9);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Vector e(30), t(30);
    for (double& x : e) x = rng.uniform(-1, 1);
    for (double& x : t) x = rng.uniform(-1, 1);
    const double s = rng.uniform(-1, 1), a = rng.uniform(0.01, 20), b = rng.uniform(-10, 10);
    Vector ea(e), ta(t);
    for (double& x : ea) x = a * x + b;
    for (double& x : ta) x = a * x + b;
    worst = std::max(worst, std::abs(as_norm_score(s, e, t, 10) - as_norm_score(a * s + b, ea, ta, 10)));
  }
  bool degenerate = false;
  try {
    as_norm_score(0.2, Vector{0.5, 0.5, 0.5}, Vector{0.1, 0.3, 0.2}, 3);
  } catch (const DegenerateCohortError&) {
    degenerate = true;
  }
  return {std::abs(v - 0.85) <= 1e-9 && worst <= 1e-9 && degenerate,
          "example " + fmt(v, 12) + ", affine deviation " + fmt(worst * 1e12, 3) + "e-12, degenerate cohort " +
              (degenerate ? "raises DegenerateCohortError" : "did not raise")};
}

Outcome criterion_determinism(const fs::path& work, const RunSeries& reference) {
  const RunSeries again = run_default(work / "seed1_repeat", reference.seed);
  const std::string diff = first_difference(run_artifacts(reference.dir, 3), run_artifacts(again.dir, 3));

  PipelineOptions stop;
  stop.stop_after_round = 1;
  run_default(work / "seed1_resumed", reference.seed, 3, stop);
  const bool stopped = !fs::exists(work / "seed1_resumed" / "round_2");
  run_default(work / "seed1_resumed", reference.seed);
  const std::string resume_diff =
      first_difference(run_artifacts(reference.dir, 3), run_artifacts(work / "seed1_resumed", 3));
  const std::size_t files = run_artifacts(reference.dir, 3).size();
  return {diff.empty() && resume_diff.empty() && stopped,
          "repeat run: " + (diff.empty() ? "identical" : diff) + "; interrupted after round 1 and resumed: " +
              (resume_diff.empty() ? "identical" : resume_diff) + " (" + std::to_string(files) + " files compared)"};
}

// Copies the reference corpus, scrambles identity_gt and group_id, and
// reruns round 0 and 1 on it.
Outcome criterion_firewall(const fs::path& work, const RunSeries& reference) {
  const fs::path scrambled = work / "scrambled_corpus";
  fs::remove_all(scrambled);
  fs::copy(reference.dir / "corpus", scrambled, fs::copy_options::recursive);
  {
    std::ifstream in(scrambled / "meta.tsv");
    std::string header, line;
    std::getline(in, header);
    std::vector<std::string> ids;
    while (std::getline(in, line)) ids.push_back(line.substr(0, line.find('\t')));
    Rng rng(99);
    std::ofstream out(scrambled / "meta.tsv", std::ios::trunc);
    out << header << '\n';
    for (const auto& id : ids)
      out << id << "\tgroup" << rng.below(1000000) << '\t' << rng.below(200) << '\n';
  }
  PipelineConfig c;
  c.seed = reference.seed;
  c.rounds = 1;
  c.corpus_path = scrambled;
  c.output_dir = work / "firewall_run";
  run_pipeline(c);

  const char* training_outputs[] = {"round_0/audio_encoder.enc", "round_0/audio.emb",
                                    "round_0/labels.tsv",        "round_1/audio_encoder.enc",
                                    "round_1/visual_encoder.enc", "round_1/audio.emb",
                                    "round_1/visual.emb",         "round_1/fused_labels.tsv",
                                    "round_1/labels.tsv"};
  std::size_t same = 0, total = 0;
  for (const char* f : training_outputs) {
    ++total;
    const bool eq = testutil::slurp(reference.dir / f) == testutil::slurp(c.output_dir / f) &&
                    !testutil::slurp(reference.dir / f).empty();
    same += eq;
    if (!eq) detail(std::string(f) + " differs after scrambling ground truth");
  }
  const bool meta_changed = testutil::slurp(scrambled / "meta.tsv") != testutil::slurp(reference.dir / "corpus/meta.tsv");
  return {same == total && meta_changed, std::to_string(same) + "/" + std::to_string(total) +
                                             " training outputs byte-identical (incl. round-1 encoder checkpoints)"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "selflabel_acceptance";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--work-dir") work = argv[i + 1];
  fs::remove_all(work);
  fs::create_directories(work);

  std::vector<std::pair<std::string, std::function<Outcome()>>> unit_criteria = {
      {"3 Hungarian exactness", criterion_hungarian},
      {"4 metric oracles", criterion_metrics},
      {"5 gradient correctness", criterion_gradients},
      {"6 closed-form contrastive values", criterion_closed_form},
      {"7 k-means contracts", criterion_kmeans},
      {"8 elbow detection", criterion_elbow},
      {"9 AS-Norm", criterion_asnorm},
  };

  std::vector<std::pair<std::string, Outcome>> results;
  auto record = [&](const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
    results.emplace_back(name, o);
  };

  std::cout << "running default pipeline for seeds 1, 2, 3 (rounds = 3)" << std::endl;
  std::vector<RunSeries> runs;
  bool runs_ok = true;
  try {
    for (std::uint64_t seed : {1, 2, 3}) runs.push_back(run_default(work / ("seed" + std::to_string(seed)), seed));
  } catch (const std::exception& e) {
    runs_ok = false;
    std::cout << "    pipeline run failed: " << e.what() << std::endl;
  }
  auto needs_runs = [&](auto fn) {
    return [&, fn]() -> Outcome { return runs_ok ? fn() : Outcome{false, "pipeline runs failed"}; };
  };
  record("1 iterative-improvement trend", needs_runs([&] { return criterion_trend(runs); }));
  record("2 fusion benefit", needs_runs([&] { return criterion_fusion(runs); }));
  for (const auto& [name, fn] : unit_criteria) record(name, fn);
  record("10 determinism and resume", needs_runs([&] { return criterion_determinism(work, runs.front()); }));
  record("11 ground-truth firewall", needs_runs([&] { return criterion_firewall(work, runs.front()); }));

  std::size_t passed = 0;
  for (const auto& [name, o] : results) passed += o.pass;
  std::cout << passed << "/" << results.size() << " acceptance criteria passed" << std::endl;
  return passed == results.size() ? 0 : 1;
}
