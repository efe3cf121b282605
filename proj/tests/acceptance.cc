// Copyright 2026  The PLF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion, each with the measured
// quantities and wall time. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.h"
#include "plf/checkpoint.h"
#include "plf/downstream.h"
#include "plf/features.h"
#include "plf/gradcheck.h"
#include "plf/objective.h"
#include "plf/phonology.h"
#include "plf/synthcorpus.h"
#include "plf/trainer.h"

namespace fs = std::filesystem;

namespace {

using plf::Matrix;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void Criterion(int id, const std::string& name, double budget_seconds,
               const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= budget_seconds) {
    o.pass = false;
    o.detail << " [over time budget " << budget_seconds << " s]";
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s:%s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str(),
              secs);
  std::fflush(stdout);
}

// Speaker corpus shared by the downstream and correlation criteria.
const std::vector<plf::LogitsRecord>& SpeakerCorpus() {
  static const std::vector<plf::LogitsRecord> records = [] {
    plf::PlfSpeakerConfig cfg;
    cfg.seed = plf::DeriveSeed(2026, "acceptance-speakers");
    return plf::GeneratePlfSpeakers(cfg, plf::CanonicalTemplateSpec());
  }();
  return records;
}

void Compression(Outcome& o) {
  o.Require(plf::Compress(0.0, 4.0) == 0.0 && plf::Compress(0.0, 1e6) == 0.0, "psi(0) == 0");
  const double sat = plf::Compress(-1000.0, 4.0);
  o.Require(std::abs(sat + 4.0) <= 1e-12, "psi(-1000, 4) == -4");
  double worst = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double x = -0.01 + 0.02 * k / 2000.0;
    worst = std::max(worst, std::abs(plf::Compress(x, 1e6) - x));
  }
  o.Require(worst <= 1e-8, "small-x identity");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> xs(-20.0, 5.0), es(1.0, 100.0);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    double a = xs(rng), b = xs(rng);
    const double e = es(rng);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    violations += !(plf::Compress(a, e) < plf::Compress(b, e));
  }
  o.Require(violations == 0, "strict monotonicity");
  o.detail << " psi(-1000,4)+4=" << sat + 4.0 << ", max|psi(x)-x| (E=1e6,|x|<=0.01)=" << worst
           << ", monotonicity violations=" << violations << "/10000";
}

void GradientCheck(Outcome& o) {
  plf::GradCheckOptions opt;
  opt.configurations = 100;
  opt.seed = 2026;
  const plf::GradCheckReport r = plf::RunGradientCheck(opt);
  o.Require(r.configurations >= 100, "configuration count");
  o.Require(r.passed(), "max relative error < 1e-4");
  o.detail << " configs=" << r.configurations << ", coordinates=" << r.checked << " (+" << r.skipped
           << " at ReLU kinks), max relative error=" << r.max_relative_error;
}

void ScoreStructure(Outcome& o) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 5.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int asym = 0;
  for (int k = 0; k < 10000; ++k) {
    const double x = n(rng);
    double m = u(rng);
    if (m == 0.0) m = 1.0;
    if (k % 3 == 0) m = m > 0 ? 1.0 : -1.0;
    asym += plf::PlfPosterior(x, m) != plf::PlfPosterior(-x, -m);
  }
  o.Require(asym == 0, "sign symmetry");

  long zero_entries = 0, nonzero_grads = 0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const plf::ConversionSpec spec = seed == 0 ? plf::DemoSpec() : plf::RandomSpec(seed, 6, 8);
    Matrix v(4, spec.num_plfs());
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = n(rng);
    for (int p = 0; p < spec.num_phones(); ++p) {
      Matrix d_scores = Matrix::Zero(4, spec.num_phones());
      d_scores.col(p).setOnes();
      Matrix d_logits;
      plf::ScorePhonesBackward(v, spec, spec.M(), 4.0, d_scores, &d_logits, nullptr);
      for (int f = 0; f < spec.num_plfs(); ++f)
        if (spec.M()(p, f) == 0.0) {
          ++zero_entries;
          nonzero_grads += (d_logits.col(f).array() != 0.0).count();
        }
    }
  }
  o.Require(nonzero_grads == 0, "zero-weight gradients exactly zero");

  double worst = 0.0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const plf::ConversionSpec spec = seed == 0 ? plf::DemoSpec() : plf::RandomSpec(seed, 6, 8);
    Matrix v(6, spec.num_plfs());
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = n(rng);
    const Matrix s1 = plf::ScorePhones(v, spec, spec.M(), 4.0);
    const Matrix w = plf::EffectiveMatrix(
        spec.matrix(), plf::ScalingMatrix::Identity(spec.num_phones(), spec.num_plfs()));
    const Matrix s2 = plf::Calibrate(plf::ScorePhones(v, spec, w, 4.0), plf::Vector::Ones(spec.num_phones()),
                                     plf::Vector::Zero(spec.num_phones()));
    worst = std::max(worst, (s1 - s2).cwiseAbs().maxCoeff());
  }
  o.Require(worst <= 1e-12, "calibration identity");
  o.detail << " sign-symmetry violations=" << asym << "/10000, nonzero grads at " << zero_entries
           << " zero-weight entries=" << nonzero_grads << ", max |path2-path1| at identity=" << worst;
}

void PerOracle(Outcome& o) {
  std::mt19937 rng(4);
  int mismatches = 0, identity_failures = 0;
  for (int k = 0; k < 1000; ++k) {
    const int alphabet = 1 + static_cast<int>(rng() % 10);
    std::vector<int> ref(1 + rng() % 30), hyp(rng() % 31);
    for (int& x : ref) x = static_cast<int>(rng() % alphabet);
    for (int& x : hyp) x = static_cast<int>(rng() % alphabet);
    const plf::AlignmentCounts c = plf::Align(ref, hyp);
    mismatches += c.distance() != plf::oracle::EditDistance(ref, hyp);
    const plf::PerFeature f = plf::PerFeatures(ref, hyp);
    identity_failures += std::abs(f.per - (f.ins_rate + f.del_rate + f.sub_rate)) > 1e-12;
  }
  o.Require(mismatches == 0, "edit distance equals oracle");
  o.Require(identity_failures == 0, "per = ins + del + sub");
  const std::vector<int> seq = {1, 2, 3, 2};
  const double same = plf::PerFeatures(seq, seq).per;
  const double empty = plf::PerFeatures(seq, std::vector<int>{}).per;
  o.Require(same == 0.0, "ref == hyp gives 0");
  o.Require(empty == 1.0, "empty hyp gives 1");
  o.detail << " oracle mismatches=" << mismatches << "/1000, decomposition failures=" << identity_failures
           << ", PER(ref,ref)=" << same << ", PER(ref,[])=" << empty;
}

void Histogram(Outcome& o) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 4.0);
  double worst_sum = 0.0;
  int permutation_changes = 0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Index f = 1 + static_cast<Eigen::Index>(rng() % 21), t = 1 + static_cast<Eigen::Index>(rng() % 200);
    Matrix v(f, t);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = n(rng);
    const plf::HistogramFeature h = plf::PlfHistogram(plf::PlfLogits{v});
    for (Eigen::Index r = 0; r < f; ++r) worst_sum = std::max(worst_sum, std::abs(h.values.row(r).sum() - 1.0));
    std::vector<Eigen::Index> perm(static_cast<size_t>(t));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix shuffled(f, t);
    for (Eigen::Index c = 0; c < t; ++c) shuffled.col(c) = v.col(perm[static_cast<size_t>(c)]);
    permutation_changes += plf::PlfHistogram(plf::PlfLogits{shuffled}).values != h.values;
  }
  const plf::ConversionSpec canonical = plf::CanonicalTemplateSpec();
  const auto names = plf::HistogramColumnNames(canonical.inventory().names);
  const auto flat = plf::PlfHistogram(plf::PlfLogits{Matrix::Zero(canonical.num_plfs(), 3)}).Flatten();
  o.Require(worst_sum <= 1e-9, "7-tuple sums to 1");
  o.Require(names.size() == 147 && flat.size() == 147, "147 canonical features");
  o.Require(permutation_changes == 0, "frame permutation invariance");
  o.detail << " max |sum-1|=" << worst_sum << ", canonical features=" << flat.size()
           << ", permutation changes=" << permutation_changes << "/1000";
}

void EndToEnd(Outcome& o) {
  const plf::ConversionSpec spec = plf::DemoSpec();
  plf::SynthConfig train_cfg;
  train_cfg.noise_sigma = 0.3;
  train_cfg.seed = plf::DeriveSeed(2026, "acceptance-train-corpus");
  const plf::SynthCorpus train = plf::GenerateCorpus(train_cfg, spec);
  plf::SynthConfig test_cfg = train_cfg;
  test_cfg.seed = plf::DeriveSeed(2026, "acceptance-test-corpus");
  test_cfg.suppression.clear();
  test_cfg.healthy_speakers = 4;
  const plf::SynthCorpus test = plf::GenerateCorpus(test_cfg, spec);

  plf::TrainConfig cfg;  // defaults: E = 4, 30 epochs, Adam 1e-3, SpecAugment on
  cfg.seed = plf::DeriveSeed(2026, "acceptance-train");
  const plf::TrainResult r = plf::Train(train.utterances, spec, cfg);
  const plf::Checkpoint ckpt = plf::MakeCheckpoint(spec, cfg, r.model);
  const double acc_train = plf::FramewiseAccuracy(ckpt, train.utterances);
  const double acc_test = plf::FramewiseAccuracy(ckpt, test.utterances);
  const double sign_test = plf::SignAgreement(ckpt, test.utterances);
  o.Require(cfg.objective.e == 4.0 && cfg.epochs == 30, "default TrainConfig");
  o.Require(acc_test >= 0.90, "held-out framewise accuracy >= 0.90");
  o.Require(acc_train >= 0.90, "training-corpus framewise accuracy >= 0.90");
  o.Require(sign_test >= 0.90, "sign agreement >= 0.90");
  o.detail << " epochs=" << r.log.size() << ", framewise accuracy train=" << acc_train
           << " held-out=" << acc_test << ", sign agreement held-out=" << sign_test;
}

void Downstream(Outcome& o) {
  const auto& records = SpeakerCorpus();
  std::vector<plf::SpeakerRecord> speakers;
  for (const auto& r : records)
    speakers.push_back({r.speaker, plf::PlfHistogram(plf::PlfLogits{r.logits}).Flatten(), r.pathology,
                        r.intelligibility});
  double mean = 0.0, var = 0.0;
  for (const auto& s : speakers) mean += s.intelligibility;
  mean /= double(speakers.size());
  for (const auto& s : speakers) var += (s.intelligibility - mean) * (s.intelligibility - mean);
  const double sd = std::sqrt(var / double(speakers.size()));

  const plf::CvPlan plan = plf::MakeFolds(speakers, plf::DeriveSeed(2026, "acceptance-folds"));
  const plf::CvResult cv =
      plf::CrossValidate(speakers, plf::Task::kRegression, plf::ModelSpace::Default(plf::Task::kRegression), plan);
  int leaks = 0;
  for (const auto& f : cv.folds) {
    try {
      plf::CheckNoLeakage(speakers, f);
    } catch (const plf::Error&) {
      ++leaks;
    }
  }
  o.Require(cv.mean_metric <= 6.0, "RMSE <= 6");
  o.Require(std::abs(cv.mean_baseline - sd) <= 0.1 * sd, "baseline RMSE within 10% of std");
  o.Require(leaks == 0 && cv.folds.size() == 5, "no leakage on every fold");
  o.detail << " speakers=" << speakers.size() << ", CV RMSE=" << cv.mean_metric
           << ", baseline RMSE=" << cv.mean_baseline << ", target std=" << sd << ", folds with leakage=" << leaks;
  for (const auto& f : cv.folds) o.detail << (f.fold == 0 ? ", selected " : "/") << f.selection.best.ToString();
}

void Ablation(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / "plf_acceptance_ablation";
  fs::remove_all(root);
  const std::string tool = PLF_TOOL_PATH;
  auto run = [&](const std::string& args) {
    const std::string cmd = tool + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const std::string corpus = (root / "corpus" / "corpus.csv").string();
  o.Require(run("synth --out " + (root / "corpus").string() + " --seed 8 --healthy 3 --per-class 1") == 0,
            "synth");
  const nlohmann::json expect_nos = {{"path1", true}, {"path2", false}, {"path3", true}};
  const nlohmann::json expect_nod = {{"path1", true}, {"path2", true}, {"path3", false}};
  for (const auto& [flag, expect] : {std::pair{"--no-scaling-matrix", expect_nos}, std::pair{"--no-direct-path", expect_nod}}) {
    const fs::path out = root / (std::string(flag).substr(2));
    const int rc = run("train --corpus " + corpus + " --out " + out.string() + " --epochs 2 --quiet " + flag);
    o.Require(rc == 0, std::string(flag) + " run completes");
    if (rc != 0) continue;
    const auto summary = nlohmann::json::parse(plf::ReadFile(out / "summary.json"));
    const auto& paths = summary["config"]["paths"];
    o.Require(paths == expect, std::string(flag) + " disables exactly its path");
    o.detail << " " << flag << ": paths=" << paths.dump();
  }
  fs::remove_all(root);
}

void Correlation(Outcome& o) {
  const plf::ConversionSpec spec = plf::CanonicalTemplateSpec();
  const auto& records = SpeakerCorpus();
  std::vector<plf::PlfLogits> logits;
  std::vector<double> scores;
  for (const auto& r : records) {
    logits.push_back({r.logits});
    scores.push_back(r.intelligibility);
  }
  const auto rows = plf::CorrelationReport(logits, scores, spec.inventory().names);
  const auto it = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.plf == "Alveolar"; });
  o.Require(it != rows.end(), "Alveolar row present");
  if (it != rows.end()) {
    o.Require(it->bin_label == "H0", "best bin is H0");
    o.Require(it->bin_r > 0.9, "r > 0.9");
    o.detail << " Alveolar best bin=" << it->bin_label << " r=" << it->bin_r << " (mean r=" << it->mean_r << ")";
  }
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst_self = 0.0, worst_affine = 0.0;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> x(50), y(50), z(50);
    const double a = 0.1 + std::abs(n(rng)) * 10, b = n(rng) * 100;
    for (size_t i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      y[i] = x[i] + n(rng);
      z[i] = a * x[i] + b;
    }
    worst_self = std::max(worst_self, std::abs(plf::Pcc(x, x) - 1.0));
    worst_affine = std::max(worst_affine, std::abs(plf::Pcc(z, y) - plf::Pcc(x, y)));
  }
  o.Require(worst_self <= 1e-12, "pcc(x,x) == 1");
  o.Require(worst_affine <= 1e-12, "affine invariance");
  o.detail << ", max |pcc(x,x)-1|=" << worst_self << ", max affine deviation=" << worst_affine;
}

}  // namespace

int main() {
  Criterion(1, "compression", 1.0, Compression);
  Criterion(2, "gradient check", 60.0, GradientCheck);
  Criterion(3, "score structure", 60.0, ScoreStructure);
  Criterion(4, "PER oracle", 10.0, PerOracle);
  Criterion(5, "histogram", 60.0, Histogram);
  Criterion(6, "end-to-end training", 300.0, EndToEnd);
  Criterion(7, "downstream harness", 300.0, Downstream);
  Criterion(8, "ablation flags", 300.0, Ablation);
  Criterion(9, "correlation report", 60.0, Correlation);
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
