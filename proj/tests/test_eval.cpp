#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "mibci/crossval.hpp"
#include "mibci/report.hpp"
#include "mibci/stats.hpp"
#include "mibci/synth.hpp"
#include "test_util.hpp"

using namespace mibci;

namespace {

// 6 units x 3 methods, standard normal draws (mt19937 seed 42, row-major)
// plus column offsets (0, 0.5, 1.0). Frozen so the oracle values below stay
// valid regardless of the standard library's normal_distribution algorithm.
Eigen::MatrixXd seed42_table() {
  Eigen::MatrixXd m(6, 3);
  m << -0.55023449442049355, 1.0154330696912013, 1.4738608556662223,
      1.368450122216075, -0.41682687324868972, 0.87585282503564588,
      -2.0109628746476189, 0.0071965278885564588, 1.3925797413887007,
      -0.92918465177910148, 0.57983179127671991, 0.84048353881352744,
      0.022221829914369357, 0.072207052962915463, 0.4681825401489067,
      -0.11747550690766509, 0.72207891061117135, 0.23202350400101623;
  return m;
}

}  // namespace

TEST_CASE("plan_folds") {
  SUBCASE("80 trials, 10 folds, margin 5: fold 0 tests 0..7, trains 13..79") {
    const FoldPlan plan = plan_folds(80, 10, 5);
    REQUIRE(plan.folds.size() == 10);
    const Fold& f0 = plan.folds[0];
    CHECK(f0.test_begin == 0);
    CHECK(f0.test_end == 8);
    REQUIRE(f0.train_indices.size() == 67);
    CHECK(f0.train_indices.front() == 13);
    CHECK(f0.train_indices.back() == 79);
  }
  SUBCASE("interior fold excludes margin on both sides") {
    const FoldPlan plan = plan_folds(80, 10, 5);
    const Fold& f5 = plan.folds[5];  // tests 40..47
    CHECK(f5.test_begin == 40);
    CHECK(f5.test_end == 48);
    for (std::size_t i : f5.train_indices) CHECK((i < 35 || i >= 53));
    CHECK(f5.train_indices.size() == 80 - 8 - 10);
  }
  SUBCASE("test blocks partition the trials") {
    const FoldPlan plan = plan_folds(83, 10, 5);
    std::size_t covered = 0;
    std::size_t expect = 0;
    for (const auto& f : plan.folds) {
      CHECK(f.test_begin == expect);
      expect = f.test_end;
      covered += f.test_end - f.test_begin;
    }
    CHECK(covered == 83);
  }
  SUBCASE("min train-test distance exceeds the margin") {
    for (std::size_t n : {80u, 83u, 100u}) {
      const FoldPlan plan = plan_folds(n, 10, 5);
      for (const auto& f : plan.folds)
        for (std::size_t i : f.train_indices) {
          // distance from i to the closed test block [begin, end-1]
          const std::size_t d = i < f.test_begin ? f.test_begin - i
                                                 : i - (f.test_end - 1);
          CHECK(d > 5);
        }
    }
  }
  SUBCASE("too few trials for the margin throws") {
    CHECK_THROWS_AS(plan_folds(12, 10, 5), std::invalid_argument);
    CHECK_THROWS_AS(plan_folds(5, 10, 5), std::invalid_argument);
  }
}

TEST_CASE("confusion") {
  SUBCASE("hand-counted mixed case") {
    // truth: 1 1 1 0 0 0 1 0 ; pred: 1 0 1 0 1 0 1 1
    const std::vector<int> truth = {1, 1, 1, 0, 0, 0, 1, 0};
    const std::vector<int> pred = {1, 0, 1, 0, 1, 0, 1, 1};
    const ConfusionMetrics m = confusion(truth, pred);
    CHECK(m.tp == 3);
    CHECK(m.fn == 1);
    CHECK(m.tn == 2);
    CHECK(m.fp == 2);
    CHECK(m.accuracy == doctest::Approx(5.0 / 8.0));
    CHECK(m.tpr == doctest::Approx(3.0 / 4.0));
    CHECK(m.tnr == doctest::Approx(2.0 / 4.0));
    CHECK(m.fpr == doctest::Approx(2.0 / 4.0));
    CHECK(m.fnr == doctest::Approx(1.0 / 4.0));
  }
  SUBCASE("all correct") {
    const ConfusionMetrics m = confusion({1, 0, 1, 0}, {1, 0, 1, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.tpr == 1.0);
    CHECK(m.tnr == 1.0);
    CHECK(m.fpr == 0.0);
    CHECK(m.fnr == 0.0);
  }
  SUBCASE("single-class truth gives NaN rates for the absent class") {
    const ConfusionMetrics m = confusion({1, 1}, {1, 0});
    CHECK(std::isnan(m.tnr));
    CHECK(std::isnan(m.fpr));
    CHECK(m.tpr == doctest::Approx(0.5));
  }
  SUBCASE("rate identities on random inputs") {
    std::mt19937 rng(7);
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<int> truth, pred;
      const int n = 1 + static_cast<int>(rng() % 50);
      for (int i = 0; i < n; ++i) {
        truth.push_back(static_cast<int>(rng() % 2));
        pred.push_back(static_cast<int>(rng() % 2));
      }
      const ConfusionMetrics m = confusion(truth, pred);
      if (!std::isnan(m.tpr)) CHECK(m.tpr + m.fnr == 1.0);
      if (!std::isnan(m.tnr)) CHECK(m.tnr + m.fpr == 1.0);
      CHECK(m.tp + m.tn + m.fp + m.fn == truth.size());
    }
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(confusion({1, 0}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(confusion({}, {}), std::invalid_argument);
  }
}

TEST_CASE("cross_validate") {
  SUBCASE("separable synthetic session reaches >= 0.90 with FBCSP") {
    SynthSpec spec;
    spec.seed = 3;
    const Recording rec = generate_session(spec);
    const CrossValResult r = cross_validate(rec, SpatialMethod::fbcsp);
    CHECK(r.fold_metrics.size() == 10);
    CHECK(r.mean_accuracy >= 0.90);
  }
  SUBCASE("no-contrast session stays near chance") {
    SynthSpec spec;
    spec.sources[0].modulation = 0.0;
    spec.seed = 4;
    const Recording rec = generate_session(spec);
    const CrossValResult r = cross_validate(rec, SpatialMethod::csp);
    CHECK(r.mean_accuracy > 0.39);
    CHECK(r.mean_accuracy < 0.61);
  }
  SUBCASE("deterministic across repeated runs") {
    SynthSpec spec;
    spec.n_trials = 30;
    spec.seed = 5;
    const Recording rec = generate_session(spec);
    const CrossValResult a = cross_validate(rec, SpatialMethod::spoc, 5, 2);
    const CrossValResult b = cross_validate(rec, SpatialMethod::spoc, 5, 2);
    REQUIRE(a.fold_metrics.size() == b.fold_metrics.size());
    for (std::size_t f = 0; f < a.fold_metrics.size(); ++f) {
      CHECK(a.fold_metrics[f].tp == b.fold_metrics[f].tp);
      CHECK(a.fold_metrics[f].tn == b.fold_metrics[f].tn);
    }
    CHECK(a.mean_accuracy == b.mean_accuracy);
  }
}

TEST_CASE("rm_anova") {
  SUBCASE("identical columns: F = 0, p = 1") {
    Eigen::MatrixXd v = testutil::randn(5, 1, 61).replicate(1, 3);
    const AnovaResult r = rm_anova(v);
    CHECK(r.f == 0.0);
    CHECK(r.p == 1.0);
    CHECK(!r.degenerate);
  }
  SUBCASE("frozen seed-42 table matches the independent reference") {
    const AnovaResult r = rm_anova(seed42_table());
    CHECK(r.df_method == 2);
    CHECK(r.df_error == 10);
    CHECK(r.f == doctest::Approx(3.181219053299).epsilon(1e-6));
    CHECK(r.p == doctest::Approx(0.085262863902).epsilon(1e-6));
  }
  SUBCASE("two methods: F equals t squared") {
    const Eigen::MatrixXd v = seed42_table().leftCols(2);
    const AnovaResult a = rm_anova(v);
    const auto pw = bonferroni_pairwise(v);
    REQUIRE(pw.size() == 1);
    CHECK(std::abs(a.f - pw[0].t * pw[0].t) < 1e-9);
    CHECK(a.p == doctest::Approx(pw[0].p_raw).epsilon(1e-9));
  }
  SUBCASE("invariant to shifting all values and scaling") {
    const Eigen::MatrixXd v = seed42_table();
    const AnovaResult base = rm_anova(v);
    const AnovaResult shifted = rm_anova((v.array() + 7.0).matrix());
    const AnovaResult scaled = rm_anova(3.0 * v);
    CHECK(shifted.f == doctest::Approx(base.f).epsilon(1e-9));
    CHECK(scaled.f == doctest::Approx(base.f).epsilon(1e-9));
  }
  SUBCASE("constant nonzero effect with zero error variance is degenerate") {
    Eigen::MatrixXd v(3, 2);
    v << 0.0, 1.0, 0.0, 1.0, 0.0, 1.0;
    const AnovaResult r = rm_anova(v);
    CHECK(r.degenerate);
    CHECK(r.p == 0.0);
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(rm_anova(Eigen::MatrixXd::Zero(5, 1)), std::invalid_argument);
    CHECK_THROWS_AS(rm_anova(Eigen::MatrixXd::Zero(1, 3)), std::invalid_argument);
  }
}

TEST_CASE("bonferroni_pairwise") {
  SUBCASE("frozen seed-42 table matches the independent reference") {
    const auto pw = bonferroni_pairwise(seed42_table());
    REQUIRE(pw.size() == 3);
    CHECK(pw[0].t == doctest::Approx(-1.226404704001).epsilon(1e-6));
    CHECK(pw[0].p_raw == doctest::Approx(0.274646684533).epsilon(1e-6));
    CHECK(pw[0].p_corrected == doctest::Approx(0.823940053600).epsilon(1e-6));
    CHECK(pw[1].t == doctest::Approx(-2.164998408493).epsilon(1e-6));
    CHECK(pw[1].p_raw == doctest::Approx(0.082663427063).epsilon(1e-6));
    CHECK(pw[1].p_corrected == doctest::Approx(0.247990281190).epsilon(1e-6));
    CHECK(pw[2].t == doctest::Approx(-1.927572240504).epsilon(1e-6));
    CHECK(pw[2].p_raw == doctest::Approx(0.111837735305).epsilon(1e-6));
    CHECK(pw[2].p_corrected == doctest::Approx(0.335513205914).epsilon(1e-6));
    for (const auto& p : pw) CHECK(p.df == 5);
  }
  SUBCASE("identical columns: t = 0, p = 1") {
    Eigen::MatrixXd v = testutil::randn(4, 1, 62).replicate(1, 2);
    const auto pw = bonferroni_pairwise(v);
    REQUIRE(pw.size() == 1);
    CHECK(pw[0].t == 0.0);
    CHECK(pw[0].p_raw == 1.0);
    CHECK(pw[0].p_corrected == 1.0);
  }
  SUBCASE("correction is capped at 1") {
    for (const auto& p : bonferroni_pairwise(seed42_table()))
      CHECK(p.p_corrected <= 1.0);
  }
}

TEST_CASE("format_mean_sd matches the one-decimal percentage layout") {
  CHECK(format_mean_sd(0.652, 0.113) == "65.2 ± 11.3");
  CHECK(format_mean_sd(0.634, 0.104) == "63.4 ± 10.4");
  CHECK(format_mean_sd(0.607, 0.115) == "60.7 ± 11.5");
  CHECK(format_mean_sd(1.0, 0.0) == "100.0 ± 0.0");
}

namespace {

EvalReport tiny_report() {
  EvalReport rep;
  rep.methods = {"fbcsp", "spoc"};
  rep.sessions = {"s0", "s1"};
  for (const auto& s : rep.sessions)
    for (const auto& m : rep.methods) {
      SessionEval e;
      e.session = s;
      e.method = m;
      ConfusionMetrics f0 = confusion({1, 0, 1, 0}, {1, 0, 1, 0});
      ConfusionMetrics f1 = confusion({1, 0, 1, 0}, {1, 0, 0, m == "fbcsp" ? 0 : 1});
      e.result.fold_metrics = {f0, f1};
      rep.entries.push_back(std::move(e));
    }
  return rep;
}

}  // namespace

TEST_CASE("fold CSV layout") {
  testutil::TempDir tmp;
  const EvalReport rep = tiny_report();
  write_fold_csv(rep, tmp.file("folds.csv"));
  std::ifstream in(tmp.file("folds.csv"));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "session,method,fold,acc,tpr,tnr,fpr,fnr");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 8);  // 2 sessions x 2 methods x 2 folds
}

TEST_CASE("aggregate table has one row per session plus Average") {
  const std::string table = aggregate_table(tiny_report());
  std::istringstream in(table);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "session,fbcsp,spoc");
  CHECK(lines[1].rfind("s0,", 0) == 0);
  CHECK(lines[3].rfind("Average,", 0) == 0);
  CHECK(lines[1].find("±") != std::string::npos);
}

TEST_CASE("report JSON round trips through compare_methods") {
  const EvalReport rep = tiny_report();
  const nlohmann::json j = report_to_json(rep);
  CHECK(j.at("format") == "mibci-report/1");
  CHECK(j.contains("statistics"));
  const nlohmann::json stats = compare_methods(rep);
  CHECK(stats.contains("accuracy"));
  CHECK(stats.at("accuracy").at("pairwise").size() == 1);
}
