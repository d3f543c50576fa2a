#include <doctest.h>

#include <stdexcept>

#include <filesystem>

#include "redsim/harness.hpp"
#include "test_util.hpp"

using namespace redsim;

namespace {

EpisodeMetrics metrics(bool compromised, int attacks, int peak) {
  EpisodeMetrics m;
  m.compromised = compromised;
  m.attack_actions = attacks;
  m.peak_hosts_discovered = peak;
  return m;
}

EpisodeTrace synthetic_trace(int episode_id, std::vector<int> compromise_steps) {
  EpisodeTrace t;
  t.episode_id = episode_id;
  t.agent_label = "synthetic";
  t.scenario_hash = "s";
  t.reward_hash = "r";
  for (int step = 0; step < 20; ++step) {
    TraceStep s;
    s.step = step;
    s.action = GroundedAction::sleep();
    s.discovered_count = 1;
    for (int c : compromise_steps) {
      if (c == step) {
        s.action = GroundedAction::on_host(ActionId::ExploitRemoteService, 2, 0);
        s.reward.milestones_fired.push_back("compromise_user:2");
        s.reward.r_progress = 5.0;
        s.reward.total = 5.0;
      }
    }
    t.steps.push_back(s);
  }
  return t;
}

}  // namespace

TEST_CASE("aggregate: the three metric examples and the empty-list error") {
  Report r1 = aggregate({metrics(true, 0, 1), metrics(false, 0, 1)});
  CHECK(r1.ecr == doctest::Approx(0.5));

  Report r2 = aggregate({metrics(false, 3, 1), metrics(false, 7, 1)});
  CHECK(r2.aac == 10);

  Report r3 = aggregate({metrics(false, 0, 4), metrics(false, 0, 6)});
  CHECK(r3.ahd == doctest::Approx(5.0));

  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}

TEST_CASE("the pure-sleep agent bounds: ECR 0, AAC 0, AHD 1") {
  RunConfig rc;
  rc.scenario = testutil::tiny_scenario();
  EvalOptions opts;
  opts.kind = AgentKind::SleepOnly;
  opts.episodes = 5;
  opts.master_seed = 3;
  Report r = run_eval(rc, nullptr, nullptr, opts);
  CHECK(r.ecr == 0.0);
  CHECK(r.aac == 0);
  CHECK(r.ahd == doctest::Approx(1.0));
  CHECK(r.modal_action == static_cast<int>(ActionId::Sleep));
  CHECK(r.modal_action_frequency == doctest::Approx(1.0));
  CHECK(r.action_entropy == doctest::Approx(0.0));
}

TEST_CASE("identical seeds and configs give identical reports") {
  RunConfig rc;
  rc.scenario = curriculum_stage(1);
  rc.scenario.max_steps = 60;
  EvalOptions opts;
  opts.kind = AgentKind::Random;
  opts.episodes = 8;
  opts.master_seed = 12345;
  opts.workers = 4;
  Report a = run_eval(rc, nullptr, nullptr, opts);
  Report b = run_eval(rc, nullptr, nullptr, opts);
  CHECK(report_to_json(a) == report_to_json(b));

  EvalOptions other = opts;
  other.master_seed = 999;
  Report c = run_eval(rc, nullptr, nullptr, other);
  CHECK(report_to_json(c) != report_to_json(a));
}

TEST_CASE("reports re-aggregate exactly from persisted traces") {
  RunConfig rc;
  rc.scenario = curriculum_stage(1);
  rc.scenario.max_steps = 50;
  const std::string dir = "/tmp/redsim_test_traces";
  std::filesystem::remove_all(dir);

  Planner planner(rc.planner, rc.features);
  EvalOptions opts;
  opts.kind = AgentKind::Random;
  opts.episodes = 6;
  opts.master_seed = 77;
  opts.trace_dir = dir;
  Report live = run_eval(rc, nullptr, &planner, opts);

  Report replayed = aggregate_trace_dir(dir);
  CHECK(replayed.ecr == live.ecr);
  CHECK(replayed.aac == live.aac);
  CHECK(replayed.ahd == live.ahd);
  CHECK(replayed.compromised_episodes == live.compromised_episodes);
  CHECK(replayed.mean_total_reward == doctest::Approx(live.mean_total_reward));
  CHECK(replayed.action_histogram == live.action_histogram);
  CHECK(replayed.modal_action == live.modal_action);
}

TEST_CASE("removing a compromise event from a trace never increases ECR") {
  std::vector<EpisodeTrace> with = {synthetic_trace(0, {4}), synthetic_trace(1, {}),
                                    synthetic_trace(2, {9, 12})};
  Report before = aggregate_traces(with);

  // Edit: strip the compromise milestones from episode 0.
  std::vector<EpisodeTrace> edited = with;
  for (auto& s : edited[0].steps) {
    s.reward.milestones_fired.clear();
    s.reward.r_progress = 0.0;
    s.reward.total = 0.0;
  }
  Report after = aggregate_traces(edited);
  CHECK(after.ecr <= before.ecr);
  CHECK(after.compromised_episodes == before.compromised_episodes - 1);
}

TEST_CASE("trace files round-trip through JSONL") {
  RunConfig rc;
  rc.scenario = testutil::tiny_defended(5);
  rc.scenario.max_steps = 30;
  Planner planner(rc.planner, rc.features);
  EpisodeTrace trace;
  EpisodeSpec spec;
  spec.run = &rc;
  spec.kind = AgentKind::Random;
  spec.planner = &planner;
  spec.seed = 4;
  spec.trace = &trace;
  EpisodeMetrics m = run_episode(spec);

  std::string text = trace_to_jsonl(trace);
  EpisodeTrace back = trace_from_jsonl(text);
  CHECK(trace_to_jsonl(back) == text);
  EpisodeMetrics m2 = metrics_from_trace(back);
  CHECK(m2.compromised == m.compromised);
  CHECK(m2.attack_actions == m.attack_actions);
  CHECK(m2.total_reward == doctest::Approx(m.total_reward));
  CHECK(m2.peak_hosts_discovered == m.peak_hosts_discovered);
}

TEST_CASE("report JSON round-trips and the table mentions the headline numbers") {
  RunConfig rc;
  rc.scenario = testutil::tiny_scenario();
  EvalOptions opts;
  opts.kind = AgentKind::Random;
  opts.episodes = 4;
  opts.master_seed = 5;
  Report r = run_eval(rc, nullptr, nullptr, opts);
  Report back = report_from_json(report_to_json(r));
  CHECK(report_to_json(back) == report_to_json(r));
  std::string table = report_table(r);
  CHECK(table.find("ECR") != std::string::npos);
  CHECK(table.find("AAC") != std::string::npos);
  CHECK(table.find("AHD") != std::string::npos);
  CHECK(table.find(r.scenario_hash) != std::string::npos);

  std::string svg = report_bars_svg(r);
  CHECK(svg.find("<svg") != std::string::npos);
}

TEST_CASE("tiny training run is fully deterministic across repeats") {
  RunConfig rc;
  rc.scenario = curriculum_stage(0);
  rc.scenario.max_steps = 40;
  rc.train.total_episodes = 30;
  rc.train.eval_every_episodes = 10;
  rc.train.eval_episodes = 4;
  rc.train.episodes_per_rollout = 5;
  rc.train.seed = 7;
  rc.train.workers = 4;

  auto run = [&]() {
    Trainer t(rc);
    return t.train();
  };
  TrainResult a = run();
  TrainResult b = run();
  CHECK(a.metrics_csv == b.metrics_csv);
  REQUIRE(a.evals.size() == b.evals.size());
  for (size_t i = 0; i < a.evals.size(); ++i) {
    CHECK(a.evals[i].mean_reward == b.evals[i].mean_reward);
    CHECK(a.evals[i].ecr == b.evals[i].ecr);
  }
  bool same = true;
  std::vector<Vec*> pa, pb;
  a.params.visit([&](const std::string&, Vec& v, std::vector<int>) { pa.push_back(&v); });
  b.params.visit([&](const std::string&, Vec& v, std::vector<int>) { pb.push_back(&v); });
  for (size_t k = 0; k < pa.size(); ++k) same &= *pa[k] == *pb[k];
  CHECK(same);
}

TEST_CASE("rl-only regression disables alignment and reports distribution diagnostics") {
  RunConfig rc = testutil::smoke_run_config(2024);
  rc.scenario.max_steps = 60;  // desk-scale budget for the unit test
  rc.train.eval_episodes = 6;
  rc.train.eval_every_episodes = 20;
  rc.train.episodes_per_rollout = 5;

  RlOnlyRegression out = rl_only_regression(rc, 20, 2024);
  CHECK(out.report.episodes == 6);
  CHECK(out.modal_action_frequency >= 0.0);
  CHECK(out.modal_action_frequency <= 1.0);
  CHECK(out.action_entropy >= 0.0);
  CHECK(out.training.episodes_run == 20);

  // Alignment layer contributes zero throughout: total reward equals the sum
  // of the other three layers on every trace step.
  const std::string dir = "/tmp/redsim_rlonly_traces";
  std::filesystem::remove_all(dir);
  RunConfig null_cfg = rc;
  null_cfg.planner.backend = PlannerBackendKind::None;
  EvalOptions opts;
  opts.kind = AgentKind::Policy;
  opts.episodes = 2;
  opts.master_seed = 5;
  opts.trace_dir = dir;
  run_eval(null_cfg, &out.training.params, nullptr, opts);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    EpisodeTrace t = read_trace_file(entry.path().string());
    for (const auto& s : t.steps) CHECK(s.reward.r_alignment == 0.0);
  }
}
