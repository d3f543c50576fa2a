#include <doctest.h>

#include "redsim/planner.hpp"
#include "redsim/reward.hpp"
#include "redsim/runner.hpp"
#include "test_util.hpp"

using namespace redsim;

namespace {

RewardInputs inputs_with(std::vector<MilestoneEvent> ms, std::vector<ViolationEvent> vs = {},
                         double blue_penalty = 0.0) {
  RewardInputs ri;
  ri.milestones = std::move(ms);
  ri.violations = std::move(vs);
  ri.blue_penalty = blue_penalty;
  ri.executed = GroundedAction::sleep();
  return ri;
}

}  // namespace

TEST_CASE("shaping table conformance: every constant exact") {
  const RewardConfig cfg;
  // Milestone layer.
  struct Row {
    MilestoneKind kind;
    double want;
  };
  const Row rows[] = {
      {MilestoneKind::DiscoverHost, 0.2},   {MilestoneKind::ScanHost, 0.5},
      {MilestoneKind::CompromiseUser, 5.0}, {MilestoneKind::EscalateRoot, 3.0},
      {MilestoneKind::ImpactHost, 5.0},     {MilestoneKind::DiscoverSubnet, 1.0},
  };
  for (const auto& row : rows) {
    MilestoneTracker tracker;
    auto ri = inputs_with({{row.kind, 3, 0, false}});
    RewardBreakdown b = shape(ri, nullptr, tracker, cfg);
    CHECK(b.r_progress == row.want);
    CHECK(b.total == row.want);
  }
  // First compromise in a defended subnet adds +8.0 on top of +5.0.
  {
    MilestoneTracker tracker;
    auto ri = inputs_with({{MilestoneKind::CompromiseUser, 3, 1, true}});
    RewardBreakdown b = shape(ri, nullptr, tracker, cfg);
    CHECK(b.r_progress == 13.0);
  }
  // Constraint layer.
  struct VRow {
    ViolationKind kind;
    double want;
  };
  const VRow vrows[] = {
      {ViolationKind::ImpactWithoutRoot, -0.1},
      {ViolationKind::ExploitWithoutScan, -0.05},
      {ViolationKind::EscalateWithoutUser, -0.05},
  };
  for (const auto& row : vrows) {
    MilestoneTracker tracker;
    auto ri = inputs_with({}, {{row.kind, 3}});
    RewardBreakdown b = shape(ri, nullptr, tracker, cfg);
    CHECK(b.r_constraint == row.want);
    CHECK(b.total == row.want);
  }
  // Environment layer is the negated defender reward.
  {
    MilestoneTracker tracker;
    auto ri = inputs_with({}, {}, -6.0);
    RewardBreakdown b = shape(ri, nullptr, tracker, cfg);
    CHECK(b.r_env == 6.0);
  }
  // Alignment layer constants.
  CHECK(cfg.intent_match == 1.0);
  CHECK(cfg.intent_diverge == -0.3);
}

TEST_CASE("worked examples from the shaping contract") {
  const RewardConfig cfg;

  SUBCASE("first compromise, intent matched, no defender signal: total 6.0") {
    MilestoneTracker tracker;
    RewardInputs ri = inputs_with({{MilestoneKind::CompromiseUser, 2, 0, false}});
    ri.executed = GroundedAction::on_host(ActionId::ExploitRemoteService, 2, 0);
    Intent intent = Intent::for_action(ActionId::ExploitRemoteService, TargetKind::Host, 2);
    RewardBreakdown b = shape(ri, &intent, tracker, cfg);
    CHECK(b.r_progress == 5.0);
    CHECK(b.r_alignment == 1.0);
    CHECK(b.total == doctest::Approx(6.0));
  }

  SUBCASE("impact without root, intent diverged: total -0.4") {
    MilestoneTracker tracker;
    RewardInputs ri = inputs_with({}, {{ViolationKind::ImpactWithoutRoot, 2}});
    ri.executed = GroundedAction::on_host(ActionId::Impact, 2, 0);
    Intent intent = Intent::for_action(ActionId::AggressiveServiceDiscovery, TargetKind::Host, 1);
    RewardBreakdown b = shape(ri, &intent, tracker, cfg);
    CHECK(b.r_constraint == doctest::Approx(-0.1));
    CHECK(b.r_alignment == doctest::Approx(-0.3));
    CHECK(b.total == doctest::Approx(-0.4));
  }

  SUBCASE("sleep matching a sleep intent: alignment only, total 1.0") {
    MilestoneTracker tracker;
    RewardInputs ri = inputs_with({});
    ri.executed = GroundedAction::sleep();
    Intent intent = Intent::for_action(ActionId::Sleep, TargetKind::None, -1);
    RewardBreakdown b = shape(ri, &intent, tracker, cfg);
    CHECK(b.total == doctest::Approx(1.0));
  }
}

TEST_CASE("milestones fire once per host, and re-fire only after a restore") {
  const RewardConfig cfg;
  MilestoneTracker tracker;

  auto first = shape(inputs_with({{MilestoneKind::CompromiseUser, 4, 1, false}}), nullptr, tracker, cfg);
  CHECK(first.r_progress == 5.0);
  auto repeat = shape(inputs_with({{MilestoneKind::CompromiseUser, 4, 1, false}}), nullptr, tracker, cfg);
  CHECK(repeat.r_progress == 0.0);

  // Restore re-arms compromise and escalation but not impact.
  {
    auto impact_first = shape(inputs_with({{MilestoneKind::ImpactHost, 4, 1, false}}), nullptr, tracker, cfg);
    CHECK(impact_first.r_progress == 5.0);
    RewardInputs restore = inputs_with({});
    restore.restored_hosts = {4};
    shape(restore, nullptr, tracker, cfg);

    auto again = shape(inputs_with({{MilestoneKind::CompromiseUser, 4, 1, false},
                                    {MilestoneKind::ImpactHost, 4, 1, false}}),
                       nullptr, tracker, cfg);
    CHECK(again.r_progress == 5.0);  // compromise refires; impact does not
  }

  // The defended-subnet bonus is once per subnet even across restores.
  {
    MilestoneTracker t2;
    auto a = shape(inputs_with({{MilestoneKind::CompromiseUser, 7, 2, true}}), nullptr, t2, cfg);
    CHECK(a.r_progress == 13.0);
    RewardInputs restore = inputs_with({});
    restore.restored_hosts = {7};
    shape(restore, nullptr, t2, cfg);
    auto b = shape(inputs_with({{MilestoneKind::CompromiseUser, 7, 2, true}}), nullptr, t2, cfg);
    CHECK(b.r_progress == 5.0);
  }
}

TEST_CASE("violations are penalized once per host and kind") {
  const RewardConfig cfg;
  MilestoneTracker tracker;
  auto a = shape(inputs_with({}, {{ViolationKind::ImpactWithoutRoot, 3}}), nullptr, tracker, cfg);
  CHECK(a.r_constraint == doctest::Approx(-0.1));
  auto b = shape(inputs_with({}, {{ViolationKind::ImpactWithoutRoot, 3}}), nullptr, tracker, cfg);
  CHECK(b.r_constraint == 0.0);
  auto c = shape(inputs_with({}, {{ViolationKind::ImpactWithoutRoot, 5}}), nullptr, tracker, cfg);
  CHECK(c.r_constraint == doctest::Approx(-0.1));
}

TEST_CASE("alignment is exactly +1.0 or -0.3, and zero with a null intent") {
  const RewardConfig cfg;
  MilestoneTracker tracker;
  RewardInputs ri = inputs_with({});
  ri.executed = GroundedAction::on_host(ActionId::ExploitRemoteService, 3, 0);

  Intent match = Intent::for_action(ActionId::ExploitRemoteService, TargetKind::Host, 3);
  CHECK(shape(ri, &match, tracker, cfg).r_alignment == 1.0);

  Intent wrong_target = Intent::for_action(ActionId::ExploitRemoteService, TargetKind::Host, 4);
  CHECK(shape(ri, &wrong_target, tracker, cfg).r_alignment == doctest::Approx(-0.3));

  Intent no_target = Intent::for_action(ActionId::ExploitRemoteService, TargetKind::None, -1);
  CHECK(shape(ri, &no_target, tracker, cfg).r_alignment == 1.0);  // category-only match

  Intent tactic_only = match;
  tactic_only.category = "Initial Access";
  CHECK(shape(ri, &tactic_only, tracker, cfg).r_alignment == 1.0);

  CHECK(shape(ri, nullptr, tracker, cfg).r_alignment == 0.0);

  RewardConfig cat_only = cfg;
  cat_only.alignment_category_only = true;
  CHECK(shape(ri, &wrong_target, tracker, cat_only).r_alignment == 1.0);
}

TEST_CASE("layer separability: zeroing one layer shifts totals by exactly that layer") {
  // Fixed agent (seeded random) so the action sequence is reward-independent.
  RunConfig rc;
  rc.scenario = testutil::tiny_defended(3);
  rc.scenario.max_steps = 50;

  auto run = [&](const RewardConfig& rcfg) {
    RunConfig local = rc;
    local.reward = rcfg;
    Planner planner(local.planner, local.features);  // intents don't steer the random agent
    EpisodeTrace trace;
    EpisodeSpec spec;
    spec.run = &local;
    spec.kind = AgentKind::Random;
    spec.planner = &planner;
    spec.seed = 99;
    spec.trace = &trace;
    run_episode(spec);
    return trace;
  };

  EpisodeTrace full = run(RewardConfig{});
  for (int layer = 0; layer < 4; ++layer) {
    RewardConfig ablated;
    if (layer == 0) ablated.layer_env = false;
    if (layer == 1) ablated.layer_progress = false;
    if (layer == 2) ablated.layer_constraint = false;
    if (layer == 3) ablated.layer_alignment = false;
    EpisodeTrace cut = run(ablated);
    REQUIRE(cut.steps.size() == full.steps.size());
    for (size_t i = 0; i < full.steps.size(); ++i) {
      const auto& f = full.steps[i].reward;
      const auto& c = cut.steps[i].reward;
      double removed = layer == 0 ? f.r_env : layer == 1 ? f.r_progress
                                   : layer == 2          ? f.r_constraint
                                                         : f.r_alignment;
      CHECK(f.total - c.total == doctest::Approx(removed).epsilon(1e-12));
    }
  }
}

TEST_CASE("totals always equal the sum of the four layers") {
  RunConfig rc;
  rc.scenario = curriculum_stage(1);
  rc.scenario.seed = 21;
  rc.scenario.max_steps = 80;
  Planner planner(rc.planner, rc.features);
  EpisodeTrace trace;
  EpisodeSpec spec;
  spec.run = &rc;
  spec.kind = AgentKind::Random;
  spec.planner = &planner;
  spec.seed = 1234;
  spec.trace = &trace;
  run_episode(spec);
  bool saw_alignment = false;
  for (const auto& s : trace.steps) {
    CHECK(s.reward.total ==
          s.reward.r_env + s.reward.r_progress + s.reward.r_constraint + s.reward.r_alignment);
    CHECK((s.reward.r_alignment == 1.0 || s.reward.r_alignment == -0.3));
    saw_alignment |= s.reward.r_alignment != 0.0;
  }
  CHECK(saw_alignment);
}
