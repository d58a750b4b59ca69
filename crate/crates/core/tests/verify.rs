mod common;

use hcp_core::belief::{apply_actuation, apply_sensing};
use hcp_core::benchmarks::{gen_bts, gen_colorball, gen_doors, KITCHEN_LITE};
use hcp_core::model::ValueIdx;
use hcp_core::seqplan::PlanStep;
use hcp_core::verify::{enumerate_branches, verify, ViolationKind};
use hcp_core::{ConditionalPlan, EngineConfig, NodeId, PlanNode};

fn kinds(report: &hcp_core::VerifyReport) -> Vec<ViolationKind> {
    report.violations.iter().map(|v| v.kind).collect()
}

#[test]
fn bts_four_checks_four_branches() {
    let inst = common::load(&gen_bts(4).unwrap());
    let (plan, _) = inst.run(EngineConfig::default());
    let r = verify(
        &inst.model,
        &inst.problem.goal,
        &inst.problem.initial,
        &plan,
        &inst.view(),
    );
    assert!(r.ok);
    assert_eq!(r.branches_checked, 4);
}

#[test]
fn bts_three_branch_lengths() {
    let inst = common::load(&gen_bts(3).unwrap());
    let (plan, _) = inst.run(EngineConfig::default());
    let hs = enumerate_branches(
        &inst.model,
        &inst.problem.goal,
        &inst.problem.initial,
        &plan,
        &inst.view(),
    )
    .unwrap();
    let mut lens: Vec<usize> = hs.iter().map(|h| h.makespan()).collect();
    lens.sort();
    assert_eq!(lens, vec![2, 3, 3]);
}

#[test]
fn histories_agree_with_stats_and_replay() {
    for text in [
        gen_bts(5).unwrap(),
        gen_colorball(2, 1).unwrap(),
        gen_doors(3).unwrap(),
        KITCHEN_LITE.to_string(),
    ] {
        let inst = common::load(&text);
        let (plan, _) = inst.run(EngineConfig::default());
        let stats = plan.stats();
        let hs = enumerate_branches(
            &inst.model,
            &inst.problem.goal,
            &inst.problem.initial,
            &plan,
            &inst.view(),
        )
        .unwrap();
        assert_eq!(hs.len() as u64, stats.leaves);
        assert_eq!(hs.iter().map(|h| h.makespan()).max().unwrap() as u64, stats.max_depth);
        for h in &hs {
            let mut b = inst.problem.initial.clone();
            for step in &h.steps {
                b = match step {
                    PlanStep::Act(a) => apply_actuation(&inst.model, &b, a).unwrap(),
                    PlanStep::Sense(s, o) => apply_sensing(&inst.model, &b, *s, *o).unwrap(),
                };
            }
            assert_eq!(&b, h.last_belief());
        }
    }
}

#[test]
fn chain_plan_has_one_history() {
    let inst = common::load(&gen_bts(1).unwrap());
    let (plan, _) = inst.run(EngineConfig::default());
    assert_eq!(plan.stats().sensing_nodes, 0);
    let hs = enumerate_branches(
        &inst.model,
        &inst.problem.goal,
        &inst.problem.initial,
        &plan,
        &inst.view(),
    )
    .unwrap();
    assert_eq!(hs.len(), 1);
    assert_eq!(hs[0].makespan(), 1);
}

#[test]
fn each_standard_mutation_is_detected() {
    for text in [
        gen_bts(3).unwrap(),
        gen_colorball(2, 1).unwrap(),
        gen_doors(3).unwrap(),
        KITCHEN_LITE.to_string(),
    ] {
        let inst = common::load(&text);
        let (plan, _) = inst.run(EngineConfig::default());
        let check =
            |p: &ConditionalPlan| verify(&inst.model, &inst.problem.goal, &inst.problem.initial, p, &inst.view());

        let dropped = check(&plan.mutate_drop_edge().unwrap());
        assert!(
            kinds(&dropped).contains(&ViolationKind::UncoveredOutcome),
            "{:?}",
            dropped.violations
        );

        let swapped = check(&plan.mutate_swap_outcomes().unwrap());
        assert!(!swapped.ok);

        let truncated = check(&plan.mutate_truncate().unwrap());
        assert!(!truncated.ok);
    }
}

#[test]
fn flipped_goal_fails_on_every_branch() {
    let inst = common::load(&gen_bts(4).unwrap());
    let (plan, _) = inst.run(EngineConfig::default());
    let flipped = common::load(&gen_bts(4).unwrap().replace("goal armed = false", "goal armed = true"));
    let r = verify(
        &flipped.model,
        &flipped.problem.goal,
        &flipped.problem.initial,
        &plan,
        &flipped.view(),
    );
    assert_eq!(r.branches_checked, 4);
    assert_eq!(r.violations.len(), 4);
    assert!(kinds(&r).iter().all(|&k| k == ViolationKind::GoalUnreached));
}

#[test]
fn hand_built_defects_are_classified() {
    let inst = common::load(&gen_bts(2).unwrap());
    let check = |p: &ConditionalPlan| verify(&inst.model, &inst.problem.goal, &inst.problem.initial, p, &inst.view());
    let dunk = |k: &str| inst.model.action_by_label(&format!("dunk({k})")).unwrap();
    let probe = inst.model.sensing_by_label("probe(p1)").unwrap();

    // Dunking an unidentified package.
    let blind = ConditionalPlan::new(
        vec![PlanNode::Act {
            actions: vec![dunk("p1")],
            child: None,
        }],
        Some(NodeId(0)),
    );
    assert_eq!(kinds(&check(&blind)), vec![ViolationKind::PreconditionViolated]);

    // An outcome that the sensing action cannot produce.
    let t = inst
        .model
        .value_index(inst.model.sensing(probe).target, "true")
        .unwrap();
    let f = inst
        .model
        .value_index(inst.model.sensing(probe).target, "false")
        .unwrap();
    let extra = ConditionalPlan::new(
        vec![
            PlanNode::Sense {
                sensing: probe,
                edges: vec![(t, NodeId(1)), (f, NodeId(2)), (ValueIdx(7), NodeId(2))],
            },
            PlanNode::Act {
                actions: vec![dunk("p1")],
                child: None,
            },
            PlanNode::Act {
                actions: vec![dunk("p2")],
                child: None,
            },
        ],
        Some(NodeId(0)),
    );
    assert_eq!(kinds(&check(&extra)), vec![ViolationKind::IllegalOutcomeEdge]);

    let looped = ConditionalPlan::new(
        vec![
            PlanNode::Sense {
                sensing: probe,
                edges: vec![(t, NodeId(1)), (f, NodeId(0))],
            },
            PlanNode::Act {
                actions: vec![dunk("p1")],
                child: None,
            },
        ],
        Some(NodeId(0)),
    );
    assert!(kinds(&check(&looped)).contains(&ViolationKind::CycleDetected));
}

#[test]
fn empty_plan_is_ok_only_when_the_goal_holds() {
    let inst = common::load(&gen_bts(2).unwrap());
    let r = verify(
        &inst.model,
        &inst.problem.goal,
        &inst.problem.initial,
        &ConditionalPlan::empty(),
        &inst.view(),
    );
    assert_eq!(kinds(&r), vec![ViolationKind::GoalUnreached]);
    let done = common::load(&gen_bts(2).unwrap().replace("goal armed = false", "goal armed = true"));
    let r = verify(
        &done.model,
        &done.problem.goal,
        &done.problem.initial,
        &ConditionalPlan::empty(),
        &done.view(),
    );
    assert!(r.ok);
    assert_eq!(r.branches_checked, 0);
}
