mod common;

use hcp_core::benchmarks::{gen_bts, gen_colorball, gen_doors, BenchmarkError, BenchmarkSpec, KITCHEN_LITE};
use hcp_core::verify::verify;
use hcp_core::EngineConfig;

fn plan_and_verify(text: &str) -> hcp_core::PlanStats {
    let inst = common::load(text);
    let (plan, report) = inst.run(EngineConfig::default());
    let v = verify(
        &inst.model,
        &inst.problem.goal,
        &inst.problem.initial,
        &plan,
        &inst.view(),
    );
    assert!(v.ok, "{:?}", v.violations);
    assert_eq!(v.branches_checked as u64, report.stats.leaves);
    report.stats
}

#[test]
fn generators_are_deterministic() {
    for spec in ["bts-5", "colorball-3-2", "doors-5", "kitchen-lite"] {
        let spec: BenchmarkSpec = spec.parse().unwrap();
        assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
    }
}

#[test]
fn names_round_trip() {
    for name in ["bts-12", "colorball-3-1", "doors-7", "kitchen-lite"] {
        let spec: BenchmarkSpec = name.parse().unwrap();
        assert_eq!(spec.to_string(), name);
    }
    assert!(matches!(
        "sokoban-3".parse::<BenchmarkSpec>(),
        Err(BenchmarkError::UnknownFamily(_))
    ));
    assert!(matches!(
        "bts-x".parse::<BenchmarkSpec>(),
        Err(BenchmarkError::InvalidSize(_))
    ));
}

#[test]
fn invalid_sizes_are_rejected() {
    assert!(gen_bts(0).is_err());
    assert!(gen_colorball(0, 1).is_err());
    assert!(gen_colorball(2, 0).is_err());
    for n in [1, 2, 4, 6] {
        assert!(gen_doors(n).is_err(), "doors {n}");
    }
}

#[test]
fn bts_has_the_sense_then_dunk_shape() {
    for m in 1..=12 {
        let s = plan_and_verify(&gen_bts(m).unwrap());
        assert_eq!(s.tree_size, 2 * m as u64 - 1, "m={m}");
        assert_eq!(s.max_depth, m as u64, "m={m}");
        assert_eq!(s.leaves, m as u64);
    }
}

#[test]
fn smallest_instances_plan_and_verify() {
    plan_and_verify(&gen_colorball(2, 1).unwrap());
    plan_and_verify(&gen_colorball(1, 2).unwrap());
    plan_and_verify(&gen_doors(3).unwrap());
    plan_and_verify(KITCHEN_LITE);
}

#[test]
fn hidden_doors_force_sensing() {
    let s = plan_and_verify(&gen_doors(5).unwrap());
    assert!(s.sensing_nodes > 0);
}
