use super::*;
use crate::explain::FeatureOrder;
use crate::fixtures::{and_problem, constant_problem, or_problem, running_example, synthetic_linear};
use crate::norm::{Ball, Norm};
use crate::oracle::ExhaustiveOracle;
use crate::predicates::{check_wcxp, is_minimal_axp, is_minimal_cxp};
use crate::problem::{ExplanationKind, ExplanationProblem};

fn sets(list: &[&[usize]], m: usize) -> Vec<FeatureSet> {
    list.iter().map(|s| FeatureSet::from_one_based(s, m).unwrap()).collect()
}

fn sorted(mut v: Vec<FeatureSet>) -> Vec<Vec<usize>> {
    v.sort();
    v.into_iter().map(|s| s.to_one_based()).collect()
}

fn run(p: &ExplanationProblem, ball: Ball, limits: EnumerationLimits) -> ExplanationSets {
    let mut o = ExhaustiveOracle::new(p.clone());
    marco_enumerate(&mut o, &FeatureOrder::natural(p.num_features()), ball, limits, |_| {}).unwrap()
}

/// Minimal free sets and minimal fixed sets straight from the predicate table.
fn brute_force(p: &ExplanationProblem, ball: Ball) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let m = p.num_features();
    let mut o = ExhaustiveOracle::new(p.clone());
    let table: Vec<bool> = (0..1usize << m)
        .map(|bits| {
            let free: FeatureSet = (0..m).filter(|i| bits >> i & 1 == 1).collect();
            check_wcxp(&mut o, &free, ball).unwrap().holds
        })
        .collect();
    let full = (1usize << m) - 1;
    let minimal = |pred: &dyn Fn(usize) -> bool| -> Vec<FeatureSet> {
        (0..1usize << m)
            .filter(|&b| pred(b) && (0..m).all(|i| b >> i & 1 == 0 || !pred(b & !(1 << i))))
            .map(|b| (0..m).filter(|i| b >> i & 1 == 1).collect())
            .collect()
    };
    let cxps = minimal(&|b| table[b]);
    let axps = minimal(&|b| !table[full & !b]);
    (sorted(axps), sorted(cxps))
}

#[test]
fn running_example_sets() {
    let p = running_example();
    let ball = Ball::new(Norm::L1, 1.0).unwrap();
    let s = run(&p, ball, EnumerationLimits::default());
    assert!(s.complete);
    assert_eq!(sorted(s.axps.clone()), vec![vec![1]]);
    assert_eq!(sorted(s.cxps.clone()), vec![vec![1]]);
    assert!(check_duality(&s).unwrap());
}

#[test]
fn and_model_sets() {
    let p = and_problem();
    let ball = Ball::new(Norm::L0, 1.0).unwrap();
    let s = run(&p, ball, EnumerationLimits::default());
    assert!(s.complete);
    assert_eq!(sorted(s.cxps.clone()), vec![vec![1], vec![2]]);
    assert_eq!(sorted(s.axps.clone()), vec![vec![1, 2]]);
    assert!(check_duality(&s).unwrap());
    assert_eq!((sorted(s.axps), sorted(s.cxps)), brute_force(&p, ball));
}

#[test]
fn constant_model_has_only_the_empty_axp() {
    let p = constant_problem();
    let s = run(&p, Ball::new(Norm::L0, 3.0).unwrap(), EnumerationLimits::default());
    assert!(s.complete);
    assert!(s.cxps.is_empty());
    assert_eq!(s.axps, vec![FeatureSet::empty()]);
    assert!(check_duality(&s).unwrap());
}

#[test]
fn limits_stop_early() {
    let p = and_problem();
    let ball = Ball::new(Norm::L0, 1.0).unwrap();
    let s = run(
        &p,
        ball,
        EnumerationLimits {
            total: Some(1),
            cxps: None,
        },
    );
    assert_eq!(s.axps.len() + s.cxps.len(), 1);
    assert!(!s.complete);
    let s = run(
        &p,
        ball,
        EnumerationLimits {
            total: None,
            cxps: Some(1),
        },
    );
    assert_eq!(s.cxps.len(), 1);
    assert!(!s.complete);
    // a limit equal to the number of explanations still proves completeness
    let s = run(
        &p,
        ball,
        EnumerationLimits {
            total: Some(3),
            cxps: None,
        },
    );
    assert!(s.complete);
}

#[test]
fn emissions_are_streamed_and_minimal() {
    let p = or_problem();
    let ball = Ball::new(Norm::L0, 2.0).unwrap();
    let mut o = ExhaustiveOracle::new(p.clone());
    let mut seen = Vec::new();
    let s = marco_enumerate(
        &mut o,
        &FeatureOrder::natural(2),
        ball,
        EnumerationLimits::default(),
        |e| {
            seen.push((e.kind, e.features.to_one_based(), e.oracle_calls));
        },
    )
    .unwrap();
    assert_eq!(seen.len(), s.axps.len() + s.cxps.len());
    assert!(seen.windows(2).all(|w| w[0].2 < w[1].2));
    assert_eq!(sorted(s.cxps.clone()), vec![vec![1, 2]]);
    for c in &s.cxps {
        assert!(is_minimal_cxp(&mut o, c, ball).unwrap());
    }
    for a in &s.axps {
        assert!(is_minimal_axp(&mut o, a, ball).unwrap());
    }
    assert!(seen.iter().any(|e| e.0 == ExplanationKind::Axp));
}

#[test]
fn oracle_failure_returns_partial_results() {
    let p = synthetic_linear(3, 0.2, 1);
    let mut o = ExhaustiveOracle::new(p.clone());
    let err = marco_enumerate(
        &mut o,
        &FeatureOrder::natural(3),
        Ball::new(Norm::LInf, 1.0).unwrap(),
        EnumerationLimits::default(),
        |_| {},
    )
    .unwrap_err();
    assert!(!err.partial.complete);
    assert!(matches!(err.error, Error::Oracle(_)));
}

#[test]
fn duality_examples() {
    let d = |a: &[&[usize]], c: &[&[usize]]| {
        check_duality(&ExplanationSets {
            axps: sets(a, 4),
            cxps: sets(c, 4),
            complete: true,
            ..ExplanationSets::default()
        })
        .unwrap()
    };
    assert!(d(&[&[1, 2]], &[&[1], &[2]]));
    assert!(d(&[&[1]], &[&[1]]));
    assert!(!d(&[&[1]], &[&[2]]));
    assert!(d(&[&[]], &[]));
    let incomplete = ExplanationSets::default();
    assert!(check_duality(&incomplete).is_err());
}

#[test]
fn matches_brute_force_on_running_example_radii() {
    let p = running_example();
    for (norm, eps) in [
        (Norm::L1, 0.5),
        (Norm::L1, 2.0),
        (Norm::LInf, 1.0),
        (Norm::L2, 1.5),
        (Norm::L0, 1.0),
        (Norm::L0, 2.0),
        (Norm::L0, 3.0),
    ] {
        let ball = Ball::new(norm, eps).unwrap();
        let s = run(&p, ball, EnumerationLimits::default());
        assert!(s.complete);
        assert_eq!(
            (sorted(s.axps.clone()), sorted(s.cxps.clone())),
            brute_force(&p, ball),
            "{norm} {eps}"
        );
        assert!(check_duality(&s).unwrap());
    }
}
