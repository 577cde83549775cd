use std::time::Duration;

use super::*;
use crate::error::{Error, OracleError};
use crate::features::FeatureSet;
use crate::fixtures::{and_problem, constant_problem, or_problem, running_example, synthetic_linear};
use crate::norm::{Ball, Norm};
use crate::oracle::{Delay, ExhaustiveOracle, LatencyOracle, LinearOracle, Oracle, OracleAnswer, OracleQuery};
use crate::predicates::is_minimal_cxp;
use crate::problem::ExplanationProblem;

fn l1() -> Ball {
    Ball::new(Norm::L1, 1.0).unwrap()
}

fn l0(r: f64) -> Ball {
    Ball::new(Norm::L0, r).unwrap()
}

fn one_based(e: &crate::problem::Explanation) -> Vec<usize> {
    e.features.to_one_based()
}

fn natural(p: &ExplanationProblem) -> FeatureOrder {
    FeatureOrder::natural(p.num_features())
}

fn traced() -> SearchOptions {
    SearchOptions {
        trace: true,
        ..SearchOptions::default()
    }
}

#[derive(Clone)]
struct NoWitness(ExhaustiveOracle);

impl Oracle for NoWitness {
    fn problem(&self) -> &ExplanationProblem {
        self.0.problem()
    }

    fn find_adv_ex(&mut self, query: &OracleQuery) -> Result<OracleAnswer, OracleError> {
        Ok(match self.0.find_adv_ex(query)? {
            OracleAnswer::Found { .. } => OracleAnswer::Found { witness: None },
            other => other,
        })
    }
}

#[test]
fn deletion_examples() {
    let p = running_example();
    let e = deletion_cxp(&mut ExhaustiveOracle::new(p.clone()), &natural(&p), l1()).unwrap();
    assert_eq!(one_based(&e), vec![1]);
    assert_eq!(e.stats.oracle_calls, 1 + 3);

    let p = and_problem();
    let e = deletion_cxp(&mut ExhaustiveOracle::new(p.clone()), &natural(&p), l0(1.0)).unwrap();
    assert_eq!(one_based(&e), vec![1]);
    assert_eq!(e.stats.oracle_calls, 1 + 4);

    let p = constant_problem();
    let err = deletion_cxp(&mut ExhaustiveOracle::new(p.clone()), &natural(&p), l0(3.0)).unwrap_err();
    assert!(matches!(err, Error::NoAdvExample { oracle_calls: 1 }));
    assert_eq!(err.to_string(), "epsilon too small: no d-CXp; d-AXp = {}");
}

#[test]
fn dichotomic_examples() {
    let p = running_example();
    let e = dichotomic_cxp(
        &mut ExhaustiveOracle::new(p.clone()),
        &natural(&p),
        l1(),
        &SearchOptions::default(),
    )
    .unwrap();
    assert_eq!(one_based(&e), vec![1]);

    let p = and_problem();
    let order = FeatureOrder::from_one_based(&[3, 4, 1, 2], 4).unwrap();
    for seeded in [true, false] {
        let opts = SearchOptions {
            use_witness_seed: seeded,
            trace: false,
        };
        let mut o = ExhaustiveOracle::new(p.clone());
        let e = dichotomic_cxp(&mut o, &order, l0(1.0), &opts).unwrap();
        assert!([vec![1], vec![2]].contains(&one_based(&e)));
        assert!(is_minimal_cxp(&mut o, &e.features, l0(1.0)).unwrap());
    }

    let p = constant_problem();
    assert!(matches!(
        dichotomic_cxp(
            &mut ExhaustiveOracle::new(p.clone()),
            &natural(&p),
            l0(3.0),
            &SearchOptions::default()
        ),
        Err(Error::NoAdvExample { .. })
    ));
}

#[test]
fn unseeded_dichotomic_trace_on_and_model() {
    let p = and_problem();
    let order = FeatureOrder::from_one_based(&[3, 4, 1, 2], 4).unwrap();
    let opts = SearchOptions {
        use_witness_seed: false,
        trace: true,
    };
    let e = dichotomic_cxp(&mut ExhaustiveOracle::new(p), &order, l0(1.0), &opts).unwrap();
    let steps: Vec<(Vec<usize>, bool)> = e.trace.iter().map(|t| (t.free.to_one_based(), t.found)).collect();
    assert_eq!(
        steps,
        vec![
            (vec![1, 2, 3, 4], true),
            (vec![3, 4], false),
            (vec![1, 3, 4], true),
            (vec![1], true),
        ]
    );
    assert_eq!(one_based(&e), vec![1]);
}

#[test]
fn dichotomic_call_bound_on_synthetic_linear() {
    let p = synthetic_linear(64, 0.1, 11);
    let ball = Ball::new(Norm::LInf, 1.0).unwrap();
    let mut o = LinearOracle::new(p.clone()).unwrap();
    let e = dichotomic_cxp(&mut o, &natural(&p), ball, &SearchOptions::default()).unwrap();
    assert!(
        e.stats.oracle_calls <= e.len() as u64 * 8 + 2,
        "{} calls for |CXp| = {}",
        e.stats.oracle_calls,
        e.len()
    );
    assert!(is_minimal_cxp(&mut o, &e.features, ball).unwrap());
}

#[test]
fn swift_examples() {
    let p = running_example();
    let e = swift_cxp(
        &ExhaustiveOracle::new(p.clone()),
        &natural(&p),
        l1(),
        &SwiftParams::new(4),
    )
    .unwrap();
    assert_eq!(one_based(&e), vec![1]);

    let p = and_problem();
    let d = dichotomic_cxp(
        &mut ExhaustiveOracle::new(p.clone()),
        &natural(&p),
        l0(1.0),
        &SearchOptions::default(),
    )
    .unwrap();
    let s = swift_cxp(
        &ExhaustiveOracle::new(p.clone()),
        &natural(&p),
        l0(1.0),
        &SwiftParams::new(2),
    )
    .unwrap();
    assert_eq!(s.features, d.features);
}

#[test]
fn swift_with_one_worker_replays_the_dichotomic_trace() {
    let p = synthetic_linear(40, 0.15, 5);
    let ball = Ball::new(Norm::LInf, 1.0).unwrap();
    let o = LinearOracle::new(p.clone()).unwrap();
    for seeded in [true, false] {
        let opts = SearchOptions {
            use_witness_seed: seeded,
            trace: true,
        };
        let d = dichotomic_cxp(&mut o.clone(), &natural(&p), ball, &opts).unwrap();
        let params = SwiftParams {
            options: opts,
            ..SwiftParams::new(1)
        };
        let s = swift_cxp(&o, &natural(&p), ball, &params).unwrap();
        assert_eq!(s.trace, d.trace);
        assert_eq!(s.features, d.features);
        assert_eq!(s.stats.oracle_calls, d.stats.oracle_calls);
    }
}

#[test]
fn swift_is_deterministic_under_random_latency() {
    let p = synthetic_linear(48, 0.2, 9);
    let ball = Ball::new(Norm::LInf, 1.0).unwrap();
    let order = natural(&p);
    let run = |seed: u64, delta: Option<f64>| {
        let delay = Delay::Uniform {
            min: Duration::ZERO,
            max: Duration::from_millis(3),
            seed,
        };
        let o = LatencyOracle::new(LinearOracle::new(p.clone()).unwrap(), delay);
        let params = SwiftParams {
            delta,
            seed: 3,
            options: traced(),
            ..SwiftParams::new(6)
        };
        swift_cxp(&o, &order, ball, &params).unwrap()
    };
    for delta in [None, Some(0.8)] {
        let a = run(1, delta);
        let b = run(2, delta);
        assert_eq!(a.features, b.features);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.stats.oracle_calls, b.stats.oracle_calls);
        let mut o = LinearOracle::new(p.clone()).unwrap();
        assert!(is_minimal_cxp(&mut o, &a.features, ball).unwrap());
    }
}

#[test]
fn feature_disjunction_runs_when_enabled() {
    let p = synthetic_linear(32, 0.2, 4);
    let ball = Ball::new(Norm::LInf, 1.0).unwrap();
    let o = LinearOracle::new(p.clone()).unwrap();
    let params = SwiftParams {
        delta: Some(0.0),
        options: SearchOptions {
            use_witness_seed: false,
            trace: false,
        },
        ..SwiftParams::new(4)
    };
    let e = swift_cxp(&o, &natural(&p), ball, &params).unwrap();
    assert!(e.stats.fd_rounds > 0);
    assert!(is_minimal_cxp(&mut o.clone(), &e.features, ball).unwrap());
    let bad = SwiftParams {
        delta: Some(1.5),
        ..SwiftParams::new(4)
    };
    assert!(swift_cxp(&o, &natural(&p), ball, &bad).is_err());
    assert!(swift_cxp(&o, &natural(&p), ball, &SwiftParams::new(0)).is_err());
}

#[test]
fn feat_disjunct_examples() {
    // both probes hold on the AND model: one feature is dropped
    let mut o = ExhaustiveOracle::new(and_problem());
    let mut state = SearchState {
        s: FeatureSet::empty(),
        w: vec![0, 1],
    };
    let stats = feat_disjunct(&mut o, &mut state, 2, l0(1.0), 0).unwrap();
    assert_eq!(stats.oracle_calls, 2);
    assert_eq!(stats.fd_successes, 0);
    assert!(state.s.is_empty());
    assert_eq!(state.w.len(), 1);

    // neither probe holds on the OR model: both features are mandatory
    let mut o = ExhaustiveOracle::new(or_problem());
    let mut state = SearchState {
        s: FeatureSet::empty(),
        w: vec![0, 1],
    };
    let stats = feat_disjunct(&mut o, &mut state, 2, l0(2.0), 0).unwrap();
    assert_eq!(stats.fd_successes, 1);
    assert_eq!(state.s.to_one_based(), vec![1, 2]);
    assert!(state.w.is_empty());

    // width one is a single deletion step on the last feature
    let mut o = ExhaustiveOracle::new(and_problem());
    let mut state = SearchState {
        s: FeatureSet::empty(),
        w: vec![0, 1],
    };
    let stats = feat_disjunct(&mut o, &mut state, 1, l0(1.0), 0).unwrap();
    assert_eq!(stats.oracle_calls, 1);
    assert_eq!(state.w, vec![0]);
}

#[test]
fn extract_axp_examples() {
    let p = running_example();
    let all = p.all_features();
    let e = extract_axp(&mut ExhaustiveOracle::new(p.clone()), &all, &natural(&p), l0(3.0)).unwrap();
    assert_eq!(one_based(&e), vec![1, 2, 3]);
    let e = extract_axp(&mut ExhaustiveOracle::new(p.clone()), &all, &natural(&p), l1()).unwrap();
    assert_eq!(one_based(&e), vec![1]);
    let err = extract_axp(
        &mut ExhaustiveOracle::new(p.clone()),
        &FeatureSet::from_indices([1]),
        &natural(&p),
        l1(),
    );
    assert!(matches!(err, Err(Error::Usage(_))));

    let p = constant_problem();
    let e = extract_axp(
        &mut ExhaustiveOracle::new(p.clone()),
        &p.all_features(),
        &natural(&p),
        l0(3.0),
    )
    .unwrap();
    assert!(e.features.is_empty());
}

#[test]
fn seed_examples() {
    let p = running_example();
    let s = seed_weak_cxp(&mut ExhaustiveOracle::new(p.clone()), l1()).unwrap();
    assert_eq!(s.features.to_one_based(), vec![1]);
    assert_eq!(s.witness, Some(vec![0.0, 1.0, 1.0]));

    let s = seed_weak_cxp(&mut NoWitness(ExhaustiveOracle::new(p)), l1()).unwrap();
    assert_eq!(s.features.to_one_based(), vec![1, 2, 3]);

    assert!(matches!(
        seed_weak_cxp(&mut ExhaustiveOracle::new(constant_problem()), l0(3.0)),
        Err(Error::NoAdvExample { .. })
    ));
}

#[test]
fn witnessless_oracles_still_work() {
    let p = and_problem();
    let o = NoWitness(ExhaustiveOracle::new(p.clone()));
    let e = swift_cxp(&o, &natural(&p), l0(1.0), &SwiftParams::new(3)).unwrap();
    assert_eq!(one_based(&e), vec![1]);
}

#[test]
fn oracle_errors_surface_from_the_pool() {
    let p = crate::fixtures::synthetic_linear(8, 0.2, 1);
    // real domains are out of reach of the exhaustive oracle
    let o = ExhaustiveOracle::new(p.clone());
    let err = swift_cxp(
        &o,
        &natural(&p),
        Ball::new(Norm::LInf, 1.0).unwrap(),
        &SwiftParams::new(3),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Oracle(OracleError::Unsupported(_))), "{err}");
}
