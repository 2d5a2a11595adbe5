mod common;

use common::{case, params};
use intercorr::analytic::acf;
use intercorr::coherence::{coherence_search, traffic_coherence_unrounded};
use intercorr::{
    coherence_time, CaseTriplet, CoherenceMethod, CoherenceQuery, CoherenceValue, Mobility,
    NetworkParams,
};

fn finite(value: CoherenceValue) -> u32 {
    match value {
        CoherenceValue::Finite(t) => t,
        other => panic!("expected a finite coherence time, got {other}"),
    }
}

fn interior_probs(d: u32) -> [f64; 5] {
    [0.1, 0.3, 0.5, 0.7, 0.9].map(|f| f / d as f64)
}

#[test]
fn traffic_only_closed_form_matches_search() {
    for digits in ["002", "012"] {
        for d in 2..=10u32 {
            for p in interior_probs(d) {
                let q = CoherenceQuery::new(params(1.0, 1, d, p), case(digits), 0.0);
                let closed = coherence_time(&q).unwrap();
                assert_eq!(closed.method, CoherenceMethod::ClosedForm);
                let searched = coherence_search(&q).unwrap();
                assert_eq!(closed.value, searched.value, "{digits} d={d} p={p}");
            }
        }
    }
}

#[test]
fn traffic_only_worked_example() {
    let pr = params(1.0, 1, 2, 0.25);
    let q = CoherenceQuery::new(pr, case("002"), 0.0);
    assert_eq!(coherence_time(&q).unwrap().value, CoherenceValue::Finite(2));
    assert!(acf(&pr, case("002"), 1).unwrap() > 0.0);
    assert!(acf(&pr, case("002"), 2).unwrap() <= 0.0);
}

#[test]
fn traffic_only_nonincreasing_in_start_probability() {
    for d in 2..=10u32 {
        let times: Vec<u32> = (1..40)
            .map(|i| i as f64 / 40.0 / d as f64)
            .map(|p| {
                finite(
                    coherence_time(&CoherenceQuery::new(params(1.0, 1, d, p), case("002"), 0.0))
                        .unwrap()
                        .value,
                )
            })
            .collect();
        assert!(times.windows(2).all(|w| w[1] <= w[0]), "d={d}: {times:?}");
        // log(1 − μ)/log q → 1 as p → 1/d, with excess about ln d / |ln ε|
        let mut previous = f64::INFINITY;
        for k in 2..=12 {
            let eps = 10f64.powi(-k);
            let x =
                traffic_coherence_unrounded(&params(1.0, 1, d, (1.0 - eps) / d as f64)).unwrap();
            assert!(x > 1.0 && x < previous, "d={d} ε={eps}: {x}");
            assert!(
                x - 1.0 <= 2.0 * (d as f64).ln() / eps.ln().abs(),
                "d={d} ε={eps}: {x}"
            );
            previous = x;
        }
    }
}

#[test]
fn channel_only_cases_equal_block_length() {
    for c in [1u32, 2, 7, 12, 22] {
        for digits in ["020", "021"] {
            let q = CoherenceQuery::new(params(0.5, c, 1, 0.9), case(digits), 0.0);
            assert_eq!(coherence_time(&q).unwrap().value, CoherenceValue::Finite(c));
            assert_eq!(
                coherence_search(&q).unwrap().value,
                CoherenceValue::Finite(c)
            );
        }
    }
}

#[test]
fn uncorrelated_cases_take_one_slot() {
    for digits in ["001", "010", "011", "100", "122"] {
        let q = CoherenceQuery::new(params(1.0, 4, 1, 0.3), case(digits), 0.0);
        assert_eq!(coherence_time(&q).unwrap().value, CoherenceValue::Finite(1));
    }
}

#[test]
fn static_location_cases_never_decorrelate() {
    let static_cases: Vec<CaseTriplet> = CaseTriplet::all().filter(|c| c.digits().0 == 2).collect();
    for c in static_cases {
        let q = CoherenceQuery::new(params(1.0, 4, 3, 0.2), c, 0.0);
        assert_eq!(
            coherence_time(&q).unwrap().value,
            CoherenceValue::Infinite,
            "{c}"
        );
    }
}

fn mobile(mobility: Mobility, v: f64, p: f64) -> NetworkParams {
    NetworkParams {
        mobility,
        avg_speed: v,
        start_prob: p,
        ..NetworkParams::default()
    }
}

#[test]
fn linear_mobility_monotone_in_probability_and_speed() {
    let speeds = [0.1, 0.2, 0.3, 0.4, 0.5];
    let probs = [0.1, 0.3, 0.5, 0.7, 0.9];
    let table: Vec<Vec<u32>> = speeds
        .iter()
        .map(|&v| {
            probs
                .iter()
                .map(|&p| {
                    let q = CoherenceQuery::new(mobile(Mobility::Linear, v, p), case("201"), 0.01);
                    finite(coherence_time(&q).unwrap().value)
                })
                .collect()
        })
        .collect();
    for row in &table {
        assert!(row.windows(2).all(|w| w[0] <= w[1]), "{table:?}");
    }
    for j in 0..probs.len() {
        assert!(table.windows(2).all(|w| w[0][j] >= w[1][j]), "{table:?}");
    }
}

#[test]
fn rare_traffic_decorrelates_immediately() {
    for v in [0.1, 0.5] {
        let q = CoherenceQuery::new(mobile(Mobility::Linear, v, 0.005), case("201"), 0.01);
        assert_eq!(coherence_time(&q).unwrap().value, CoherenceValue::Finite(1));
    }
}

#[test]
fn brownian_coherence_not_shorter_than_linear() {
    for v in [0.1, 0.3, 0.5] {
        let linear = CoherenceQuery::new(mobile(Mobility::Linear, v, 0.9), case("201"), 0.01)
            .with_max_lag(1_000_000);
        let brownian = CoherenceQuery::new(mobile(Mobility::Brownian, v, 0.9), case("201"), 0.01)
            .with_max_lag(1_000_000);
        let l = finite(coherence_time(&linear).unwrap().value);
        let b = finite(coherence_time(&brownian).unwrap().value);
        assert!(b >= l, "v={v}: brownian {b} linear {l}");
    }
}

#[test]
fn brownian_search_is_inconclusive_within_default_bound() {
    let q = CoherenceQuery::new(mobile(Mobility::Brownian, 0.1, 0.9), case("201"), 0.01);
    assert_eq!(q.effective_max_lag(), 1000);
    assert_eq!(
        coherence_time(&q).unwrap().value,
        CoherenceValue::Inconclusive(1000)
    );
}
