mod common;

use common::{case, params};
use intercorr::analytic::{acf, table1_closed_form, AcfModel};
use intercorr::{CaseTriplet, Mobility, NetworkParams};

const TOL: f64 = 1e-10;

fn grid() -> Vec<NetworkParams> {
    let mut out = Vec::new();
    for m in [0.5, 1.0, 2.0] {
        for c in [2, 7, 14] {
            for d in 1..=6u32 {
                for frac in [0.05, 0.25, 0.5, 0.8, 0.95] {
                    out.push(params(m, c, d, frac / d as f64));
                }
            }
        }
    }
    out
}

/// Cases whose summary row is a formula (everything except the undefined
/// all-constant case).
fn cases_with_rows() -> Vec<CaseTriplet> {
    CaseTriplet::all()
        .filter(|c| c.digits() != (0, 0, 0))
        .collect()
}

#[test]
fn general_acf_matches_every_closed_form() {
    for case in cases_with_rows() {
        let mut compared = 0;
        for pr in grid() {
            let rayleigh_only = matches!(case.digits(), (2, 1, 0) | (2, 1, 1));
            if rayleigh_only && pr.nakagami_m != 1.0 {
                assert!(table1_closed_form(&pr, case, 1).is_none());
                continue;
            }
            for lag in 1..=3 * pr.channel_block_len.max(pr.message_len) {
                let Some(expected) = table1_closed_form(&pr, case, lag) else {
                    continue;
                };
                let got = acf(&pr, case, lag).unwrap();
                assert!(
                    (got - expected).abs() <= TOL,
                    "{case} m={} c={} d={} p={} lag={lag}: {got} vs {expected}",
                    pr.nakagami_m,
                    pr.channel_block_len,
                    pr.message_len,
                    pr.start_prob
                );
                compared += 1;
            }
        }
        let empty_range = matches!(case.digits(), (0, 0, 2) | (0, 1, 2) | (2, 0, 2) | (2, 1, 2));
        assert!(compared > 0 || empty_range, "{case}: nothing compared");
    }
}

#[test]
fn static_location_rows_are_constant() {
    let pr = params(1.0, 3, 1, 0.3);
    assert!((acf(&pr, case("200"), 4).unwrap() - 1.0).abs() < 1e-15);
    assert!((acf(&pr, case("201"), 4).unwrap() - 0.3).abs() < 1e-15);
    assert!((acf(&pr, case("210"), 4).unwrap() - 0.5).abs() < 1e-15);
    assert!((acf(&pr, case("211"), 4).unwrap() - 0.15).abs() < 1e-15);
    // general fading: m / (m + 1)
    let pr = params(2.0, 3, 1, 0.3);
    assert!((acf(&pr, case("210"), 4).unwrap() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn uncorrelated_locations_are_zero() {
    for case in CaseTriplet::all().filter(|c| c.digits().0 == 1) {
        let pr = params(0.7, 5, 3, 0.2);
        for lag in [1, 2, 9] {
            assert_eq!(acf(&pr, case, lag).unwrap(), 0.0);
        }
    }
}

#[test]
fn channel_only_case_decays_linearly() {
    for c in [2u32, 5, 10, 22] {
        let pr = params(1.0, c, 1, 0.5);
        let step = 1.0 / c as f64;
        for lag in 1..c - 1 {
            let a = acf(&pr, case("020"), lag).unwrap();
            let b = acf(&pr, case("020"), lag + 1).unwrap();
            assert!((b - a + step).abs() < 1e-14);
        }
    }
    let pr = params(1.0, 10, 1, 0.5);
    assert!((acf(&pr, case("020"), 5).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn constant_channel_limit_of_fading_case() {
    // c → ∞: p / (1 + m − m p)
    let pr = params(0.5, u32::MAX / 2, 1, 0.9);
    let v = acf(&pr, case("021"), 1).unwrap();
    assert!((v - 0.9 / (1.5 - 0.45)).abs() < 1e-8);
}

#[test]
fn rare_traffic_limit() {
    // p → 0 with τ < d: ρ → (d − τ)/d
    for d in 2..=6u32 {
        let pr = params(1.0, 1, d, 1e-9);
        for lag in 1..d {
            let v = acf(&pr, case("002"), lag).unwrap();
            let limit = (d - lag) as f64 / d as f64;
            assert!((v - limit).abs() < 1e-6, "d={d} lag={lag}: {v}");
        }
    }
}

#[test]
fn known_location_cases_vanish_at_long_lags() {
    for digits in ["001", "002", "011", "012", "020", "021", "022"] {
        let pr = params(1.5, 6, 4, 0.1);
        let v = acf(&pr, case(digits), 50 * 6).unwrap();
        assert!(v.abs() < 1e-3, "{digits}: {v}");
    }
}

#[test]
fn all_correlated_static_case_long_lag_limit() {
    // Channel and traffic both decorrelate, leaving μ m / (m + 1).
    for (m, c, d, p) in [(1.0, 14, 5, 0.1), (2.0, 4, 3, 0.2), (0.5, 7, 6, 0.15)] {
        let pr = params(m, c, d, p);
        let mu = p * d as f64;
        let lag = c.max(d) * 50;
        let v = acf(&pr, case("222"), lag).unwrap();
        assert!((v - mu * m / (m + 1.0)).abs() < 1e-3);
        let model = AcfModel::new(&pr, case("222")).unwrap();
        assert!((model.long_lag_limit() - mu * m / (m + 1.0)).abs() < 1e-15);
    }
}

#[test]
fn traffic_only_heat_map_signs() {
    for d in 2..=11u32 {
        let pr = params(1.0, 1, d, 0.05);
        let curve: Vec<f64> = (1..=3 * d)
            .map(|t| acf(&pr, case("002"), t).unwrap())
            .collect();
        let max = curve.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(curve[0], max, "d={d}");
        assert!(curve[d as usize - 1] < 0.0, "d={d}");
    }
}

#[test]
fn fading_with_uncorrelated_channel_scales_traffic_only_case() {
    // ρ(0,1,2) / ρ(0,0,2) = m (1 − μ) / (m + 1 − m μ), the same for every lag
    for (m, d, p) in [(1.0, 4, 0.2), (0.5, 3, 0.1), (2.0, 6, 0.05)] {
        let pr = params(m, 1, d, p);
        let mu = p * d as f64;
        let ratio = m * (1.0 - mu) / (m + 1.0 - m * mu);
        for lag in 1..=3 * d {
            let a = acf(&pr, case("002"), lag).unwrap();
            let b = acf(&pr, case("012"), lag).unwrap();
            assert!((b - ratio * a).abs() < 1e-12, "m={m} d={d} lag={lag}");
        }
    }
}

#[test]
fn mobile_curves_decay() {
    for mobility in [Mobility::Linear, Mobility::Brownian] {
        let pr = NetworkParams {
            mobility,
            avg_speed: 0.3,
            start_prob: 0.9,
            ..NetworkParams::default()
        };
        let model = AcfModel::new(&pr, case("201")).unwrap();
        let lags: Vec<u32> = (1..=12).collect();
        let curve = model.curve(&lags).unwrap();
        assert!(curve.values.windows(2).all(|w| w[1] < w[0]), "{mobility}");
        assert!(curve.values[0] < 0.9);
    }
}
