use std::io::Write;

use cournot_lab::{
    best_response_homogeneous, nash_homogeneous, unbeatable_homogeneous, verify_condition_c,
    DemandModel, MarketParams, NashOptions, SolveMethod, Table,
};

/// Alternating best responses restricted to a 1e-5 grid on [0, 1].
/// Profit is negative beyond ln 2 for c = 0.5, so the range covers every
/// best response.
fn grid_nash_oracle(c: f64) -> (f64, f64) {
    let n = 100_000;
    let profit = |q: f64, other: f64| q * (-(q + other)).exp() - c * q;
    let best = |other: f64| {
        let mut arg = 0.0;
        let mut val = profit(0.0, other);
        for i in 1..=n {
            let q = i as f64 / n as f64;
            let v = profit(q, other);
            if v > val {
                arg = q;
                val = v;
            }
        }
        arg
    };
    let (mut q1, mut q2) = (0.25, 0.25);
    for _ in 0..200 {
        let n1 = best(q2);
        let n2 = best(n1);
        if n1 == q1 && n2 == q2 {
            break;
        }
        q1 = n1;
        q2 = n2;
    }
    (q1, q2)
}

#[test]
fn exponential_nash_matches_grid_oracle() {
    let d = DemandModel::exponential(1.0).unwrap();
    let (o1, o2) = grid_nash_oracle(0.5);
    assert!((o1 - o2).abs() <= 2e-5, "oracle not symmetric: {o1} {o2}");
    let s = nash_homogeneous(&d, 0.5, &NashOptions::default()).unwrap();
    assert_eq!(s.method, SolveMethod::Iterative);
    assert!(
        (s.q_hat - o1).abs() <= 3e-5,
        "solver {} oracle {o1}",
        s.q_hat
    );
    // frozen from the oracle: root of e^{-2q}(1 - q) = 1/2
    assert!(
        (s.q_hat - 0.221_427_200_5).abs() < 1e-7,
        "q_hat={}",
        s.q_hat
    );
    let br = best_response_homogeneous(&d, 0.5, s.q_hat, 10.0, 1e-8).unwrap();
    assert!((br - s.q_hat).abs() <= 1e-8);
    assert!(s.phi_hat > 0.0);
}

#[test]
fn iterative_agrees_with_linear_formula_across_costs() {
    let d = DemandModel::linear(1.0, 1.0).unwrap();
    let opts = NashOptions::default();
    for i in 1..=9 {
        let c = i as f64 / 10.0;
        let s = nash_homogeneous(&d, c, &opts).unwrap();
        assert!(
            (s.q_hat - (1.0 - c) / 3.0).abs() <= 10.0 * opts.tol,
            "c={c}: {}",
            s.q_hat
        );
    }
}

#[test]
fn tabulated_demand_from_csv_file() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    // samples of P(Q) = 1 - Q
    writeln!(file, "q,p").unwrap();
    for i in 0..=10 {
        let q = i as f64 / 10.0;
        writeln!(file, "{q},{}", 1.0 - q).unwrap();
    }
    file.flush().unwrap();
    let d = DemandModel::Tabulated(Table::from_csv_path(file.path()).unwrap());
    let report = verify_condition_c(&d, 0.5, 5.0).unwrap();
    assert!(report.holds);
    assert_eq!(report.checked_upper_bound, 1.0);

    let s = unbeatable_homogeneous(&d, 0.5, 1e-12).unwrap();
    assert!((s.q_star - 0.25).abs() < 1e-11);
    assert!(s.phi_star.abs() < 1e-9);
    assert!(s.strict);

    let n = nash_homogeneous(&d, 0.5, &NashOptions::default()).unwrap();
    assert!((n.q_hat - 1.0 / 6.0).abs() < 1e-7);
}

#[test]
fn kinked_table_still_has_unbeatable_half_break_even() {
    let d = DemandModel::tabulated(vec![(0.0, 2.0), (0.4, 0.6), (1.0, 0.3), (3.0, 0.0)]).unwrap();
    let s = unbeatable_homogeneous(&d, 0.45, 1e-12).unwrap();
    // 0.6 - 0.3 (q - 0.4) / 0.6 = 0.45  =>  q = 0.7
    assert!((s.total - 0.7).abs() < 1e-11);
    assert!(s.strict);
    let params = MarketParams::homogeneous(d, 0.45).unwrap();
    assert_eq!(params.default_q_max(), 3.0);
}

#[test]
fn single_precision_pipeline() {
    let d = cournot_lab::f32::DemandModel::linear(1.0, 1.0).unwrap();
    let s = unbeatable_homogeneous(&d, 0.5f32, 1e-6).unwrap();
    assert!((s.q_star - 0.25).abs() < 1e-6);
    let r: cournot_lab::f32::ComparisonReport = cournot_lab::compare(0.5f32, 1.0).unwrap();
    assert!((r.output_drop - 1.0 / 3.0).abs() < 1e-6);
    let opts = cournot_lab::equilibrium::NashOptions::<f32> {
        tol: 1e-4,
        ..Default::default()
    };
    let n = nash_homogeneous(&d, 0.5f32, &opts).unwrap();
    assert!((n.q_hat - 1.0 / 6.0).abs() < 1e-3);
}
