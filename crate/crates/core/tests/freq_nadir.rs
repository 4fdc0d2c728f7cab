mod common;

use cfcuc::bernstein::{BernsteinSegment, PiecewiseBernstein};
use cfcuc::cuc::{assemble, CommitmentMatrix, CostBreakdown, Schedule};
use cfcuc::freq::{
    approximation_deviation, minutes_above, nadir_coefficient_approx, nadir_exact, nadir_rational, nadir_sweep, ode_nadir_oracle,
    NadirOutcome, OutageContext,
};
use cfcuc::milp::{ConstraintSense, SolveStatus};
use cfcuc::nadirlearn::NadirModel;
use cfcuc::sysmodel::{approximate_profiles, Mode, SystemParams};
use common::{case, flat, params, unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx(p: f64, r: f64, h: f64, d: f64) -> OutageContext {
    OutageContext {
        lost_unit: 0,
        hour: 0,
        inertia: h,
        lost_power: p,
        reserve: r,
        demand: d,
    }
}

fn params_with(damping: f64) -> SystemParams {
    SystemParams {
        damping,
        ..params(Mode::Cfcuc)
    }
}

#[test]
fn closed_form_hand_values() {
    let damped = nadir_exact(&ctx(5.0, 5.0, 100.0, 40.0), &params_with(0.01)).hz();
    assert!((damped - 3750.0 / 1700.0).abs() < 1e-12);
    assert!((damped - 2.2059).abs() < 1e-4);
    let undamped = nadir_exact(&ctx(5.0, 5.0, 100.0, 40.0), &params_with(0.0)).hz();
    assert!((undamped - 1.875).abs() < 1e-12);
    assert_eq!(nadir_exact(&ctx(0.0, 0.0, 0.0, 40.0), &params_with(0.01)), NadirOutcome::Arrested(0.0));
    assert_eq!(nadir_exact(&ctx(5.0, 0.0, 100.0, 40.0), &params_with(0.01)), NadirOutcome::Insecure);
}

#[test]
fn ode_oracle_hand_values() {
    let p = params_with(0.0);
    assert!((ode_nadir_oracle(5.0, 5.0, 100.0, 40.0, &p).unwrap() - 1.875).abs() < 1e-3);
    assert_eq!(ode_nadir_oracle(0.0, 5.0, 100.0, 40.0, &p).unwrap(), 0.0);
    let damped = ode_nadir_oracle(5.0, 5.0, 100.0, 40.0, &params_with(0.01)).unwrap();
    assert!(damped <= 1.875);
    assert!(ode_nadir_oracle(5.0, 5.0, 0.0, 40.0, &p).is_err());
}

fn seg(c: [f64; 4]) -> BernsteinSegment {
    BernsteinSegment::new(0, c.to_vec()).unwrap()
}

#[test]
fn approximation_is_exact_at_endpoints_and_for_constants() {
    let pr = params_with(0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let p = seg([0; 4].map(|_| rng.gen_range(0.5..8.0)));
        let r = seg([0; 4].map(|_| rng.gen_range(4.0..20.0)));
        let d = seg([0; 4].map(|_| rng.gen_range(20.0..40.0)));
        let h = rng.gen_range(50.0..200.0);
        let approx = nadir_coefficient_approx(&p, &r, h, &d, &pr).unwrap();
        for (k, tau) in [(0, 0.0), (3, 1.0)] {
            let exact = nadir_exact(&ctx(p.eval(tau).unwrap(), r.eval(tau).unwrap(), h, d.eval(tau).unwrap()), &pr);
            match (exact, approx[k]) {
                (NadirOutcome::Arrested(a), NadirOutcome::Arrested(b)) => assert!((a - b).abs() <= 1e-12 * a.max(1.0)),
                (a, b) => assert_eq!(a, b),
            }
        }
    }
    let approx = nadir_coefficient_approx(&seg([5.0; 4]), &seg([5.0; 4]), 100.0, &seg([40.0; 4]), &pr).unwrap();
    assert!(approx.iter().all(|o| (o.hz() - 3750.0 / 1700.0).abs() < 1e-12));
    let report = approximation_deviation(&seg([5.0; 4]), &seg([5.0; 4]), 100.0, &seg([40.0; 4]), &pr, 100).unwrap();
    assert!(report.max_abs_deviation_hz < 1e-12);
}

#[test]
fn rational_form_reproduces_the_closed_form() {
    let pr = params_with(0.01);
    let (p, r, d, h) = (seg([6.0, 7.0, 9.0, 10.0]), seg([12.0, 11.0, 9.5, 9.0]), seg([28.0, 29.0, 31.0, 31.5]), 116.0);
    let (num, den) = nadir_rational(&p, &r, h, &d, &pr).unwrap();
    assert_eq!(num.degree(), 6);
    for k in 0..=20 {
        let tau = k as f64 / 20.0;
        let exact = nadir_exact(&ctx(p.eval(tau).unwrap(), r.eval(tau).unwrap(), h, d.eval(tau).unwrap()), &pr).hz();
        let ratio = num.eval(tau).unwrap() / den.eval(tau).unwrap();
        assert!((ratio - exact).abs() <= 1e-9 * exact.max(1.0));
    }
}

#[test]
fn rocof_row_gives_the_hand_bound() {
    let a = unit("A", 1.0, 10.0);
    let mut b = unit("B", 1.0, 10.0);
    b.inertia = 3.0;
    b.base_power = 20.0;
    let mut c = case(vec![a, b], flat(1, 8.0), flat(1, 0.0), Mode::RocofCuc);
    c.params.rocof_limit = 2.0;
    let profiles = approximate_profiles(&c).unwrap();
    let (model, vars) = assemble(&c, &profiles, Mode::RocofCuc, None).unwrap();
    let row = model.constraints().iter().find(|r| r.name == "rocof_0_0_A").unwrap();
    let on_b = row.terms.iter().find(|(v, _)| *v == vars.at(0, 1).u).unwrap().1;
    assert!((-on_b - 4.8).abs() < 1e-12);
    assert_eq!(row.sense, ConstraintSense::Le);
}

#[test]
fn qss_row_gives_the_hand_rhs() {
    let mut c = case(vec![unit("A", 1.0, 10.0), unit("B", 1.0, 10.0)], flat(1, 40.0), flat(1, 0.0), Mode::RocofCuc);
    c.units[0].p_max = 30.0;
    c.units[1].p_max = 30.0;
    c.params.qss_limit = 1.5;
    let profiles = approximate_profiles(&c).unwrap();
    let (model, _) = assemble(&c, &profiles, Mode::RocofCuc, None).unwrap();
    let row = model.constraints().iter().find(|r| r.name == "qss_0_1_A").unwrap();
    assert!((row.rhs - -0.6).abs() < 1e-9);
    // reserve 5 against a 5.2 MW loss: 5 - 5.2 = -0.2 >= -0.6
    assert!(5.0 - 5.2 >= row.rhs);
}

#[test]
fn degenerate_surrogate_caps_output() {
    let c = {
        let mut c = case(vec![unit("A", 1.0, 10.0), unit("B", 1.0, 10.0)], flat(1, 6.0), flat(1, 0.0), Mode::Cfcuc);
        c.params.nadir_limit = 3.0;
        c
    };
    let nm = NadirModel {
        alpha: [0.0, 1.0, 0.0, 0.0],
        threshold: 3.0,
        score: 1.0,
        seed: 0,
        train_fraction: 0.7,
    };
    let profiles = approximate_profiles(&c).unwrap();
    let (model, vars) = assemble(&c, &profiles, Mode::Cfcuc, Some(&nm)).unwrap();
    let row = model.constraints().iter().find(|r| r.name == "nadir_0_2_B").unwrap();
    assert_eq!(row.terms, vec![(vars.at(0, 1).cp[2], 1.0)]);
    assert_eq!(row.rhs, 3.0);
}

/// Unit A (5 MW) backed by B (100 MW s, 5 MW reserve), demand 40 MW.
fn constant_schedule(horizon: usize) -> (cfcuc::sysmodel::CaseInput, Schedule) {
    let a = unit("A", 1.0, 10.0);
    let mut b = unit("B", 1.0, 10.0);
    b.inertia = 5.0;
    b.base_power = 20.0;
    let c = case(vec![a, b], flat(horizon, 40.0), flat(horizon, 0.0), Mode::Cfcuc);
    let constant = |v: f64| PiecewiseBernstein::from_coeffs(vec![vec![v; 4]; horizon]).unwrap();
    let s = Schedule {
        unit_ids: vec!["A".into(), "B".into()],
        commitment: CommitmentMatrix {
            u: vec![vec![1; horizon]; 2],
            v: vec![vec![0; horizon]; 2],
            w: vec![vec![0; horizon]; 2],
        },
        power: vec![constant(5.0), constant(0.0)],
        reserve: vec![constant(0.0), constant(5.0)],
        curtailment: constant(0.0),
        objective: 0.0,
        breakdown: CostBreakdown::default(),
        status: SolveStatus::Optimal,
        gap: None,
    };
    (c, s)
}

#[test]
fn minute_count_on_a_constant_schedule() {
    let (c, s) = constant_schedule(3);
    let profiles = approximate_profiles(&c).unwrap();
    assert_eq!(minutes_above(&s, &profiles, &c, 2.5).unwrap(), 0);
    assert_eq!(minutes_above(&s, &profiles, &c, 2.0).unwrap(), 180);
    let sweep = nadir_sweep(&s, &profiles, &c).unwrap();
    assert!((sweep.worst() - 3750.0 / 1700.0).abs() < 1e-9);
    assert!(sweep.minutes.iter().all(|m| m.worst_unit == Some(0)));
    assert!(sweep.to_csv().starts_with("minute,worst_unit,nadir_hz\n0,A,"));

    let mut off = s.clone();
    off.commitment.u = vec![vec![0; 3]; 2];
    assert_eq!(minutes_above(&off, &profiles, &c, 0.0).unwrap(), 0);
}
