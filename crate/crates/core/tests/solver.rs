use commonfix::hypothesis::{CheckConfig, NamedMap, Verdict};
use commonfix::solver::{solve_common_fixed_point, BoundMode, PairProblem, ProbeStatus, SolveConfig, SolveReport};
use commonfix::{BoxDomain, Map, Metric, Point, Space};
use proptest::prelude::*;

fn space(a: f64, b: f64) -> Space {
    Space::boxed(BoxDomain::interval(a, b).unwrap(), Metric::Euclidean)
}

fn pair(contractor: Map, dominator: Map) -> PairProblem {
    PairProblem::new(NamedMap::new("g", contractor), NamedMap::new("f", dominator))
}

fn solve(p: &PairProblem, s: &Space, x0: f64) -> SolveReport {
    let cfg = SolveConfig::new(Point::scalar(x0).unwrap());
    let attempt = solve_common_fixed_point(p, s, &CheckConfig::default(), &cfg);
    assert_eq!(
        attempt.hypotheses.verdict(),
        Verdict::Pass,
        "{:?}",
        attempt.hypotheses.failures()
    );
    attempt.result.expect("solve")
}

fn assert_envelopes(r: &SolveReport) {
    let k = r.k_used;
    for t in &r.trace_a {
        assert!(
            t.step <= r.s_hat * k.powi(t.n as i32 - 1) * (1.0 + 1e-9),
            "stage A step {}",
            t.n
        );
    }
    for t in &r.trace_b {
        assert!(
            t.step <= r.c_hat * k.powf((t.n - 1) as f64 / 2.0) * (1.0 + 1e-9),
            "stage B step {}",
            t.n
        );
    }
    assert_eq!(r.envelope_violations_a, 0);
    assert_eq!(r.envelope_violations_b, 0);
}

#[test]
fn geometric_pair_bound_matches_remaining_distance() {
    for a in [0.5_f64, 0.25, -0.5, 0.9] {
        let g = Map::parse(&format!("{a}*x"), 1).unwrap();
        let s = space(-1.0, 1.0);
        let r = solve(&pair(g, Map::identity(1)), &s, 1.0);
        // with the margin the bound is inflated; recompute with the exact constant
        let exact = commonfix::solver::stage_a(
            &Map::identity(1),
            &Map::parse(&format!("{a}*x"), 1).unwrap(),
            &s,
            &SolveConfig::new(Point::scalar(1.0).unwrap()),
            a.abs(),
        )
        .unwrap();
        for t in &exact.trace {
            let remaining = a.abs().powi(t.n as i32);
            assert!(t.apriori >= remaining * (1.0 - 1e-12));
            // tight when the orbit approaches monotonically
            if a > 0.0 {
                assert!((t.apriori - remaining).abs() <= 1e-12 * remaining);
            }
        }
        assert!(r.l1[0].abs() <= 1e-10);
    }
}

#[test]
fn banach_reduction_follows_the_plain_picard_orbit() {
    let cos = Map::parse("cos(x)", 1).unwrap();
    let s = space(0.0, 1.0);
    let r = solve(&pair(cos.clone(), Map::identity(1)), &s, 0.0);
    let mut x = Point::scalar(0.0).unwrap();
    for _ in 0..r.iters_a {
        x = cos.apply(&x).unwrap();
    }
    assert_eq!(x, r.l);
    for _ in 0..r.iters_b {
        x = cos.apply(&x).unwrap();
    }
    assert!(s.dist(&x, &r.l1) <= 1e-10);
    assert_envelopes(&r);
}

#[test]
fn starting_at_the_answer_stays_put() {
    let s = space(-1.0, 1.0);
    let p = pair(Map::parse("x/4", 1).unwrap(), Map::parse("x/2", 1).unwrap());
    let r = solve(&p, &s, 0.0);
    assert_eq!(r.l1[0], 0.0);
    assert_eq!(r.iters_b, 0);
}

#[test]
fn apriori_mode_is_reported_and_stops() {
    let s = space(0.0, 1.0);
    let p = pair(Map::parse("cos(x)", 1).unwrap(), Map::identity(1));
    let mut cfg = SolveConfig::new(Point::scalar(0.0).unwrap());
    cfg.bound_mode = BoundMode::Apriori;
    let r = solve_common_fixed_point(&p, &s, &CheckConfig::default(), &cfg)
        .result
        .unwrap();
    assert_eq!(r.bound_mode, BoundMode::Apriori);
    assert!(r.bound_a <= cfg.tol && r.bound_b <= cfg.tol);
    assert!(r.aposteriori_a <= r.apriori_a);
}

#[test]
fn probe_agrees_for_the_linear_pair() {
    let s = space(-1.0, 1.0);
    let p = pair(Map::parse("x/4", 1).unwrap(), Map::parse("x/2", 1).unwrap());
    let r = solve(&p, &s, 1.0);
    let probe = r.unique_probe.unwrap();
    assert_eq!(probe.status, ProbeStatus::Passed);
    assert!(probe.distance.unwrap() <= 2e-8);
}

fn generator() -> impl Strategy<Value = (String, f64, f64)> {
    prop_oneof![
        (-1.0..1.0f64).prop_map(|c| (format!("x/2 + ({c})"), 2.0 * c - 2.0, 2.0 * c + 2.0)),
        Just(("cos(x)".to_string(), 0.0, 1.0)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn successful_solves_certify_and_respect_envelopes(
        (src, lo, hi) in generator(),
        i in 1u32..3,
        extra in 1u32..3,
        t in 0.0..1.0f64,
    ) {
        let s = space(lo, hi);
        let a = Map::parse(&src, 1).unwrap();
        let p = pair(Map::iterate(a.clone(), i + extra), Map::iterate(a, i));
        let r = solve(&p, &s, lo + t * (hi - lo));
        assert_envelopes(&r);
        // residuals recomputed from scratch
        let rf = s.dist(&p.dominator.map.apply(&r.l1).unwrap(), &r.l1);
        let rg = s.dist(&p.contractor.map.apply(&r.l1).unwrap(), &r.l1);
        prop_assert!(rf.max(rg) <= 1e-8);
        prop_assert_eq!(rf, r.residual_f);
        prop_assert_eq!(rg, r.residual_g);
        prop_assert!(r.bound_a.is_finite() && r.bound_a >= 0.0);
        prop_assert!(r.bound_b.is_finite() && r.bound_b >= 0.0);
    }
}
