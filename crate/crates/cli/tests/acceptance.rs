//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use commonfix::hypothesis::{estimate_k, CheckConfig, HypothesisReport, NamedMap, Verdict};
use commonfix::solver::{solve_common_fixed_point, PairProblem, ProbeStatus, SolveConfig, SolveReport};
use commonfix::{BoxDomain, Map, Metric, Point, Space};
use commonfix_cli::commands::{cmd_check, cmd_solve};
use commonfix_cli::{load_scenario, parse_scenario, run, Command, Options, Report, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.toml"))
}

fn load(name: &str) -> Scenario {
    load_scenario(&scenario_path(name)).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn solved(r: &Report) -> Result<&SolveReport, String> {
    r.solve
        .as_ref()
        .and_then(|s| s.result.as_ref())
        .filter(|_| r.exit_code == 0)
        .ok_or_else(|| {
            format!(
                "solve exited {} ({:?})",
                r.exit_code,
                r.solve.as_ref().map(|s| &s.failure)
            )
        })
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

/// Bisection on cos(x) - x over [0, 1] down to a 1e-12 bracket.
fn dottie() -> f64 {
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        if m.cos() - m > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Dense-grid maximum of `ratio(x, y)` over distinct grid points of [lo, hi].
fn grid_sup(lo: f64, hi: f64, n: usize, ratio: impl Fn(f64, f64) -> f64) -> f64 {
    let pts: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max(ratio(pts[i], pts[j]));
        }
    }
    best
}

fn power_pair_reproduction() -> Outcome {
    let oracle = grid_sup(1.0, 10.0, 2001, |x, y| (x + y) / (x * x + x * y + y * y));
    ensure((oracle - 2.0 / 3.0).abs() < 2e-3, || format!("grid oracle {oracle}"))?;
    let s = load("example1");
    let (r, t) = timed(|| cmd_solve(&s, false));
    let rep = solved(&r)?;
    let k = rep.k_hat.unwrap_or(f64::NAN);
    ensure((0.6660..=0.6674).contains(&k), || format!("k_hat {k}"))?;
    ensure(rep.l1 == Point::scalar(1.0).unwrap(), || format!("l1 {}", rep.l1))?;
    ensure(rep.residual_f <= 1e-12 && rep.residual_g <= 1e-12, || {
        format!("residuals {} {}", rep.residual_f, rep.residual_g)
    })?;
    ensure(t < Duration::from_secs(1), || format!("runtime {t:?}"))?;
    Ok(format!(
        "l1 = {}, k_hat = {k:.6} (grid oracle {oracle:.6}), residuals {} / {}, {t:.2?}",
        rep.l1, rep.residual_f, rep.residual_g
    ))
}

fn non_self_map_rejection() -> Outcome {
    let s = load("example2_as_printed");
    let (r, t) = timed(|| cmd_check(&s));
    ensure(r.exit_code == 1, || format!("exit {}", r.exit_code))?;
    let h = r.hypotheses.as_ref().ok_or("no hypotheses")?;
    let g = h
        .self_mapping
        .iter()
        .find(|c| c.map == "g")
        .ok_or("no self-map check for g")?;
    let esc = g.escaping.as_ref().ok_or("g reported as a self-map")?;
    let oracle = 0.5 * 1.0_f64.exp().powi(2);
    ensure((esc.image[0] - oracle).abs() <= 1e-3, || {
        format!("witness image {}", esc.image)
    })?;
    let defect = h.commutativity[0].defect.unwrap_or(0.0);
    ensure(defect > 0.0 && h.commutativity[0].verdict == Verdict::Fail, || {
        format!("defect {defect}")
    })?;
    ensure(t < Duration::from_secs(1), || format!("runtime {t:?}"))?;
    Ok(format!(
        "exit 1, g{} = {} (oracle {oracle:.6}), defect {defect:.4}, {t:.2?}",
        esc.x, esc.image[0]
    ))
}

fn banach_reduction() -> Outcome {
    let oracle = dottie();
    let r = cmd_solve(&load("banach_cos"), false);
    let rep = solved(&r)?;
    let err = (rep.l1[0] - oracle).abs();
    ensure(err <= 1e-8, || format!("l1 {} vs {oracle}", rep.l1))?;
    Ok(format!("l1 = {} (bisection {oracle:.13}, |diff| {err:.1e})", rep.l1))
}

const GEOMETRIC: &str = r#"
name = "geometric"
x0 = 1.0
[domain]
lower = -1.0
upper = 1.0
[maps]
id = "identity"
half = "x/2"
[problem]
kind = "pair"
contractor = "half"
dominator = "id"
[numerics]
tol = 1e-10
k_margin = 0.0
"#;

fn bound_tightness() -> Outcome {
    let s = parse_scenario(GEOMETRIC).map_err(|e| e.to_string())?;
    let r = cmd_solve(&s, false);
    let rep = solved(&r)?;
    ensure(rep.k_used == 0.5, || format!("k_used {}", rep.k_used))?;
    let mut worst = 0.0_f64;
    for t in &rep.trace_a {
        let remaining = 0.5_f64.powi(t.n as i32);
        worst = worst.max((t.apriori - remaining).abs() / remaining);
    }
    ensure(worst <= 1e-12, || format!("max relative gap {worst:e}"))?;
    let expected = (1.0 / 1e-10_f64).log2().ceil() as usize;
    ensure(rep.iters_a.abs_diff(expected) <= 1, || {
        format!("iters {} vs {expected}", rep.iters_a)
    })?;
    // the default margin must not change the count by more than one either
    let mut s = s;
    s.numerics.k_margin = None;
    let default = cmd_solve(&s, false);
    let iters = solved(&default)?.iters_a;
    ensure(iters.abs_diff(expected) <= 1, || {
        format!("iters with default margin {iters}")
    })?;
    Ok(format!(
        "{} steps, max relative gap {worst:.1e}, iterations {} (expected {expected} ± 1)",
        rep.trace_a.len(),
        rep.iters_a
    ))
}

struct Generator {
    name: &'static str,
    src: String,
    lo: f64,
    hi: f64,
}

fn generator(rng: &mut ChaCha8Rng) -> Generator {
    match rng.gen_range(0..3) {
        0 => {
            let c: f64 = rng.gen_range(-1.0..1.0);
            Generator {
                name: "x/2+c",
                src: format!("x/2 + ({c})"),
                lo: 2.0 * c - 2.0,
                hi: 2.0 * c + 2.0,
            }
        }
        1 => Generator {
            name: "cos",
            src: "cos(x)".into(),
            lo: 0.0,
            hi: 1.0,
        },
        _ => Generator {
            name: "x*exp(-x)",
            src: "x*exp(-x)".into(),
            lo: 0.0,
            hi: 1.0,
        },
    }
}

/// `d(gⁿx, gⁿy) <= k_hatⁿ d(fⁿx, fⁿy) + 1e-9 (1 + d(fⁿx, fⁿy))` for n = 1..8.
fn power_envelope_violations(g: &Map, f: &Map, k: f64, space: &Space, seed: u64) -> usize {
    let pts = space.domain.sample(12, seed);
    let mut bad = 0;
    for n in 1..=8u32 {
        let gn = Map::iterate(g.clone(), n);
        let fn_ = Map::iterate(f.clone(), n);
        let gi: Vec<Point> = pts.iter().map(|p| gn.apply(p).unwrap()).collect();
        let fi: Vec<Point> = pts.iter().map(|p| fn_.apply(p).unwrap()).collect();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d = space.dist(&fi[a], &fi[b]);
                if space.dist(&gi[a], &gi[b]) > k.powi(n as i32) * d + 1e-9 * (1.0 + d) {
                    bad += 1;
                }
            }
        }
    }
    bad
}

fn trace_envelope_violations(r: &SolveReport) -> usize {
    let k = r.k_used;
    let a = r
        .trace_a
        .iter()
        .filter(|t| t.step > r.s_hat * k.powi(t.n as i32 - 1) * (1.0 + 1e-9))
        .count();
    let b = r
        .trace_b
        .iter()
        .filter(|t| t.step > r.c_hat * k.powf((t.n - 1) as f64 / 2.0) * (1.0 + 1e-9))
        .count();
    a + b + r.envelope_violations_a + r.envelope_violations_b
}

fn envelope_suites() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut power, mut traces, mut solved_pairs, mut checked_only) = (0, 0, 0, 0);
    let mut by_gen = std::collections::BTreeMap::new();
    for case in 0..50u64 {
        let gen = generator(&mut rng);
        let i: u32 = rng.gen_range(1..=3);
        let j: u32 = i + rng.gen_range(1..=2);
        let t: f64 = rng.gen();
        *by_gen.entry(gen.name).or_insert(0) += 1;
        let space = Space::boxed(BoxDomain::interval(gen.lo, gen.hi).unwrap(), Metric::Euclidean);
        let a = Map::parse(&gen.src, 1).unwrap();
        let g = NamedMap::new(format!("a^{j}"), Map::iterate(a.clone(), j));
        let f = NamedMap::new(format!("a^{i}"), Map::iterate(a, i));
        let check = CheckConfig {
            n_samples: 1024,
            seed: case,
            ..CheckConfig::default()
        };
        let x0 = Point::scalar(gen.lo + t * (gen.hi - gen.lo)).unwrap();
        let h = HypothesisReport::for_pair(&g, &f, None, &[], &x0, &space, &check);
        if h.commutativity[0].defect != Some(0.0) {
            return Err(format!("case {case}: iterates of {} do not commute exactly", gen.name));
        }
        let k = estimate_k(&g.map, &f.map, &space, &check).unwrap().k_hat;
        power += power_envelope_violations(&g.map, &f.map, k, &space, case);
        if h.verdict() != Verdict::Pass {
            // x*exp(-x) is not a strict contraction near its fixed point 0
            checked_only += 1;
            continue;
        }
        let cfg = SolveConfig::new(x0);
        let attempt = solve_common_fixed_point(&PairProblem::new(g, f), &space, &check, &cfg);
        let rep = attempt.result.map_err(|e| format!("case {case} ({}): {e}", gen.name))?;
        traces += trace_envelope_violations(&rep);
        solved_pairs += 1;
    }
    let t = start.elapsed();
    ensure(power == 0 && traces == 0, || {
        format!("power-envelope violations {power}, trace violations {traces}")
    })?;
    ensure(t < Duration::from_secs(30), || format!("runtime {t:?}"))?;
    Ok(format!(
        "50 pairs {by_gen:?}: power envelope 0 violations; {solved_pairs} solved with 0 trace violations; \
         {checked_only} rejected by the contraction check (power envelope only); {t:.2?}"
    ))
}

fn uniqueness_probe() -> Outcome {
    let mut lines = Vec::new();
    for name in ["banach_cos", "linear_pair"] {
        let s = load(name);
        let tol_cert = s.solve_config().tol_cert;
        let r = cmd_solve(&s, false);
        let rep = solved(&r)?;
        let probe = rep.unique_probe.as_ref().ok_or("no probe")?;
        let d = probe.distance.unwrap_or(f64::INFINITY);
        ensure(probe.status == ProbeStatus::Passed && d <= 2.0 * tol_cert, || {
            format!("{name}: probe {:?} distance {d}", probe.status)
        })?;
        lines.push(format!(
            "{name}: starts {} and {} agree to {d:.1e}",
            rep.x0, probe.second_start
        ));
    }
    Ok(lines.join("; "))
}

fn chain_constants() -> Outcome {
    let o1 = grid_sup(1.0, 2.0, 2001, |x, y| 1.0 / (x * x + y * y));
    let o2 = grid_sup(1.0, 2.0, 2001, |x, y| 1.0 / (x.powi(4) + y.powi(4)));
    ensure((o1 - 0.5).abs() < 1e-3 && (o2 - 0.5).abs() < 1e-3, || {
        format!("grid oracles {o1} {o2}")
    })?;
    let s = load("chain_powers");
    let margin = s.check_config().k_margin;
    let r = cmd_solve(&s, false);
    let rep = solved(&r)?;
    ensure(rep.l1 == Point::scalar(1.0).unwrap(), || format!("l1 {}", rep.l1))?;
    let c = rep.chain.as_ref().ok_or("no chain constants")?;
    let range = 0.498..=0.502 + margin;
    ensure(range.contains(&c.k_hg) && range.contains(&c.k_gf), || {
        format!("constants {} {}", c.k_hg, c.k_gf)
    })?;
    Ok(format!(
        "l1 = {}, k(h,g) = {:.6}, k(g,f) = {:.6} (grid oracles {o1:.6}, {o2:.6}), product {:.6}",
        rep.l1, c.k_hg, c.k_gf, c.k_chain
    ))
}

fn determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    let opts = Options::default();
    let mut runs = 0;
    for p in &paths {
        let s = load_scenario(p).map_err(|e| e.to_string())?;
        let mut cmds = vec![Command::Check, Command::Certify { point: "1".into() }];
        cmds.push(match s.problem {
            commonfix_cli::Problem::Expansive { .. } => Command::Scan,
            _ => Command::Solve,
        });
        for cmd in cmds {
            let a = run(&cmd, p, &opts).to_json();
            let b = run(&cmd, p, &opts).to_json();
            ensure(a == b, || {
                format!("{} {} differs between runs", p.display(), cmd.name())
            })?;
            runs += 1;
        }
    }
    // the binary too, end to end
    let bin = env!("CARGO_BIN_EXE_commonfix");
    let example = scenario_path("example1");
    let out = || {
        std::process::Command::new(bin)
            .args(["solve", example.to_str().unwrap(), "--no-timestamp", "--seed", "3"])
            .output()
            .unwrap()
            .stdout
    };
    ensure(out() == out(), || "binary output differs".into())?;
    Ok(format!(
        "{} scenarios, {runs} command pairs byte-identical",
        paths.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("power pair reproduction", power_pair_reproduction),
        ("non-self-map rejection", non_self_map_rejection),
        ("banach reduction", banach_reduction),
        ("bound tightness on the geometric pair", bound_tightness),
        ("envelope property suites", envelope_suites),
        ("uniqueness probe", uniqueness_probe),
        ("chain constants", chain_constants),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
