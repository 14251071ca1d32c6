//! Acceptance suite. Each criterion runs one documented CLI invocation,
//! checks its record against pinned tolerances, cross-checks it with an
//! independent oracle, and prints a single PASS/FAIL line.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::Value;

use alphageom::families::AffineChart;
use alphageom::manifold::{family_frame, OperatorBasis, StateMatrix, TangentVector};
use alphageom::matrix_core::{Hermitian, Power};
use alphageom::metrics::{builtin_functions, metric_eval, metric_matrix, relative_entropy, MonotoneFunction};
use alphageom::random;

struct Invocation {
    args: Vec<String>,
    stdout: String,
    code: i32,
    elapsed: Duration,
}

impl Invocation {
    fn records(&self) -> Vec<Value> {
        self.stdout.lines().map(|l| serde_json::from_str(l).expect("record line is JSON")).collect()
    }

    fn cases(&self) -> Vec<Value> {
        self.records().into_iter().filter(|r| r["kind"] == "case").collect()
    }
}

fn cli(args: &str) -> Invocation {
    let args: Vec<String> = args.split_whitespace().map(String::from).collect();
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_alphageom"))
        .args(&args)
        .output()
        .expect("binary runs");
    Invocation {
        args,
        stdout: String::from_utf8(out.stdout).expect("utf-8 output"),
        code: out.status.code().unwrap_or(-1),
        elapsed: start.elapsed(),
    }
}

fn num(case: &Value, field: &str) -> f64 {
    case[field].as_f64().unwrap_or_else(|| panic!("missing numeric field {field} in {case}"))
}

fn max_field(cases: &[Value], field: &str) -> f64 {
    cases.iter().map(|c| num(c, field)).fold(f64::NEG_INFINITY, f64::max)
}

fn min_field(cases: &[Value], field: &str) -> f64 {
    cases.iter().map(|c| num(c, field)).fold(f64::INFINITY, f64::min)
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(outcome: &mut Outcome, ok: bool, what: String) {
    outcome.passed &= ok;
    if !outcome.detail.is_empty() {
        outcome.detail.push_str("; ");
    }
    outcome.detail.push_str(&what);
    if !ok {
        outcome.detail.push_str(" [violated]");
    }
}

fn timed(outcome: &mut Outcome, runs: &[&Invocation], limit_s: f64) {
    let total: f64 = runs.iter().map(|r| r.elapsed.as_secs_f64()).sum();
    check(outcome, total < limit_s, format!("{total:.2} s < {limit_s} s"));
    for r in runs {
        check(outcome, r.code == 0, format!("`{}` exit {}", r.args.join(" "), r.code));
    }
}

fn fresh() -> Outcome {
    Outcome {
        passed: true,
        detail: String::new(),
    }
}

/// `ℓ_α(σ)` computed from its own eigendecomposition.
fn embed(sigma: &Hermitian, alpha: f64) -> Hermitian {
    let spec = sigma.spectrum();
    if alpha == 1.0 {
        spec.apply(&alphageom::matrix_core::Log).unwrap()
    } else {
        spec.apply(&Power::scaled(0.5 * (1.0 - alpha), 2.0 / (1.0 - alpha))).unwrap()
    }
}

/// `Tr(A^(α) B^(−α))` with both representations from central differences
/// of the embedding along the line `ρ + tA`.
fn wyd_by_differences(rho: &Hermitian, a: &Hermitian, b: &Hermitian, alpha: f64) -> f64 {
    let h = 1e-5;
    let rep = |dir: &Hermitian, al: f64| {
        (&embed(&(rho + &dir.scaled(h)), al) - &embed(&(rho - &dir.scaled(h)), al)).scaled(0.5 / h)
    };
    rep(a, alpha).trace_product(&rep(b, -alpha))
}

fn criterion_1(runs: &mut Vec<Invocation>) -> Outcome {
    let r = cli("metric-table --metric wyd --alpha=-0.9,-0.5,0,0.5,0.9 --dim 2,3,4 --trials 50 --seed 7");
    let mut o = fresh();
    let cases = r.cases();
    check(&mut o, cases.len() == 15, format!("{} cases", cases.len()));
    let worst = max_field(&cases, "max-relative-direct");
    check(&mut o, worst <= 1e-8, format!("kernel vs direct rel {worst:.2e} <= 1e-8"));
    let mut oracle = 0.0f64;
    for k in 0..5 {
        let mut rng = random::stream(11, k);
        let rho = random::state(&mut rng, 3);
        let a = random::state_tangent(&mut rng, &rho);
        let b = random::state_tangent(&mut rng, &rho);
        for alpha in [-0.5, 0.0, 0.5] {
            let f = MonotoneFunction::wyd_alpha(alpha).unwrap();
            let kernel = metric_eval(&rho, &f, &a, &b).unwrap();
            let fd = wyd_by_differences(rho.matrix(), a.mixture(), b.mixture(), alpha);
            oracle = oracle.max((kernel - fd).abs() / kernel.abs().max(1.0));
        }
    }
    check(&mut o, oracle <= 1e-6, format!("difference oracle {oracle:.2e} <= 1e-6"));
    timed(&mut o, &[&r], 10.0);
    runs.push(r);
    o
}

fn criterion_2(runs: &mut Vec<Invocation>) -> Outcome {
    let r = cli("duality --dim 2,3 --alpha=-1,-0.5,0,0.5,1 --metric wyd --space both --seed 7");
    let mut o = fresh();
    let cases = r.cases();
    check(&mut o, cases.len() == 20, format!("{} cases", cases.len()));
    let worst = max_field(&cases, "defect");
    check(&mut o, worst <= 5e-5, format!("max defect {worst:.2e} <= 5e-5"));
    let bkm = cases.iter().filter(|c| c["metric"] == "bkm").count();
    check(&mut o, bkm == 8, format!("{bkm} BKM cases at alpha = +-1"));
    // transports along a curve give an independent view of the same duality
    let t = cli("transport-duality --dim 2,3 --alpha=-0.5,0,0.5 --metric wyd --space both --seed 7");
    let dev = max_field(&t.cases(), "deviation");
    check(&mut o, dev <= 1e-4, format!("transport oracle {dev:.2e} <= 1e-4"));
    timed(&mut o, &[&r, &t], 60.0);
    runs.push(r);
    runs.push(t);
    o
}

fn criterion_3(runs: &mut Vec<Invocation>) -> Outcome {
    let r = cli("duality --family witness --space states --metric bures,rld,bkm,wyd:0.75 --alpha=-0.5,0,0.5 --seed 7");
    let mut o = fresh();
    let cases = r.cases();
    let pick = |metric: &str, alphas: &[f64]| -> f64 {
        cases
            .iter()
            .filter(|c| c["metric"] == metric && alphas.contains(&num(c, "alpha")))
            .map(|c| num(c, "defect"))
            .fold(f64::INFINITY, f64::min)
    };
    for (metric, alphas) in [
        ("bures", &[0.0][..]),
        ("rld", &[0.0][..]),
        ("bkm", &[-0.5, 0.5][..]),
        ("wyd(p=0.75)", &[0.0][..]),
    ] {
        let d = pick(metric, alphas);
        check(&mut o, d >= 1e-2, format!("{metric} {d:.3e} >= 1e-2"));
    }
    // the same p = 0.75 function is dual once α matches
    let matched = pick("wyd(p=0.75)", &[0.5]);
    check(&mut o, matched <= 5e-5, format!("matched wyd {matched:.1e} <= 5e-5"));
    timed(&mut o, &[&r], 60.0);
    runs.push(r);
    o
}

fn criterion_4(runs: &mut Vec<Invocation>) -> Outcome {
    let r = cli("potential --dim 2 --alpha=-0.5,0,0.5 --seed 7");
    let mut o = fresh();
    let cases = r.cases();
    check(&mut o, cases.len() == 3, format!("{} cases", cases.len()));
    let h = max_field(&cases, "hessian-residual");
    let a = max_field(&cases, "affine-residual");
    check(&mut o, h <= 1e-5, format!("hessian {h:.2e} <= 1e-5"));
    check(&mut o, a <= 1e-6, format!("affine fit {a:.2e} <= 1e-6"));
    // at α = 0, Ψ̃ = ½ ξᵀ G ξ with the Pauli Gram matrix G = 2I
    let basis = OperatorBasis::pauli();
    let chart = AffineChart::new(0.0, basis.elements().to_vec()).unwrap();
    let (base, frame) = family_frame(&chart, &[1.3, 0.2, -0.35, 0.1]).unwrap();
    let g = metric_matrix(&base, &MonotoneFunction::wyd(0.5).unwrap(), &frame).unwrap();
    let closed = (g - nalgebra::DMatrix::<f64>::identity(4, 4) * 2.0).amax();
    check(&mut o, closed <= 1e-10, format!("closed form {closed:.1e} <= 1e-10"));
    timed(&mut o, &[&r], 30.0);
    runs.push(r);
    o
}

fn criterion_5(runs: &mut Vec<Invocation>) -> Outcome {
    let r = cli("flatness --alpha=-1,-0.5,0,0.5,1 --dim 2 --seed 7");
    let mut o = fresh();
    let cases = r.cases();
    let flat = max_field(&cases, "affine-residual");
    check(&mut o, flat <= 1e-6, format!("affine derivative {flat:.2e} <= 1e-6"));
    let at = |alpha: f64| {
        cases
            .iter()
            .find(|c| num(c, "alpha") == alpha)
            .map(|c| num(c, "path-dependence"))
            .unwrap()
    };
    let curved = at(0.0);
    check(&mut o, curved >= 1e-3, format!("path dependence at 0 {curved:.3e} >= 1e-3"));
    // ±1 connections are flat on states, so the same path pair must agree
    let ends = at(1.0).max(at(-1.0));
    check(&mut o, ends <= 1e-8, format!("flat-end oracle {ends:.1e} <= 1e-8"));
    timed(&mut o, &[&r], 30.0);
    runs.push(r);
    o
}

fn criterion_6(runs: &mut Vec<Invocation>) -> Outcome {
    let r = cli("monotonicity --metric wyd:0.2,wyd:0.5,wyd:0.8,bkm,bures,rld --dim 2,3,4 --trials 1000 --seed 7");
    let mut o = fresh();
    let cases = r.cases();
    check(&mut o, cases.len() == 18, format!("{} cases", cases.len()));
    let m = min_field(&cases, "min-margin").min(min_field(&cases, "min-margin-depolarizing"));
    check(&mut o, m >= -1e-9, format!("min margin {m:.2e} >= -1e-9"));
    let share = min_field(&cases, "strict-share-depolarizing");
    check(&mut o, share >= 0.99, format!("strict share {share:.3} >= 0.99"));
    timed(&mut o, &[&r], 120.0);
    runs.push(r);
    o
}

fn criterion_7(runs: &mut Vec<Invocation>) -> Outcome {
    let r = cli("convexity-failure --alpha=-0.5,0,0.5 --seed 7");
    let mut o = fresh();
    let cases = r.cases();
    let classical = max_field(&cases, "classical-difference");
    let fisher = max_field(&cases, "fisher-deviation").max(max_field(&cases, "alpha-spread"));
    let quantum = min_field(&cases, "quantum-difference");
    check(&mut o, fisher <= 1e-9, format!("fisher {fisher:.1e} <= 1e-9"));
    check(&mut o, classical <= 1e-8, format!("classical {classical:.1e} <= 1e-8"));
    check(&mut o, quantum >= 1e-4, format!("quantum {quantum:.3e} >= 1e-4"));
    // Σ a_k b_k / p_k straight from the diagonal entries
    let p = [0.5, 0.3, 0.2];
    let (a, b) = ([0.1, -0.3, 0.2], [-0.2, 0.05, 0.15]);
    let fisher_ab: f64 = (0..3).map(|k| a[k] * b[k] / p[k]).sum();
    let rho = StateMatrix::from_diagonal(&p).unwrap();
    let ta = TangentVector::at_state(&rho, Hermitian::diagonal(&a)).unwrap();
    let tb = TangentVector::at_state(&rho, Hermitian::diagonal(&b)).unwrap();
    let worst = builtin_functions(&[0.1, 0.5, 0.9])
        .unwrap()
        .iter()
        .map(|f| (metric_eval(&rho, f, &ta, &tb).unwrap() - fisher_ab).abs())
        .fold(0.0, f64::max);
    check(&mut o, worst <= 1e-12, format!("diagonal oracle {worst:.1e} <= 1e-12"));
    timed(&mut o, &[&r], 30.0);
    runs.push(r);
    o
}

fn criterion_8(runs: &mut Vec<Invocation>) -> Outcome {
    let r = cli("entropy-projection --dim 3 --trials 20 --step 1e-2 --seed 7");
    let mut o = fresh();
    let cases = r.cases();
    let projections: Vec<Value> = cases.iter().filter(|c| c["converged"].is_boolean()).cloned().collect();
    check(&mut o, projections.len() == 20, format!("{} projections", projections.len()));
    let mean = max_field(&projections, "mean-residual");
    let orth = max_field(&projections, "orthogonality-residual");
    check(&mut o, mean <= 1e-7, format!("means {mean:.1e} <= 1e-7"));
    check(&mut o, orth <= 1e-6, format!("orthogonality {orth:.1e} <= 1e-6"));
    let taylor: Vec<Value> = cases.iter().filter(|c| c["half-bkm"].is_number()).cloned().collect();
    let res = max_field(&taylor, "residual");
    check(&mut o, res <= 1e-4, format!("taylor {res:.1e} <= 1e-4 at t=1e-2"));
    // commuting oracle: Σ p log(p/q) against ½ t² Σ d² / p
    let p = [0.5, 0.3, 0.2];
    let d = [0.4, -0.1, -0.3];
    let t = 1e-2;
    let q: Vec<f64> = (0..3).map(|k| p[k] + t * d[k]).collect();
    let kl: f64 = (0..3).map(|k| p[k] * (p[k] / q[k]).ln()).sum();
    let half: f64 = 0.5 * t * t * (0..3).map(|k| d[k] * d[k] / p[k]).sum::<f64>();
    let lib = relative_entropy(
        &StateMatrix::from_diagonal(&p).unwrap(),
        &StateMatrix::from_diagonal(&q).unwrap(),
    )
    .unwrap();
    check(&mut o, (lib - kl).abs() <= 1e-14, format!("KL oracle {:.1e}", (lib - kl).abs()));
    check(&mut o, (kl - half).abs() <= 1e-4, format!("classical taylor {:.1e}", (kl - half).abs()));
    timed(&mut o, &[&r], 30.0);
    runs.push(r);
    o
}

fn strip_clock(stdout: &str) -> String {
    stdout
        .lines()
        .map(|l| match l.find("\"wall-clock-seconds\":") {
            Some(i) if l.contains("\"kind\":\"summary\"") => &l[..i],
            _ => l,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_9(runs: &[Invocation]) -> Outcome {
    let mut o = fresh();
    let mut identical = 0;
    for first in runs {
        let again = cli(&first.args.join(" "));
        if strip_clock(&first.stdout) == strip_clock(&again.stdout) && !first.stdout.is_empty() {
            identical += 1;
        } else {
            check(&mut o, false, format!("`{}` differs", first.args.join(" ")));
        }
    }
    check(&mut o, identical == runs.len(), format!("{identical}/{} reruns byte-identical", runs.len()));
    o
}

fn main() -> ExitCode {
    let mut runs = Vec::new();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("1 kernel-direct WYD equivalence", criterion_1(&mut runs)),
        ("2 duality of paired metrics", criterion_2(&mut runs)),
        ("3 falsification of mismatched pairs", criterion_3(&mut runs)),
        ("4 potential and dual coordinates", criterion_4(&mut runs)),
        ("5 flatness and path dependence", criterion_5(&mut runs)),
        ("6 monotonicity under channels", criterion_6(&mut runs)),
        ("7 classical reduction", criterion_7(&mut runs)),
        ("8 entropy projection", criterion_8(&mut runs)),
    ];
    let nine = criterion_9(&runs);
    let mut failures = 0;
    for (name, o) in criteria.iter().chain(std::iter::once(&("9 determinism", nine))) {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag} ({})", o.detail);
        failures += (!o.passed) as usize;
    }
    if failures == 0 {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria fail");
        ExitCode::FAILURE
    }
}
