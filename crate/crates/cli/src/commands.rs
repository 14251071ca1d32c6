//! One function per subcommand, each turning a config into result cases.

use std::time::Instant;

use alphageom::connections::CurveSpec;
use alphageom::duality_lab::{
    affine_probe, classical_reduction_check, classify, convexity_failure_check, dual_coordinate_check, duality_defect,
    entropy_projection_demo, expected_dual, flatness_check, potential_check, relative_entropy_taylor, scan_candidates,
    transport_duality_check, uniqueness_scan, witness_probe, Candidate, DocumentedFamily, GibbsFamily, Probe, Space,
    Verdict, DEFAULT_GRID_POINTS,
};
use alphageom::manifold::{family_tangent, gell_mann_matrices, OperatorBasis, ParametrizedFamily};
use alphageom::metrics::{
    builtin_functions, bkm_direct, metric_eval, monotonicity_check, wyd_direct, KrausChannel, MonotoneFunction,
};
use alphageom::random;

use crate::config::{metric_function, CommandName, Expect, ExperimentConfig, FamilySel, SpaceSel};
use crate::record::{Case, ExperimentRecord, Status};
use crate::CliError;

/// Largest entrywise gap between the potential Hessian and the metric.
pub const HESSIAN_TOL: f64 = 1e-5;
/// Largest residual of the affine regression of the dual coordinates.
pub const AFFINE_FIT_TOL: f64 = 1e-6;
/// Largest residual of the Jacobian and Legendre checks.
pub const LEGENDRE_TOL: f64 = 1e-5;
/// Largest deviation of the dual potential from its closed form.
pub const DUAL_POTENTIAL_TOL: f64 = 1e-8;
/// Largest ∇̂^(α) derivative of affine coordinate fields.
pub const FLATNESS_TOL: f64 = 1e-6;
/// Smallest transport difference counted as path dependence.
pub const PATH_DEPENDENCE_GAP: f64 = 1e-3;
/// Most negative monotonicity margin attributed to rounding.
pub const MARGIN_FLOOR: f64 = -1e-9;
/// Share of depolarizing samples that must contract strictly.
pub const STRICT_SHARE: f64 = 0.99;
/// Largest relative gap between kernel and direct metric formulas.
pub const KERNEL_DIRECT_TOL: f64 = 1e-8;
/// Largest classical-limit deviation.
pub const CLASSICAL_TOL: f64 = 1e-9;
/// Largest classical convexity defect.
pub const CLASSICAL_CONVEXITY_TOL: f64 = 1e-8;
/// Smallest quantum convexity defect away from `α = ±1`.
pub const CONVEXITY_GAP: f64 = 1e-4;
/// Largest mean mismatch of an entropy projection.
pub const MEAN_TOL: f64 = 1e-7;
/// Largest BKM inner product between `ρ − σ*` and the family tangents.
pub const ORTHOGONALITY_TOL: f64 = 1e-6;
/// Largest gap between relative entropy and half the BKM norm.
pub const TAYLOR_TOL: f64 = 1e-4;

/// Runs one experiment.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentRecord, CliError> {
    let start = Instant::now();
    let cases = match config.command {
        CommandName::Duality => duality(config)?,
        CommandName::TransportDuality => transport_duality(config)?,
        CommandName::Potential => potential(config)?,
        CommandName::UniquenessScan => uniqueness(config)?,
        CommandName::Monotonicity => monotonicity(config)?,
        CommandName::Flatness => flatness(config)?,
        CommandName::ConvexityFailure => convexity(config)?,
        CommandName::EntropyProjection => entropy_projection(config)?,
        CommandName::MetricTable => metric_table(config)?,
    };
    Ok(ExperimentRecord {
        config: config.clone(),
        cases,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION"),
    })
}

fn spaces(c: &ExperimentConfig) -> Vec<Space> {
    match c.space {
        SpaceSel::States => vec![Space::States],
        SpaceSel::Weights => vec![Space::Weights],
        SpaceSel::Both => vec![Space::States, Space::Weights],
    }
}

fn probes(c: &ExperimentConfig, space: Space) -> Result<Vec<Probe>, CliError> {
    match c.family {
        FamilySel::Witness => Ok(vec![witness_probe(space)]),
        FamilySel::Documented => c
            .dim
            .iter()
            .map(|&n| Ok(DocumentedFamily::for_dim(n)?.probe(space, c.seed, DEFAULT_GRID_POINTS)))
            .collect(),
    }
}

fn expectation(c: &ExperimentConfig, f: &MonotoneFunction, alpha: f64) -> bool {
    match c.expect {
        Some(Expect::Dual) => true,
        Some(Expect::NotDual) => false,
        None => expected_dual(f, alpha),
    }
}

fn verdict_status(verdict: Verdict, expect_dual: bool) -> Status {
    match (verdict, expect_dual) {
        (Verdict::Inconclusive, _) => Status::Inconclusive,
        (Verdict::Dual, true) | (Verdict::NotDual, false) => Status::Pass,
        _ => Status::Fail,
    }
}

fn expect_name(dual: bool) -> &'static str {
    if dual {
        Verdict::Dual.name()
    } else {
        Verdict::NotDual.name()
    }
}

fn duality(c: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    let mut cases = Vec::new();
    for space in spaces(c) {
        for probe in probes(c, space)? {
            for m in &c.metric {
                for &alpha in &c.alpha {
                    let f = metric_function(m, alpha)?;
                    let r = duality_defect(&probe.family, &probe.grid, &Candidate::new(f.clone()), alpha, space)?;
                    let expected = expectation(c, &f, alpha);
                    let verdict = classify(r.defect, c.tol, c.gap);
                    cases.push(
                        Case::new(format!("{}/{}/{}/alpha={alpha}", probe.name, space.name(), f.name()))
                            .with("family", probe.name.as_str())
                            .with("space", space.name())
                            .with("metric", f.name())
                            .with("alpha", alpha)
                            .with("defect", r.defect)
                            .with("per-point", r.per_point)
                            .with("verdict", verdict.name())
                            .with("expected", expect_name(expected))
                            .status(verdict_status(verdict, expected)),
                    );
                }
            }
        }
    }
    Ok(cases)
}

fn transport_duality(c: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    let mut cases = Vec::new();
    for space in spaces(c) {
        for &n in &c.dim {
            let documented = DocumentedFamily::for_dim(n)?;
            let fam = documented.build(space);
            let ends = documented.random_grid(space, c.seed, 2);
            let d = fam.param_dim();
            let curve = CurveSpec::segment(&fam, &ends[0], &ends[1], c.steps)?;
            let y = family_tangent(&fam, &ends[0], 0)?;
            let z = family_tangent(&fam, &ends[0], d - 1)?;
            for m in &c.metric {
                for &alpha in &c.alpha {
                    let f = metric_function(m, alpha)?;
                    let r = transport_duality_check(&curve, &Candidate::new(f.clone()), alpha, &y, &z, space, 8)?;
                    let expected = expectation(c, &f, alpha);
                    let verdict = classify(r.deviation, c.tol, c.gap);
                    cases.push(
                        Case::new(format!("{}/{}/{}/alpha={alpha}", documented.name(), space.name(), f.name()))
                            .with("family", documented.name())
                            .with("space", space.name())
                            .with("metric", f.name())
                            .with("alpha", alpha)
                            .with("deviation", r.deviation)
                            .with("times", r.times)
                            .with("values", r.values)
                            .with("verdict", verdict.name())
                            .with("expected", expect_name(expected))
                            .status(verdict_status(verdict, expected)),
                    );
                }
            }
        }
    }
    Ok(cases)
}

fn potential(c: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    let mut cases = Vec::new();
    for (k, &n) in c.dim.iter().enumerate() {
        let basis = OperatorBasis::gell_mann(n);
        for &alpha in &c.alpha {
            let (chart, xi, nearby) = affine_probe(alpha, &basis, c.seed, k as u64, 3 * basis.len())?;
            let r = potential_check(&chart, &basis, &xi, alpha, &nearby)?;
            let mut passed = r.residual <= HESSIAN_TOL && r.affine_residual <= AFFINE_FIT_TOL;
            let mut case = Case::new(format!("N={n}/alpha={alpha}"))
                .with("dim", n)
                .with("alpha", alpha)
                .with("hessian-residual", r.residual)
                .with("affine-residual", r.affine_residual);
            if alpha < 1.0 {
                let d = dual_coordinate_check(&chart, alpha, &xi)?;
                passed &= d.jacobian_residual <= LEGENDRE_TOL
                    && d.legendre_residual <= LEGENDRE_TOL
                    && d.dual_potential_residual <= DUAL_POTENTIAL_TOL;
                case = case
                    .with("jacobian-residual", d.jacobian_residual)
                    .with("legendre-residual", d.legendre_residual)
                    .with("dual-potential-residual", d.dual_potential_residual);
            }
            cases.push(case.status(Status::from_checks(passed, false)));
        }
    }
    Ok(cases)
}

fn uniqueness(c: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    let mut cases = Vec::new();
    for space in spaces(c) {
        let probes = probes(c, space)?;
        for &alpha in &c.alpha {
            let candidates = scan_candidates(alpha, c.seed, c.trials)?;
            let r = uniqueness_scan(alpha, &candidates, &probes, space, c.seed, c.tol, c.gap)?;
            for (e, cand) in r.entries.iter().zip(&candidates) {
                cases.push(
                    Case::new(format!("{}/alpha={alpha}/{}", space.name(), e.name))
                        .with("space", space.name())
                        .with("alpha", alpha)
                        .with("metric", e.name.as_str())
                        .with("scale", e.scale)
                        .with("claimed-monotone", cand.function.claimed_monotone())
                        .with("defect", e.defect)
                        .with("verdict", e.verdict.name())
                        .with("expected", expect_name(e.expected_dual))
                        .status(verdict_status(e.verdict, e.expected_dual)),
                );
            }
            cases.push(
                Case::new(format!("{}/alpha={alpha}/scan", space.name()))
                    .with("space", space.name())
                    .with("alpha", alpha)
                    .with("paired-dual", r.wyd_dual)
                    .with("others-not-dual", r.others_not_dual)
                    .with("paired-minimal", r.wyd_minimal)
                    .status(Status::from_checks(r.passed(), r.any_inconclusive)),
            );
        }
    }
    Ok(cases)
}

/// Metric functions at each α; functions that do not depend on α are
/// listed once.
fn functions(c: &ExperimentConfig) -> Result<Vec<MonotoneFunction>, CliError> {
    let mut out: Vec<MonotoneFunction> = Vec::new();
    for &alpha in &c.alpha {
        for m in &c.metric {
            let f = metric_function(m, alpha)?;
            if !out.iter().any(|g| g.name() == f.name()) {
                out.push(f);
            }
        }
    }
    Ok(out)
}

fn monotonicity(c: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    let fs = functions(c)?;
    let mut cases = Vec::new();
    for &n in &c.dim {
        for f in &fs {
            let mut min_margin = f64::INFINITY;
            let mut min_depolarizing = f64::INFINITY;
            let mut strict = 0usize;
            let mut regularized = 0usize;
            let mut inconclusive = 0usize;
            for k in 0..c.trials {
                let mut rng = random::stream(c.seed, k as u64);
                let rho = random::state(&mut rng, n);
                let a = random::state_tangent(&mut rng, &rho);
                let channel = if n == 4 && k % 3 == 2 {
                    KrausChannel::partial_trace(2, 2)
                } else {
                    let count = 1 + (random::uniform(&mut rng, 0.0, 3.0) as usize).min(2);
                    KrausChannel::random(&mut rng, n, n, count)
                };
                let depolarizing = KrausChannel::depolarizing(n, random::uniform(&mut rng, 0.05, 0.95))?;
                let r = monotonicity_check(f, &rho, &a, &channel)?;
                let d = monotonicity_check(f, &rho, &a, &depolarizing)?;
                for rep in [&r, &d] {
                    regularized += rep.regularized as usize;
                    inconclusive += rep.inconclusive as usize;
                }
                if !r.inconclusive {
                    min_margin = min_margin.min(r.margin);
                }
                if !d.inconclusive {
                    min_depolarizing = min_depolarizing.min(d.margin);
                    strict += (d.margin > 0.0) as usize;
                }
            }
            let share = strict as f64 / c.trials as f64;
            let passed = min_margin.min(min_depolarizing) >= MARGIN_FLOOR && share >= STRICT_SHARE;
            cases.push(
                Case::new(format!("N={n}/{}", f.name()))
                    .with("dim", n)
                    .with("metric", f.name())
                    .with("trials", c.trials)
                    .with("min-margin", min_margin)
                    .with("min-margin-depolarizing", min_depolarizing)
                    .with("strict-share-depolarizing", share)
                    .with("regularized", regularized)
                    .with("inconclusive-samples", inconclusive)
                    .status(Status::from_checks(passed, passed && inconclusive > 0)),
            );
        }
    }
    Ok(cases)
}

fn flatness(c: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    let mut cases = Vec::new();
    for &n in &c.dim {
        for &alpha in &c.alpha {
            let r = flatness_check(alpha, n, c.seed)?;
            // ∇^(±1) are flat on states too, so only the interior is curved
            let curved = alpha.abs() < 1.0;
            let passed =
                r.affine_residual <= FLATNESS_TOL && (!curved || r.path_dependence >= PATH_DEPENDENCE_GAP);
            cases.push(
                Case::new(format!("N={n}/alpha={alpha}"))
                    .with("dim", n)
                    .with("alpha", alpha)
                    .with("affine-residual", r.affine_residual)
                    .with("path-dependence", r.path_dependence)
                    .with("expect-path-dependence", curved)
                    .status(Status::from_checks(passed, false)),
            );
        }
    }
    Ok(cases)
}

/// Diagonal qutrit mixtures used for the classical comparisons.
pub fn classical_grid() -> Vec<Vec<f64>> {
    vec![vec![0.2, 0.5], vec![0.1, 0.3], vec![0.45, 0.2], vec![0.6, 0.05]]
}

fn convexity(c: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    let builtins = builtin_functions(&[0.2, 0.5, 0.8])?;
    let witness = [witness_probe(Space::States)];
    let mut cases = Vec::new();
    for &alpha in &c.alpha {
        let r = convexity_failure_check(alpha, &witness)?;
        let classical = classical_reduction_check(&builtins, &[alpha], &classical_grid())?;
        let interior = alpha.abs() < 1.0;
        let quantum_ok = if interior {
            r.max_difference >= CONVEXITY_GAP && r.bkm_defect >= c.gap
        } else {
            r.max_difference <= CLASSICAL_CONVEXITY_TOL && r.bkm_defect <= c.tol
        };
        let classical_ok = classical.fisher_deviation <= CLASSICAL_TOL
            && classical.alpha_spread <= CLASSICAL_TOL
            && classical.convexity_difference <= CLASSICAL_CONVEXITY_TOL;
        cases.push(
            Case::new(format!("alpha={alpha}"))
                .with("alpha", alpha)
                .with("quantum-difference", r.max_difference)
                .with("bkm-defect", r.bkm_defect)
                .with("classical-difference", classical.convexity_difference)
                .with("fisher-deviation", classical.fisher_deviation)
                .with("alpha-spread", classical.alpha_spread)
                .status(Status::from_checks(quantum_ok && classical_ok, false)),
        );
    }
    Ok(cases)
}

fn entropy_projection(c: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    let mut cases = Vec::new();
    for &n in &c.dim {
        if n < 2 {
            return Err(crate::config::UsageError::new("dim", "entropy projection needs N ≥ 2").into());
        }
        let gm = gell_mann_matrices(n);
        let gibbs = GibbsFamily::new(vec![gm[0].clone(), gm[gm.len() - 1].clone()])?;
        for k in 0..c.trials {
            let mut rng = random::stream(c.seed, k as u64);
            let rho = random::state(&mut rng, n);
            let r = entropy_projection_demo(&rho, &gibbs)?;
            let passed = r.converged && r.mean_residual <= MEAN_TOL && r.orthogonality_residual <= ORTHOGONALITY_TOL;
            cases.push(
                Case::new(format!("N={n}/projection/{k}"))
                    .with("dim", n)
                    .with("sample", k)
                    .with("theta", r.theta)
                    .with("relative-entropy", r.relative_entropy)
                    .with("mean-residual", r.mean_residual)
                    .with("orthogonality-residual", r.orthogonality_residual)
                    .with("iterations", r.iterations)
                    .with("converged", r.converged)
                    .status(Status::from_checks(passed, false)),
            );
        }
        let mut rng = random::stream(c.seed, c.trials as u64);
        let rho = random::state(&mut rng, n);
        let d = random::state_tangent(&mut rng, &rho);
        let t = relative_entropy_taylor(&rho, &d, c.step)?;
        cases.push(
            Case::new(format!("N={n}/taylor"))
                .with("dim", n)
                .with("t", t.t)
                .with("relative-entropy", t.value)
                .with("half-bkm", t.quadratic)
                .with("residual", t.residual)
                .status(Status::from_checks(t.residual <= TAYLOR_TOL, false)),
        );
    }
    Ok(cases)
}

fn metric_table(c: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    let fs = functions(c)?;
    let mut cases = Vec::new();
    for &n in &c.dim {
        for f in &fs {
            let mut max_relative = 0.0f64;
            let mut min_norm = f64::INFINITY;
            let mut sample = Vec::new();
            let has_direct = f.wyd_parameter().is_some() || f.name() == "bkm";
            for k in 0..c.trials {
                let mut rng = random::stream(c.seed, k as u64);
                let rho = random::state(&mut rng, n);
                let a = random::state_tangent(&mut rng, &rho);
                let b = random::state_tangent(&mut rng, &rho);
                let value = metric_eval(&rho, f, &a, &b)?;
                min_norm = min_norm.min(metric_eval(&rho, f, &a, &a)?);
                let direct = match f.wyd_parameter() {
                    Some(p) => Some(wyd_direct(&rho, 2.0 * p - 1.0, &a, &b)?),
                    None if has_direct => Some(bkm_direct(&rho, &a, &b)?),
                    None => None,
                };
                if let Some(d) = direct {
                    max_relative = max_relative.max((d - value).abs() / value.abs());
                }
                if k == 0 {
                    sample.push(value);
                }
            }
            let passed = min_norm > 0.0 && (!has_direct || max_relative <= KERNEL_DIRECT_TOL);
            let mut case = Case::new(format!("N={n}/{}", f.name()))
                .with("dim", n)
                .with("metric", f.name())
                .with("trials", c.trials)
                .with("first-value", sample[0])
                .with("min-norm", min_norm);
            if has_direct {
                case = case.with("max-relative-direct", max_relative);
            }
            cases.push(case.status(Status::from_checks(passed, false)));
        }
    }
    Ok(cases)
}
