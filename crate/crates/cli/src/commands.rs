use qpm_core::interferometers::{decompose_hadamard, hadamard_walsh, reconstruct};
use qpm_core::matrix::C64;
use qpm_core::photon_stats::{
    bound_report, inner, OverlapSpec, PatternDistribution, PatternSampler, OVERLAP_GRID,
    UNITARY_TOL,
};
use qpm_core::postprocess::{
    accept, acceptance_from_distribution, analytic_acceptance, equivalence_from_distribution,
    pi_value, DecisionRule, Outcome, SATURATION_TOL,
};
use qpm_core::swap_circuit::{self, build_layout, random_state, LayoutVariant};
use qpm_core::DetectionPattern;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{load_state_pair, CliError, CommandKind, RunConfig};

pub const NORMALIZATION_TOL: f64 = 1e-9;
pub const ACCEPTANCE_TOL: f64 = 1e-9;
pub const BOUND_TOL: f64 = 1e-10;
pub const CIRCUIT_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-12;
pub const SWAPSIM_TOL: f64 = 1e-9;
/// Entry added to `U[0][0]` by `verify --perturb`.
pub const PERTURBATION: f64 = 1e-3;
/// Largest register count for the circuit check inside `verify`.
const VERIFY_CIRCUIT_MAX: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    VerificationFailed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::VerificationFailed => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub pattern: DetectionPattern,
    pub prob_i: f64,
    pub prob_d: f64,
    pub prob_mixed: f64,
    pub pi: i64,
    /// Decision bit: 0 means "identical".
    pub accept: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub interferometer: String,
    pub size: usize,
    pub overlap: f64,
    pub rows: Vec<StatsRow>,
    pub acceptance_probability: f64,
    pub analytic_acceptance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// `None` when the check could not be evaluated.
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub interferometer: String,
    pub size: usize,
    pub perturbed: bool,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub index: usize,
    pub permutation: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecomposeReport {
    pub size: usize,
    pub layers: Vec<LayerReport>,
    pub beam_splitters: usize,
    pub expected_beam_splitters: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: usize,
    pub pattern: DetectionPattern,
    pub accept: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub shots: usize,
    pub accepted: usize,
    pub frequency: f64,
    pub expected: f64,
    pub analytic: f64,
    pub sigma: f64,
    pub interval: (f64, f64),
    pub within_interval: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub interferometer: String,
    pub size: usize,
    pub overlap: f64,
    pub seed: u64,
    pub records: Vec<ShotRecord>,
    pub summary: SampleSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub between: (String, String),
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapsimReport {
    pub size: usize,
    pub dim: usize,
    /// Seed of the random states; `None` when read from files.
    pub seed: Option<u64>,
    pub overlap: f64,
    pub circuit_full: f64,
    pub circuit_simplified: f64,
    /// Only for `M ≤ 8`, where the pattern enumeration is cheap.
    pub interferometer: Option<f64>,
    pub analytic: f64,
    pub deltas: Vec<Delta>,
    pub tolerance: f64,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Report {
    Stats(StatsReport),
    Verify(VerifyReport),
    Decompose(DecomposeReport),
    Sample(SampleReport),
    Swapsim(SwapsimReport),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub report: Report,
    pub status: Status,
}

pub fn run(config: &RunConfig) -> Result<Execution, CliError> {
    config.validate()?;
    match config.command {
        CommandKind::Stats => cmd_stats(config),
        CommandKind::Verify => cmd_verify(config),
        CommandKind::Decompose => cmd_decompose(config),
        CommandKind::Sample => cmd_sample(config),
        CommandKind::Swapsim => cmd_swapsim(config),
    }
}

fn overlap_of(config: &RunConfig) -> Result<OverlapSpec, CliError> {
    config
        .overlap
        .as_ref()
        .ok_or_else(|| CliError::Usage("missing overlap".into()))?
        .resolve()
}

pub fn cmd_stats(config: &RunConfig) -> Result<Execution, CliError> {
    let rule = config.interferometer.rule()?;
    let o = overlap_of(config)?;
    let dist = PatternDistribution::build(&rule.unitary(), &o)?;
    let rows = dist
        .entries()
        .iter()
        .map(|e| {
            Ok(StatsRow {
                pattern: e.pattern.clone(),
                prob_i: e.prob_i,
                prob_d: e.prob_d,
                prob_mixed: e.prob_mixed,
                pi: pi_value(&rule, &e.pattern)?,
                accept: accept(&rule, &e.pattern)?.bit(),
            })
        })
        .collect::<Result<Vec<_>, qpm_core::Error>>()?;
    let report = StatsReport {
        interferometer: config.interferometer.label()?,
        size: rule.size(),
        overlap: o.value(),
        rows,
        acceptance_probability: acceptance_from_distribution(&rule, &dist)?,
        analytic_acceptance: analytic_acceptance(rule.size(), o.value()),
    };
    Ok(Execution {
        report: Report::Stats(report),
        status: Status::Success,
    })
}

fn check(name: &str, measured: f64, tolerance: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: measured.is_finite() && measured <= tolerance,
        measured: Some(measured).filter(|m| m.is_finite()),
        tolerance,
        detail: detail.into(),
    }
}

fn not_run(name: &str, tolerance: f64, why: &qpm_core::Error) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: false,
        measured: None,
        tolerance,
        detail: format!("not evaluated: {why}"),
    }
}

fn distribution_checks(
    rule: &DecisionRule,
    dist: &PatternDistribution,
    tol: impl Fn(f64) -> f64,
) -> Result<Vec<CheckResult>, qpm_core::Error> {
    let m = rule.size();
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for c in OVERLAP_GRID {
        let (ti, td, tm) = dist.with_overlap(&OverlapSpec::new(c)?).totals();
        worst = worst
            .max((ti - 1.0).abs())
            .max((td - 1.0).abs())
            .max((tm - 1.0).abs());
    }
    out.push(check(
        "normalization",
        worst,
        tol(NORMALIZATION_TOL),
        "max |sum - 1| of Pr_i, Pr_d, Pr over the overlap grid",
    ));

    let bounds = bound_report(dist);
    let slack = bounds.min_slack.min(bounds.min_mixture_slack);
    out.push(check(
        "cauchy_schwarz",
        (-slack).max(0.0),
        tol(BOUND_TOL),
        format!(
            "min slack of Pr_d >= Pr_i/M is {:.3e}, of the mixture bound {:.3e}",
            bounds.min_slack, bounds.min_mixture_slack
        ),
    ));

    let mut off = 0usize;
    for e in dist.entries() {
        let pi = pi_value(rule, &e.pattern)?;
        if pi != 0 && pi != m as i64 {
            off += 1;
        }
    }
    out.push(check(
        "dichotomy",
        off as f64,
        0.0,
        format!("patterns with pi outside {{0, {m}}}, exact arithmetic"),
    ));

    let eq = equivalence_from_distribution(rule, dist)?;
    let mut eq_check = check(
        "equivalence",
        eq.max_saturation_gap,
        tol(SATURATION_TOL),
        format!(
            "{} counterexamples, {} accepted patterns, {} with Pr_i = Pr_d = 0",
            eq.counterexamples.len(),
            eq.accepted_patterns,
            eq.vanishing_patterns.len()
        ),
    );
    eq_check.passed &= eq.passed();
    out.push(eq_check);

    let mut worst: f64 = 0.0;
    for c in OVERLAP_GRID {
        let p = acceptance_from_distribution(rule, &dist.with_overlap(&OverlapSpec::new(c)?))?;
        worst = worst.max((p - analytic_acceptance(m, c)).abs());
    }
    out.push(check(
        "acceptance_law",
        worst,
        tol(ACCEPTANCE_TOL),
        "max |P(accept) - (1/M + (M-1)/M c)| over the overlap grid",
    ));
    Ok(out)
}

fn circuit_check(m: usize, tol: f64) -> Result<CheckResult, qpm_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let full = build_layout(m, LayoutVariant::Full)?;
    let simp = build_layout(m, LayoutVariant::Simplified)?;
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let phi = random_state(2, &mut rng);
        let psi = random_state(2, &mut rng);
        let law = analytic_acceptance(m, inner(&phi, &psi).norm_sqr());
        let a = swap_circuit::accept_probability(&full, &phi, &psi)?;
        let b = swap_circuit::accept_probability(&simp, &phi, &psi)?;
        worst = worst.max((a - law).abs()).max((b - law).abs());
    }
    Ok(check(
        "swap_circuit",
        worst,
        tol,
        "full and simplified circuits against the closed form, 4 seeded qubit pairs",
    ))
}

pub fn cmd_verify(config: &RunConfig) -> Result<Execution, CliError> {
    let rule = config.interferometer.rule()?;
    let m = rule.size();
    let tol = |default: f64| config.tol.unwrap_or(default);
    let mut u = rule.unitary();
    if config.perturb {
        u[(0, 0)] += C64::new(PERTURBATION, 0.0);
    }

    let mut checks = vec![check(
        "unitarity",
        u.unitarity_deviation(),
        tol(UNITARY_TOL),
        "max |U U^dagger - I|",
    )];

    const DIST_CHECKS: [(&str, f64); 5] = [
        ("normalization", NORMALIZATION_TOL),
        ("cauchy_schwarz", BOUND_TOL),
        ("dichotomy", 0.0),
        ("equivalence", SATURATION_TOL),
        ("acceptance_law", ACCEPTANCE_TOL),
    ];
    match PatternDistribution::build(&u, &OverlapSpec::new(0.0)?)
        .and_then(|dist| distribution_checks(&rule, &dist, tol))
    {
        Ok(found) => checks.extend(found),
        Err(e) => checks.extend(DIST_CHECKS.iter().map(|&(n, t)| not_run(n, tol(t), &e))),
    }

    if let Some(n) = rule.group().hadamard_rank().filter(|&n| n > 0) {
        if m <= VERIFY_CIRCUIT_MAX {
            checks.push(circuit_check(m, tol(CIRCUIT_TOL))?);
        }
        let dec = decompose_hadamard(n);
        let mut c = check(
            "decomposition",
            reconstruct(&dec).max_abs_diff(&hadamard_walsh(n)),
            tol(RECONSTRUCTION_TOL),
            format!(
                "{} beam splitters, expected {}",
                dec.beam_splitter_count(),
                m * n / 2
            ),
        );
        c.passed &= dec.beam_splitter_count() == m * n / 2;
        checks.push(c);
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(Execution {
        report: Report::Verify(VerifyReport {
            interferometer: config.interferometer.label()?,
            size: m,
            perturbed: config.perturb,
            checks,
            passed,
        }),
        status: if passed {
            Status::Success
        } else {
            Status::VerificationFailed
        },
    })
}

pub fn cmd_decompose(config: &RunConfig) -> Result<Execution, CliError> {
    let m = match config.interferometer {
        crate::config::InterferometerChoice::Size(m) => m,
        _ => return Err(CliError::Usage("decompose takes --size M".into())),
    };
    if !m.is_power_of_two() {
        return Err(qpm_core::Error::NotPowerOfTwo(m).into());
    }
    let n = m.trailing_zeros() as usize;
    let dec = decompose_hadamard(n);
    let report = DecomposeReport {
        size: m,
        layers: dec
            .layers()
            .iter()
            .enumerate()
            .map(|(index, l)| LayerReport {
                index,
                permutation: l.permutation().to_vec(),
                pairs: l.pairs().to_vec(),
            })
            .collect(),
        beam_splitters: dec.beam_splitter_count(),
        expected_beam_splitters: m * n / 2,
        residual: reconstruct(&dec).max_abs_diff(&hadamard_walsh(n)),
    };
    Ok(Execution {
        report: Report::Decompose(report),
        status: Status::Success,
    })
}

pub fn cmd_sample(config: &RunConfig) -> Result<Execution, CliError> {
    let seed = config
        .seed
        .ok_or_else(|| CliError::Usage("--seed is required when sampling".into()))?;
    let rule = config.interferometer.rule()?;
    let o = overlap_of(config)?;
    let dist = PatternDistribution::build(&rule.unitary(), &o)?;
    let sampler = PatternSampler::new(&dist);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut accepted = 0;
    let mut records = Vec::with_capacity(config.shots);
    for shot in 0..config.shots {
        let pattern = sampler.draw(&mut rng).clone();
        let outcome = accept(&rule, &pattern)?;
        if outcome == Outcome::Identical {
            accepted += 1;
        }
        records.push(ShotRecord {
            shot,
            pattern,
            accept: outcome.bit(),
        });
    }

    let shots = config.shots;
    let expected = acceptance_from_distribution(&rule, &dist)?.clamp(0.0, 1.0);
    let sigma = (expected * (1.0 - expected) / shots as f64).sqrt();
    let frequency = accepted as f64 / shots as f64;
    let interval = (expected - 3.0 * sigma, expected + 3.0 * sigma);
    let summary = SampleSummary {
        shots,
        accepted,
        frequency,
        expected,
        analytic: analytic_acceptance(rule.size(), o.value()),
        sigma,
        interval,
        // a degenerate interval still has to contain its own point
        within_interval: frequency >= interval.0 - 1e-12 && frequency <= interval.1 + 1e-12,
    };
    Ok(Execution {
        report: Report::Sample(SampleReport {
            interferometer: config.interferometer.label()?,
            size: rule.size(),
            overlap: o.value(),
            seed,
            records,
            summary,
        }),
        status: Status::Success,
    })
}

pub fn cmd_swapsim(config: &RunConfig) -> Result<Execution, CliError> {
    let m = match config.interferometer {
        crate::config::InterferometerChoice::Size(m) => m,
        _ => return Err(CliError::Usage("swapsim takes --size M".into())),
    };
    let full = build_layout(m, LayoutVariant::Full)?;
    let simp = build_layout(m, LayoutVariant::Simplified)?;
    let (phi, psi, seed) = match &config.states {
        Some((a, b)) => {
            let (phi, psi) = load_state_pair(a, b)?;
            (phi, psi, None)
        }
        None => {
            let seed = config.seed.unwrap_or(0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = random_state(config.dim, &mut rng);
            let psi = random_state(config.dim, &mut rng);
            (phi, psi, Some(seed))
        }
    };
    let o = OverlapSpec::from_states(&phi, &psi)?;
    let circuit_full = swap_circuit::accept_probability(&full, &phi, &psi)?;
    let circuit_simplified = swap_circuit::accept_probability(&simp, &phi, &psi)?;
    let interferometer = if m <= 8 {
        let rule = DecisionRule::hadamard(m.trailing_zeros() as usize);
        let dist = PatternDistribution::build(&rule.unitary(), &o)?;
        Some(acceptance_from_distribution(&rule, &dist)?)
    } else {
        None
    };
    let analytic = analytic_acceptance(m, o.value());

    let mut values = vec![
        ("circuit_full", circuit_full),
        ("circuit_simplified", circuit_simplified),
    ];
    if let Some(v) = interferometer {
        values.push(("interferometer", v));
    }
    values.push(("analytic", analytic));
    let mut deltas = Vec::new();
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            deltas.push(Delta {
                between: (a.0.to_string(), b.0.to_string()),
                delta: (a.1 - b.1).abs(),
            });
        }
    }
    let tolerance = config.tol.unwrap_or(SWAPSIM_TOL);
    let agree = deltas.iter().all(|d| d.delta <= tolerance);
    Ok(Execution {
        report: Report::Swapsim(SwapsimReport {
            size: m,
            dim: phi.len(),
            seed,
            overlap: o.value(),
            circuit_full,
            circuit_simplified,
            interferometer,
            analytic,
            deltas,
            tolerance,
            agree,
        }),
        status: if agree {
            Status::Success
        } else {
            Status::VerificationFailed
        },
    })
}
