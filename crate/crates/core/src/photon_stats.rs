//! Detection statistics of an `M`-mode interferometer fed one photon in
//! state φ (input mode 0) and `M-1` photons in state ψ (one per remaining
//! input mode).
//!
//! The internal photon states enter only through `c = |⟨φ|ψ⟩|²`: the
//! statistics are the `c`-weighted mixture of the indistinguishable case
//! (`φ = ψ`) and the distinguishable case (`φ ⊥ ψ`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{permanent, remove_row, repeat_columns, ComplexMatrix, C64};
use crate::pattern::{enumerate_patterns, DetectionPattern};

/// Unitarity tolerance for interferometer matrices.
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest interferometer for which full distributions are built.
pub const MAX_DISTRIBUTION_SIZE: usize = 10;
/// Allowed slack in `Pr_d(D) ≥ Pr_i(D)/M`.
pub const BOUND_SLACK: f64 = 1e-10;
/// Overlaps at which the mixture bound is checked.
pub const OVERLAP_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Squared overlap `c = |⟨φ|ψ⟩|²`, optionally with the states it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapSpec {
    c: f64,
    #[serde(skip)]
    source_states: Option<(Vec<C64>, Vec<C64>)>,
}

impl OverlapSpec {
    pub fn new(c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::OverlapOutOfRange(c));
        }
        Ok(Self {
            c,
            source_states: None,
        })
    }

    /// Overlap of two normalized states of equal dimension.
    pub fn from_states(phi: &[C64], psi: &[C64]) -> Result<Self> {
        if phi.len() != psi.len() || phi.is_empty() {
            return Err(Error::Dimension(format!(
                "states of dimension {} and {}",
                phi.len(),
                psi.len()
            )));
        }
        for v in [phi, psi] {
            let n = norm_sqr(v);
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized(n));
            }
        }
        let c = inner(phi, psi).norm_sqr().clamp(0.0, 1.0);
        Ok(Self {
            c,
            source_states: Some((phi.to_vec(), psi.to_vec())),
        })
    }

    pub fn value(&self) -> f64 {
        self.c
    }

    pub fn source_states(&self) -> Option<(&[C64], &[C64])> {
        self.source_states
            .as_ref()
            .map(|(a, b)| (a.as_slice(), b.as_slice()))
    }
}

/// `⟨a|b⟩`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn check_interferometer(u: &ComplexMatrix) -> Result<usize> {
    if !u.is_square() {
        return Err(Error::Dimension(format!(
            "interferometer matrix is {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let deviation = u.unitarity_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary {
            deviation,
            tolerance: UNITARY_TOL,
        });
    }
    Ok(u.rows())
}

fn indistinguishable_unchecked(u: &ComplexMatrix, d: &DetectionPattern) -> Result<f64> {
    let per = permanent(&repeat_columns(u, d)?)?;
    Ok(per.norm_sqr() / d.factorial())
}

/// `p_k(D) = u_{0k} Per(U_{0,D-1_k}) / √D!`, zero where `d_k = 0`.
fn amplitudes_unchecked(u: &ComplexMatrix, d: &DetectionPattern) -> Result<Vec<C64>> {
    let norm = d.factorial().sqrt();
    (0..d.modes())
        .map(|k| match d.without_photon_in(k) {
            None => Ok(C64::new(0.0, 0.0)),
            Some(reduced) => {
                let sub = remove_row(&repeat_columns(u, &reduced)?, 0)?;
                Ok(u[(0, k)] * permanent(&sub)? / norm)
            }
        })
        .collect()
}

fn distinguishable_unchecked(u: &ComplexMatrix, d: &DetectionPattern) -> Result<f64> {
    let p = amplitudes_unchecked(u, d)?;
    Ok(d.iter()
        .zip(&p)
        .map(|(&dk, pk)| dk as f64 * pk.norm_sqr())
        .sum())
}

/// `Pr_i(D) = |Per(U_D)|² / D!`.
pub fn prob_indistinguishable(u: &ComplexMatrix, d: &DetectionPattern) -> Result<f64> {
    let m = check_interferometer(u)?;
    d.check_modes(m)?;
    indistinguishable_unchecked(u, d)
}

/// `Pr_d(D) = Σ_k d_k |u_{0k} Per(U_{0,D-1_k})|² / D!`: the input-mode-0
/// photon routes independently of the other `M-1`.
pub fn prob_distinguishable(u: &ComplexMatrix, d: &DetectionPattern) -> Result<f64> {
    let m = check_interferometer(u)?;
    d.check_modes(m)?;
    distinguishable_unchecked(u, d)
}

/// The amplitudes `p_k(D)` with `Pr_i = |Σ d_k p_k|²` and `Pr_d = Σ d_k |p_k|²`.
pub fn laplace_amplitudes(u: &ComplexMatrix, d: &DetectionPattern) -> Result<Vec<C64>> {
    let m = check_interferometer(u)?;
    d.check_modes(m)?;
    amplitudes_unchecked(u, d)
}

fn mix(prob_i: f64, prob_d: f64, c: f64) -> f64 {
    // convex form keeps both endpoints exact
    (1.0 - c) * prob_d + c * prob_i
}

/// `Pr(D) = Pr_d(D) + c·(Pr_i(D) − Pr_d(D))`.
pub fn prob_mixture(u: &ComplexMatrix, d: &DetectionPattern, o: &OverlapSpec) -> Result<f64> {
    let m = check_interferometer(u)?;
    d.check_modes(m)?;
    Ok(mix(
        indistinguishable_unchecked(u, d)?,
        distinguishable_unchecked(u, d)?,
        o.value(),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternProbabilities {
    pub pattern: DetectionPattern,
    pub prob_i: f64,
    pub prob_d: f64,
    pub prob_mixed: f64,
}

/// Exact distribution over every pattern, in enumeration order. Raw
/// (unclamped) values are kept; use [`clamp_probability`] for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternDistribution {
    size: usize,
    overlap: f64,
    entries: Vec<PatternProbabilities>,
}

impl PatternDistribution {
    pub fn build(u: &ComplexMatrix, o: &OverlapSpec) -> Result<Self> {
        let m = check_interferometer(u)?;
        if m > MAX_DISTRIBUTION_SIZE {
            return Err(Error::TooLarge {
                what: "exact pattern distribution",
                size: m,
                limit: MAX_DISTRIBUTION_SIZE,
            });
        }
        let c = o.value();
        let entries = enumerate_patterns(m)?
            .into_par_iter()
            .map(|pattern| {
                let prob_i = indistinguishable_unchecked(u, &pattern)?;
                let prob_d = distinguishable_unchecked(u, &pattern)?;
                Ok(PatternProbabilities {
                    pattern,
                    prob_i,
                    prob_d,
                    prob_mixed: mix(prob_i, prob_d, c),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            size: m,
            overlap: c,
            entries,
        })
    }

    /// Same patterns re-mixed at another overlap.
    pub fn with_overlap(&self, o: &OverlapSpec) -> Self {
        let c = o.value();
        Self {
            size: self.size,
            overlap: c,
            entries: self
                .entries
                .iter()
                .map(|e| PatternProbabilities {
                    prob_mixed: mix(e.prob_i, e.prob_d, c),
                    ..e.clone()
                })
                .collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    pub fn entries(&self) -> &[PatternProbabilities] {
        &self.entries
    }

    pub fn get(&self, pattern: &DetectionPattern) -> Option<&PatternProbabilities> {
        self.entries.iter().find(|e| &e.pattern == pattern)
    }

    /// Column sums `(Σ Pr_i, Σ Pr_d, Σ Pr)`.
    pub fn totals(&self) -> (f64, f64, f64) {
        self.entries.iter().fold((0.0, 0.0, 0.0), |(a, b, c), e| {
            (a + e.prob_i, b + e.prob_d, c + e.prob_mixed)
        })
    }
}

/// Rounding noise can leave tiny negative values; report them as zero.
pub fn clamp_probability(p: f64) -> f64 {
    p.max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub pattern: DetectionPattern,
    /// Overlap for mixture-bound violations, `None` for `Pr_d ≥ Pr_i/M`.
    pub overlap: Option<f64>,
    pub slack: f64,
}

/// Outcome of checking `Pr_d(D) ≥ Pr_i(D)/M` and
/// `Pr(D) ≥ (1/M + (M−1)/M·c)·Pr_i(D)` over all patterns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub size: usize,
    pub patterns_checked: usize,
    pub min_slack: f64,
    pub min_mixture_slack: f64,
    pub equality_patterns: Vec<DetectionPattern>,
    pub violations: Vec<BoundViolation>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_bound(u: &ComplexMatrix) -> Result<BoundReport> {
    let dist = PatternDistribution::build(u, &OverlapSpec::new(1.0)?)?;
    Ok(bound_report(&dist))
}

pub fn bound_report(dist: &PatternDistribution) -> BoundReport {
    let m = dist.size() as f64;
    let mut report = BoundReport {
        size: dist.size(),
        patterns_checked: dist.entries().len(),
        min_slack: f64::INFINITY,
        min_mixture_slack: f64::INFINITY,
        equality_patterns: Vec::new(),
        violations: Vec::new(),
    };
    for e in dist.entries() {
        let slack = e.prob_d - e.prob_i / m;
        report.min_slack = report.min_slack.min(slack);
        if slack.abs() <= BOUND_SLACK {
            report.equality_patterns.push(e.pattern.clone());
        }
        if slack < -BOUND_SLACK {
            report.violations.push(BoundViolation {
                pattern: e.pattern.clone(),
                overlap: None,
                slack,
            });
        }
        for c in OVERLAP_GRID {
            let slack = mix(e.prob_i, e.prob_d, c) - (1.0 / m + (m - 1.0) / m * c) * e.prob_i;
            report.min_mixture_slack = report.min_mixture_slack.min(slack);
            if slack < -BOUND_SLACK {
                report.violations.push(BoundViolation {
                    pattern: e.pattern.clone(),
                    overlap: Some(c),
                    slack,
                });
            }
        }
    }
    report
}

/// Inverse-CDF sampler over an exact distribution in enumeration order.
#[derive(Clone, Debug)]
pub struct PatternSampler {
    patterns: Vec<DetectionPattern>,
    cumulative: Vec<f64>,
}

impl PatternSampler {
    pub fn new(dist: &PatternDistribution) -> Self {
        let mut total = 0.0;
        let cumulative = dist
            .entries()
            .iter()
            .map(|e| {
                total += clamp_probability(e.prob_mixed);
                total
            })
            .collect();
        Self {
            patterns: dist.entries().iter().map(|e| e.pattern.clone()).collect(),
            cumulative,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &DetectionPattern {
        let total = *self.cumulative.last().expect("at least one pattern");
        let u = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        &self.patterns[idx.min(self.patterns.len() - 1)]
    }
}

/// `shots` i.i.d. patterns from the mixture distribution; the stream is a
/// pure function of `seed`.
pub fn sample(
    u: &ComplexMatrix,
    o: &OverlapSpec,
    shots: usize,
    seed: u64,
) -> Result<Vec<DetectionPattern>> {
    if shots == 0 {
        return Ok(Vec::new());
    }
    let sampler = PatternSampler::new(&PatternDistribution::build(u, o)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).map(|_| sampler.draw(&mut rng).clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometers::{group_unitary, hadamard_walsh, GroupSpec};
    use crate::matrix::random_unitary;

    fn pat(v: &[usize]) -> DetectionPattern {
        DetectionPattern::new(v.to_vec()).unwrap()
    }

    /// Distinguishable-photon oracle: the mode-0 photon lands in mode `k`
    /// with probability `|u_{0k}|²`, independently of the other `M-1`
    /// photons, which form `D - 1_k` with their own bosonic probability
    /// `|Per|² / (D - 1_k)!` (naive permanent).
    fn distinguishable_routing_oracle(u: &ComplexMatrix, d: &DetectionPattern) -> f64 {
        let m = u.rows();
        let mut total = 0.0;
        for k in 0..m {
            let Some(rest) = d.without_photon_in(k) else {
                continue;
            };
            let single = u[(0, k)].norm_sqr();
            let sub = remove_row(&repeat_columns(u, &rest).unwrap(), 0).unwrap();
            let per = crate::matrix::permanent_naive(&sub).unwrap();
            let rest_fact: f64 = rest
                .iter()
                .map(|&x| crate::pattern::factorial(x) as f64)
                .product();
            total += single * per.norm_sqr() / rest_fact;
        }
        total
    }

    #[test]
    fn hong_ou_mandel_values() {
        let h = hadamard_walsh(1);
        assert!(prob_indistinguishable(&h, &pat(&[1, 1])).unwrap().abs() < 1e-15);
        assert!((prob_indistinguishable(&h, &pat(&[2, 0])).unwrap() - 0.5).abs() < 1e-15);
        assert!((prob_distinguishable(&h, &pat(&[1, 1])).unwrap() - 0.5).abs() < 1e-15);
        assert!((prob_distinguishable(&h, &pat(&[2, 0])).unwrap() - 0.25).abs() < 1e-15);
        let half = OverlapSpec::new(0.5).unwrap();
        assert!((prob_mixture(&h, &pat(&[1, 1]), &half).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identity_passes_photons_straight() {
        for m in 1..=5 {
            let id = ComplexMatrix::identity(m);
            let ones = pat(&vec![1; m]);
            assert!((prob_indistinguishable(&id, &ones).unwrap() - 1.0).abs() < 1e-15);
            assert!((prob_distinguishable(&id, &ones).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mixture_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(3, &mut rng);
        let d = pat(&[1, 0, 2]);
        let pi = prob_indistinguishable(&u, &d).unwrap();
        let pd = prob_distinguishable(&u, &d).unwrap();
        assert_eq!(
            prob_mixture(&u, &d, &OverlapSpec::new(1.0).unwrap()).unwrap(),
            pi
        );
        assert_eq!(
            prob_mixture(&u, &d, &OverlapSpec::new(0.0).unwrap()).unwrap(),
            pd
        );
    }

    #[test]
    fn distinguishable_matches_routing_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_unitary(4, &mut rng);
        for d in enumerate_patterns(4).unwrap() {
            let fast = prob_distinguishable(&u, &d).unwrap();
            let oracle = distinguishable_routing_oracle(&u, &d);
            assert!((fast - oracle).abs() < 1e-12, "{d}: {fast} vs {oracle}");
        }
    }

    #[test]
    fn validation_errors() {
        let shear = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            prob_indistinguishable(&shear, &pat(&[1, 1])),
            Err(Error::NotUnitary { .. })
        ));
        assert!(matches!(
            prob_distinguishable(&shear, &pat(&[1, 1])),
            Err(Error::NotUnitary { .. })
        ));
        let h = hadamard_walsh(1);
        assert!(matches!(
            prob_indistinguishable(&h, &pat(&[1, 1, 1])),
            Err(Error::Dimension(_))
        ));
        assert_eq!(OverlapSpec::new(1.5), Err(Error::OverlapOutOfRange(1.5)));
        assert!(OverlapSpec::new(-0.1).is_err());
    }

    #[test]
    fn overlap_from_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let plus = [C64::new(s, 0.0), C64::new(0.0, s)];
        let o = OverlapSpec::from_states(&zero, &plus).unwrap();
        assert!((o.value() - 0.5).abs() < 1e-12);
        assert!(o.source_states().is_some());
        let unnormalized = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(
            OverlapSpec::from_states(&zero, &unnormalized),
            Err(Error::NotNormalized(_))
        ));
        assert!(OverlapSpec::from_states(&zero, &[C64::new(1.0, 0.0)]).is_err());
    }

    fn test_unitaries() -> Vec<ComplexMatrix> {
        let mut out: Vec<ComplexMatrix> = (1..=3).map(hadamard_walsh).collect();
        for a in 2..=6 {
            out.push(
                group_unitary(&GroupSpec::cyclic(a).unwrap())
                    .to_complex_scaled(1.0 / (a as f64).sqrt()),
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for m in 2..=5 {
            out.push(random_unitary(m, &mut rng));
        }
        out
    }

    #[test]
    fn distributions_are_normalized() {
        for u in test_unitaries() {
            let base = PatternDistribution::build(&u, &OverlapSpec::new(0.0).unwrap()).unwrap();
            for c in OVERLAP_GRID {
                let (si, sd, sm) = base.with_overlap(&OverlapSpec::new(c).unwrap()).totals();
                assert!(
                    (si - 1.0).abs() < 1e-9 && (sd - 1.0).abs() < 1e-9 && (sm - 1.0).abs() < 1e-9
                );
            }
        }
    }

    #[test]
    fn laplace_expansion_consistency() {
        for u in test_unitaries() {
            for d in enumerate_patterns(u.rows()).unwrap() {
                let p = laplace_amplitudes(&u, &d).unwrap();
                let sum: C64 = d.iter().zip(&p).map(|(&dk, pk)| pk * dk as f64).sum();
                let pi = prob_indistinguishable(&u, &d).unwrap();
                assert!((sum.norm_sqr() - pi).abs() < 1e-10);
                let pd: f64 = d
                    .iter()
                    .zip(&p)
                    .map(|(&dk, pk)| dk as f64 * pk.norm_sqr())
                    .sum();
                assert!((pd - prob_distinguishable(&u, &d).unwrap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cauchy_schwarz_bound_holds() {
        for u in test_unitaries() {
            let r = verify_bound(&u).unwrap();
            assert!(r.passed(), "{:?}", r.violations);
            assert!(r.min_slack >= -BOUND_SLACK);
        }
    }

    #[test]
    fn bound_equality_patterns_for_hadamard() {
        let r = verify_bound(&hadamard_walsh(1)).unwrap();
        assert_eq!(r.equality_patterns, vec![pat(&[2, 0]), pat(&[0, 2])]);
        let r = verify_bound(&ComplexMatrix::identity(3)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn distinguishable_probability_never_vanishes_for_hadamard() {
        for n in 1..=3 {
            let dist =
                PatternDistribution::build(&hadamard_walsh(n), &OverlapSpec::new(0.0).unwrap())
                    .unwrap();
            assert!(dist.entries().iter().all(|e| e.prob_d > 0.0));
        }
    }

    #[test]
    fn sampling_basics() {
        let h = hadamard_walsh(1);
        let one = OverlapSpec::new(1.0).unwrap();
        assert!(sample(&h, &one, 0, 1).unwrap().is_empty());
        let shots = sample(&h, &one, 5_000, 3).unwrap();
        assert!(shots.iter().all(|d| d.counts() != [1, 1]));
        assert_eq!(shots, sample(&h, &one, 5_000, 3).unwrap());
    }

    #[test]
    fn sampling_frequency_for_distinguishable_photons() {
        let h = hadamard_walsh(1);
        let zero = OverlapSpec::new(0.0).unwrap();
        let n = 100_000;
        let hits = sample(&h, &zero, n, 17)
            .unwrap()
            .iter()
            .filter(|d| d.counts() == [1, 1])
            .count();
        let freq = hits as f64 / n as f64;
        let sigma = (0.25f64 / n as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * sigma, "freq {freq}");
    }
}
