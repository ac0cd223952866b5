//! Classical decision rule turning a detection pattern into the binary
//! outcome of the order-`M` swap test.
//!
//! For a group interferometer with unnormalized table `F_G` (entries
//! `ζ^{e(i,j)}`), a pattern `D` gives every row `i` the phase
//! `ζ^{Σ_j d_j e(i,j)}`; the row-product sum `π(D)` adds these phases.
//! Because `i ↦ Σ_j d_j e(i,j)` is a group homomorphism, `π(D)` is `M`
//! when the phase is trivial on the generating rows and `0` otherwise.

use serde::{Deserialize, Serialize};

use crate::cyclotomic::{cyclotomic_polynomial, integer_root_sum};
use crate::error::{Error, Result};
use crate::interferometers::{generator_rows, group_unitary, row_closure, GroupSpec};
use crate::matrix::{ComplexMatrix, RootOfUnityMatrix};
use crate::pattern::DetectionPattern;
use crate::photon_stats::{OverlapSpec, PatternDistribution};

/// Tolerance when matching an interferometer against a rule's table.
pub const RULE_MATCH_TOL: f64 = 1e-10;
/// `Pr_i` below this counts as zero in the equivalence checks.
pub const ZERO_PROBABILITY_TOL: f64 = 1e-10;
/// Allowed gap in `Pr_d = Pr_i/M` on accepted patterns.
pub const SATURATION_TOL: f64 = 1e-10;

/// Binary outcome: `Identical` (bit 0) projects onto ψ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Identical,
    Different,
}

impl Outcome {
    pub fn bit(self) -> u8 {
        match self {
            Outcome::Identical => 0,
            Outcome::Different => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRule {
    group: GroupSpec,
    generators: Vec<usize>,
    exponent_table: RootOfUnityMatrix,
    cyclotomic: Vec<i64>,
}

impl DecisionRule {
    pub fn new(group: GroupSpec) -> Result<Self> {
        let generators = generator_rows(&group);
        let table = group_unitary(&group);
        Self::from_parts(group, generators, table)
    }

    /// Rule for the Hadamard interferometer on `2^n` modes.
    pub fn hadamard(n: usize) -> Self {
        Self::new(GroupSpec::hadamard(n)).expect("(Z/2)^n rule is valid")
    }

    /// Checks that `generators` generate every row of `table` and that
    /// row 0 is the identity.
    pub fn from_parts(
        group: GroupSpec,
        generators: Vec<usize>,
        exponent_table: RootOfUnityMatrix,
    ) -> Result<Self> {
        let m = group.order();
        if exponent_table.rows() != m || exponent_table.cols() != m {
            return Err(Error::Dimension(format!(
                "{}x{} table for a group of order {m}",
                exponent_table.rows(),
                exponent_table.cols()
            )));
        }
        if let Some(&g) = generators.iter().find(|&&g| g >= m) {
            return Err(Error::IndexOutOfRange { index: g, len: m });
        }
        if exponent_table.row(0).iter().any(|&e| e != 0) {
            return Err(Error::InvalidGroup(
                "row 0 of the table is not the identity".into(),
            ));
        }
        let reached = row_closure(&exponent_table, &generators).map_or(0, |s| s.len());
        if reached != m {
            return Err(Error::InvalidGroup(format!(
                "generators {generators:?} reach {reached} of {m} rows"
            )));
        }
        let cyclotomic = cyclotomic_polynomial(exponent_table.order());
        Ok(Self {
            group,
            generators,
            exponent_table,
            cyclotomic,
        })
    }

    /// Same rule with output modes relabelled: new mode `j` is old mode `perm[j]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        crate::matrix::check_bijection(perm)?;
        let table = self.exponent_table.select_columns(perm)?;
        Self::from_parts(self.group.clone(), self.generators.clone(), table)
    }

    pub fn size(&self) -> usize {
        self.group.order()
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn exponent_table(&self) -> &RootOfUnityMatrix {
        &self.exponent_table
    }

    /// Normalized interferometer `F_G / √M`.
    pub fn unitary(&self) -> ComplexMatrix {
        self.exponent_table
            .to_complex_scaled(1.0 / (self.size() as f64).sqrt())
    }

    fn row_phase(&self, row: usize, d: &DetectionPattern) -> usize {
        let order = self.exponent_table.order();
        self.exponent_table
            .row(row)
            .iter()
            .zip(d.iter())
            .map(|(&e, &dj)| e * (dj % order))
            .sum::<usize>()
            % order
    }
}

/// Exact integer value of `π(D) = Σ_i Π_j f_{ij}^{d_j}`.
pub fn pi_value(rule: &DecisionRule, d: &DetectionPattern) -> Result<i64> {
    d.check_modes(rule.size())?;
    let order = rule.exponent_table.order();
    let mut counts = vec![0i64; order];
    for i in 0..rule.size() {
        counts[rule.row_phase(i, d)] += 1;
    }
    integer_root_sum(&counts, &rule.cyclotomic)
        .ok_or_else(|| Error::InvalidArgument(format!("row-product sum for {d} is not an integer")))
}

/// Generator-row congruence test, `O(M·N)`.
pub fn accept(rule: &DecisionRule, d: &DetectionPattern) -> Result<Outcome> {
    d.check_modes(rule.size())?;
    let trivial = rule.generators.iter().all(|&g| rule.row_phase(g, d) == 0);
    Ok(if trivial {
        Outcome::Identical
    } else {
        Outcome::Different
    })
}

/// `1/M + (M−1)/M·c`.
pub fn analytic_acceptance(m: usize, c: f64) -> f64 {
    let m = m as f64;
    1.0 / m + (m - 1.0) / m * c
}

fn check_rule_matches(rule: &DecisionRule, u: &ComplexMatrix) -> Result<()> {
    let deviation = rule.unitary().max_abs_diff(u);
    if deviation > RULE_MATCH_TOL {
        return Err(Error::RuleMismatch(deviation));
    }
    Ok(())
}

/// Probability of the `Identical` outcome under the mixture statistics.
pub fn acceptance_probability(
    rule: &DecisionRule,
    u: &ComplexMatrix,
    o: &OverlapSpec,
) -> Result<f64> {
    check_rule_matches(rule, u)?;
    acceptance_from_distribution(rule, &PatternDistribution::build(u, o)?)
}

/// Sum of `Pr(D)` over accepted patterns of a prebuilt distribution.
pub fn acceptance_from_distribution(
    rule: &DecisionRule,
    dist: &PatternDistribution,
) -> Result<f64> {
    if dist.size() != rule.size() {
        return Err(Error::Dimension(format!(
            "distribution over {} modes for a rule of order {}",
            dist.size(),
            rule.size()
        )));
    }
    let mut total = 0.0;
    for e in dist.entries() {
        if accept(rule, &e.pattern)? == Outcome::Identical {
            total += e.prob_mixed;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCounterexample {
    pub pattern: DetectionPattern,
    pub pi: i64,
    pub accepted: bool,
    pub prob_i: f64,
    pub prob_d: f64,
    /// `Pr_d − Pr_i/M`.
    pub saturation_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub size: usize,
    pub patterns_checked: usize,
    pub accepted_patterns: usize,
    /// Largest `|Pr_d − Pr_i/M|` over patterns with `π = M`.
    pub max_saturation_gap: f64,
    /// Largest `Pr_i` over patterns with `π = 0`.
    pub max_rejected_prob_i: f64,
    /// Patterns where both `Pr_i` and `Pr_d` vanish, so that only the
    /// `π`/decision-rule checks apply. They occur for composite-order
    /// Fourier matrices, never for Hadamard.
    pub vanishing_patterns: Vec<DetectionPattern>,
    pub counterexamples: Vec<EquivalenceCounterexample>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks, pattern by pattern, that `π ∈ {0, M}`, that `π = M` exactly
/// when `Pr_i ≠ 0`, exactly when `Pr_d = Pr_i/M`, and that the generator
/// test agrees with `π`. Patterns with `Pr_i = Pr_d = 0` satisfy the
/// probability conditions vacuously and are listed in `vanishing_patterns`.
pub fn equivalence_report(rule: &DecisionRule, u: &ComplexMatrix) -> Result<EquivalenceReport> {
    check_rule_matches(rule, u)?;
    let dist = PatternDistribution::build(u, &OverlapSpec::new(1.0)?)?;
    equivalence_from_distribution(rule, &dist)
}

pub fn equivalence_from_distribution(
    rule: &DecisionRule,
    dist: &PatternDistribution,
) -> Result<EquivalenceReport> {
    let m = rule.size();
    let mut report = EquivalenceReport {
        size: m,
        patterns_checked: dist.entries().len(),
        accepted_patterns: 0,
        max_saturation_gap: 0.0,
        max_rejected_prob_i: 0.0,
        vanishing_patterns: Vec::new(),
        counterexamples: Vec::new(),
    };
    for e in dist.entries() {
        let pi = pi_value(rule, &e.pattern)?;
        let accepted = accept(rule, &e.pattern)? == Outcome::Identical;
        let gap = e.prob_d - e.prob_i / m as f64;
        let full = pi == m as i64;
        if full {
            report.accepted_patterns += 1;
            report.max_saturation_gap = report.max_saturation_gap.max(gap.abs());
        } else {
            report.max_rejected_prob_i = report.max_rejected_prob_i.max(e.prob_i);
        }
        let nonzero_i = e.prob_i > ZERO_PROBABILITY_TOL;
        let vanishing = !nonzero_i && e.prob_d <= ZERO_PROBABILITY_TOL;
        if vanishing {
            report.vanishing_patterns.push(e.pattern.clone());
        }
        let consistent = (pi == 0 || full)
            && full == accepted
            && (vanishing || (full == nonzero_i && full == (gap.abs() <= SATURATION_TOL)));
        if !consistent {
            report.counterexamples.push(EquivalenceCounterexample {
                pattern: e.pattern.clone(),
                pi,
                accepted,
                prob_i: e.prob_i,
                prob_d: e.prob_d,
                saturation_gap: gap,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometers::hadamard_walsh;
    use crate::matrix::C64;
    use crate::pattern::enumerate_patterns;

    fn pat(v: &[usize]) -> DetectionPattern {
        DetectionPattern::new(v.to_vec()).unwrap()
    }

    /// Direct complex evaluation of the row-product sum.
    fn pi_by_complex_sum(f: &ComplexMatrix, d: &DetectionPattern) -> C64 {
        (0..f.rows())
            .map(|i| {
                (0..f.cols())
                    .map(|j| f[(i, j)].powu(d[j] as u32))
                    .product::<C64>()
            })
            .sum()
    }

    #[test]
    fn hadamard_pi_examples() {
        let r = DecisionRule::hadamard(1);
        assert_eq!(pi_value(&r, &pat(&[2, 0])).unwrap(), 2);
        assert_eq!(pi_value(&r, &pat(&[1, 1])).unwrap(), 0);
        assert!(pi_value(&r, &pat(&[1, 1, 1])).is_err());
    }

    #[test]
    fn pi_matches_complex_sum_and_is_dichotomous() {
        for group in [vec![2, 2], vec![4], vec![3], vec![2, 4], vec![6]] {
            let rule = DecisionRule::new(GroupSpec::new(group.clone()).unwrap()).unwrap();
            let m = rule.size();
            let f = rule.exponent_table().to_complex();
            for d in enumerate_patterns(m).unwrap() {
                let exact = pi_value(&rule, &d).unwrap();
                let float = pi_by_complex_sum(&f, &d);
                assert!((float - exact as f64).norm() < 1e-9, "{group:?} {d}");
                assert!(exact == 0 || exact == m as i64);
            }
        }
    }

    #[test]
    fn accept_examples() {
        let r8 = DecisionRule::hadamard(3);
        assert_eq!(
            accept(&r8, &pat(&[8, 0, 0, 0, 0, 0, 0, 0])).unwrap(),
            Outcome::Identical
        );
        let r2 = DecisionRule::hadamard(1);
        assert_eq!(accept(&r2, &pat(&[1, 1])).unwrap().bit(), 1);
    }

    #[test]
    fn accept_agrees_with_pi_exhaustively_at_eight_modes() {
        for group in [vec![2, 2, 2], vec![8], vec![2, 4]] {
            let rule = DecisionRule::new(GroupSpec::new(group).unwrap()).unwrap();
            let all = enumerate_patterns(8).unwrap();
            assert_eq!(all.len(), 6435);
            for d in all {
                let full = pi_value(&rule, &d).unwrap() == 8;
                assert_eq!(
                    accept(&rule, &d).unwrap() == Outcome::Identical,
                    full,
                    "{d}"
                );
            }
        }
    }

    #[test]
    fn hadamard_accept_depends_only_on_parities() {
        let rule = DecisionRule::hadamard(2);
        for d in enumerate_patterns(4).unwrap() {
            // even number of -1 entries on rows 1 and 2 among odd-count columns
            let s = rule.exponent_table();
            let parity_ok = [1usize, 2].iter().all(|&row| {
                (0..4)
                    .filter(|&j| d[j] % 2 == 1 && s.exponent(row, j) == 1)
                    .count()
                    % 2
                    == 0
            });
            assert_eq!(accept(&rule, &d).unwrap() == Outcome::Identical, parity_ok);
        }
    }

    #[test]
    fn acceptance_probability_examples() {
        let r2 = DecisionRule::hadamard(1);
        let p =
            acceptance_probability(&r2, &r2.unitary(), &OverlapSpec::new(0.0).unwrap()).unwrap();
        assert!((p - 0.5).abs() < 1e-12);

        for n in 1..=3 {
            let r = DecisionRule::hadamard(n);
            let p =
                acceptance_probability(&r, &r.unitary(), &OverlapSpec::new(1.0).unwrap()).unwrap();
            assert!((p - 1.0).abs() < 1e-9);
        }

        let r3 = DecisionRule::new(GroupSpec::cyclic(3).unwrap()).unwrap();
        let p =
            acceptance_probability(&r3, &r3.unitary(), &OverlapSpec::new(0.5).unwrap()).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn acceptance_rejects_mismatched_unitary() {
        let r = DecisionRule::hadamard(2);
        let u = DecisionRule::new(GroupSpec::cyclic(4).unwrap())
            .unwrap()
            .unitary();
        assert!(matches!(
            acceptance_probability(&r, &u, &OverlapSpec::new(0.5).unwrap()),
            Err(Error::RuleMismatch(_))
        ));
        assert!(hadamard_walsh(2).max_abs_diff(&r.unitary()) < 1e-12);
    }

    #[test]
    fn equivalence_examples() {
        let r4 = DecisionRule::hadamard(2);
        let rep = equivalence_report(&r4, &r4.unitary()).unwrap();
        assert!(rep.passed(), "{:?}", rep.counterexamples);
        assert_eq!(rep.patterns_checked, 35);

        let r2 = DecisionRule::hadamard(1);
        let rep = equivalence_report(&r2, &r2.unitary()).unwrap();
        assert!(rep.passed());
        assert_eq!(pi_value(&r2, &pat(&[1, 1])).unwrap(), 0);
        assert_eq!(rep.accepted_patterns, 2);

        let r3 = DecisionRule::new(GroupSpec::cyclic(3).unwrap()).unwrap();
        let rep = equivalence_report(&r3, &r3.unitary()).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.patterns_checked, 10);
    }

    #[test]
    fn vanishing_patterns_are_not_counterexamples() {
        for n in 1..=3 {
            let r = DecisionRule::hadamard(n);
            let rep = equivalence_report(&r, &r.unitary()).unwrap();
            assert!(rep.passed() && rep.vanishing_patterns.is_empty());
        }
        let r6 = DecisionRule::new(GroupSpec::cyclic(6).unwrap()).unwrap();
        let rep = equivalence_report(&r6, &r6.unitary()).unwrap();
        assert!(rep.passed(), "{:?}", rep.counterexamples);
        assert!(rep.vanishing_patterns.contains(&pat(&[2, 1, 1, 0, 1, 1])));
        assert!(rep.vanishing_patterns.contains(&pat(&[1, 1, 1, 1, 1, 1])));
        assert_eq!(pi_value(&r6, &pat(&[2, 1, 1, 0, 1, 1])).unwrap(), 6);
        assert_eq!(pi_value(&r6, &pat(&[1, 1, 1, 1, 1, 1])).unwrap(), 0);
        assert!(rep.max_saturation_gap < 1e-12);
    }

    #[test]
    fn permuted_modes_keep_acceptance() {
        let rule = DecisionRule::hadamard(2);
        let permuted = rule.permute_modes(&[2, 0, 3, 1]).unwrap();
        for c in [0.0, 0.3, 1.0] {
            let o = OverlapSpec::new(c).unwrap();
            let a = acceptance_probability(&rule, &rule.unitary(), &o).unwrap();
            let b = acceptance_probability(&permuted, &permuted.unitary(), &o).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn from_parts_validation() {
        let g = GroupSpec::new(vec![2, 4]).unwrap();
        let table = group_unitary(&g);
        assert!(DecisionRule::from_parts(g.clone(), vec![1], table.clone()).is_err());
        assert!(DecisionRule::from_parts(g.clone(), vec![4, 1], table.clone()).is_ok());
        assert!(DecisionRule::from_parts(g.clone(), vec![9], table).is_err());
        let wrong = group_unitary(&GroupSpec::cyclic(4).unwrap());
        assert!(DecisionRule::from_parts(g, vec![1], wrong).is_err());
    }
}
