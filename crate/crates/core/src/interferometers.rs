//! Hadamard-Walsh, Fourier and abelian-group interferometers, and the
//! balanced-beam-splitter network realizing the Hadamard-Walsh transform.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_bijection, ComplexMatrix, RootOfUnityMatrix, C64};

/// Invariant factors `(a_1, …, a_N)` of a finite abelian group
/// `Z/a_1 × … × Z/a_N` with `a_i | a_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GroupSpec {
    factors: Vec<usize>,
}

impl GroupSpec {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGroup("no invariant factors".into()));
        }
        if factors.contains(&0) {
            return Err(Error::InvalidGroup(format!(
                "{factors:?} contains a zero factor"
            )));
        }
        if let Some(w) = factors.windows(2).find(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidGroup(format!(
                "{} does not divide {} in {factors:?}",
                w[0], w[1]
            )));
        }
        factors
            .iter()
            .try_fold(1usize, |acc, &a| acc.checked_mul(a))
            .ok_or_else(|| Error::InvalidGroup(format!("order of {factors:?} overflows")))?;
        Ok(Self { factors })
    }

    /// `(Z/2)^n`, the Hadamard-Walsh group.
    pub fn hadamard(n: usize) -> Self {
        if n == 0 {
            Self { factors: vec![1] }
        } else {
            Self {
                factors: vec![2; n],
            }
        }
    }

    pub fn cyclic(order: usize) -> Result<Self> {
        Self::new(vec![order])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    /// Group order `M`.
    pub fn order(&self) -> usize {
        self.factors.iter().product()
    }

    /// Common exponent order of the tensor product: the largest factor.
    pub fn exponent(&self) -> usize {
        *self.factors.last().expect("validated non-empty")
    }

    /// `Some(n)` when the group is `(Z/2)^n`.
    pub fn hadamard_rank(&self) -> Option<usize> {
        if self.factors == [1] {
            Some(0)
        } else if self.factors.iter().all(|&a| a == 2) {
            Some(self.factors.len())
        } else {
            None
        }
    }
}

impl TryFrom<Vec<usize>> for GroupSpec {
    type Error = Error;

    fn try_from(factors: Vec<usize>) -> Result<Self> {
        Self::new(factors)
    }
}

impl From<GroupSpec> for Vec<usize> {
    fn from(g: GroupSpec) -> Self {
        g.factors
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidGroup(format!("bad factor {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Hadamard-Walsh transform `H_n`, built by the doubling recursion
/// `H_{k+1} = [[H_k, H_k], [H_k, -H_k]] / √2` from `H_0 = [1]`.
pub fn hadamard_walsh(n: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = ComplexMatrix::identity(1);
    for _ in 0..n {
        let half = h.rows();
        h = ComplexMatrix::from_fn(2 * half, 2 * half, |i, j| {
            let z = h[(i % half, j % half)] * s;
            if i >= half && j >= half {
                -z
            } else {
                z
            }
        });
    }
    h
}

/// Unnormalized Fourier matrix `F_a = (ω^{kl})`, `ω = e^{2πi/a}`.
///
/// # Panics
/// If `a == 0`.
pub fn qft(a: usize) -> RootOfUnityMatrix {
    RootOfUnityMatrix::from_fn(a, a, a, |k, l| (k * l) % a)
}

/// `F_G = F_{a_1} ⊗ … ⊗ F_{a_N}` in exponent form over the common order
/// `a_N`; `a_1` indexes the most significant mixed-radix digit.
pub fn group_unitary(g: &GroupSpec) -> RootOfUnityMatrix {
    let order = g.exponent();
    let mut out = RootOfUnityMatrix::from_fn(order, 1, 1, |_, _| 0);
    for &a in g.factors() {
        out = out.kron(&qft(a));
    }
    debug_assert_eq!(out.order(), order);
    out
}

/// One generating row per nontrivial factor: the row at stride
/// `Π_{j>i} a_j`, listed in factor order.
pub fn generator_rows(g: &GroupSpec) -> Vec<usize> {
    let f = g.factors();
    (0..f.len())
        .filter(|&i| f[i] > 1)
        .map(|i| f[i + 1..].iter().product())
        .collect()
}

/// Row indices reachable from the identity row by element-wise products
/// with the given rows. `None` if some product is not a row of `table`.
pub fn row_closure(table: &RootOfUnityMatrix, generators: &[usize]) -> Option<BTreeSet<usize>> {
    let order = table.order();
    let lookup: std::collections::HashMap<&[usize], usize> =
        (0..table.rows()).map(|i| (table.row(i), i)).collect();

    let identity = vec![0usize; table.cols()];
    let mut seen: HashSet<Vec<usize>> = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    let mut rows = BTreeSet::new();
    while let Some(v) = queue.pop_front() {
        rows.insert(*lookup.get(v.as_slice())?);
        for &g in generators {
            let next: Vec<usize> = v
                .iter()
                .zip(table.row(g))
                .map(|(a, b)| (a + b) % order)
                .collect();
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Some(rows)
}

/// A column of balanced beam splitters sandwiched by a mode permutation:
/// `P (I_{M/2} ⊗ H) Pᵀ` with `P e_x = e_{perm[x]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamSplitterLayer {
    permutation: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

impl BeamSplitterLayer {
    pub fn new(permutation: Vec<usize>) -> Result<Self> {
        check_bijection(&permutation)?;
        if !permutation.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "beam-splitter layer over an odd number of modes ({})",
                permutation.len()
            )));
        }
        let pairs = permutation.chunks(2).map(|p| (p[0], p[1])).collect();
        Ok(Self { permutation, pairs })
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Mode pairs `(upper, lower)`; the lower mode picks up the minus sign.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn modes(&self) -> usize {
        self.permutation.len()
    }

    pub fn unitary(&self) -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = ComplexMatrix::zeros(self.modes(), self.modes());
        for &(a, b) in &self.pairs {
            u[(a, a)] = C64::new(s, 0.0);
            u[(a, b)] = C64::new(s, 0.0);
            u[(b, a)] = C64::new(s, 0.0);
            u[(b, b)] = C64::new(-s, 0.0);
        }
        u
    }
}

/// Network of beam-splitter layers over `size` modes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    size: usize,
    layers: Vec<BeamSplitterLayer>,
}

impl Decomposition {
    pub fn new(size: usize, layers: Vec<BeamSplitterLayer>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument(
                "decomposition over zero modes".into(),
            ));
        }
        if let Some(l) = layers.iter().find(|l| l.modes() != size) {
            return Err(Error::Dimension(format!(
                "layer over {} modes in a {size}-mode network",
                l.modes()
            )));
        }
        Ok(Self { size, layers })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn layers(&self) -> &[BeamSplitterLayer] {
        &self.layers
    }

    pub fn beam_splitter_count(&self) -> usize {
        self.layers.iter().map(|l| l.pairs().len()).sum()
    }
}

/// Balanced-beam-splitter network for `H_n`: `n` layers, `M·n/2`
/// splitters and no phase shifters.
///
/// Built by induction on `n`: each existing layer permutation `P` is
/// lifted to `Q(I_2 ⊗ P)` with `Q` the perfect shuffle
/// `e_{2^n b + x} ↦ e_{2x + b}`, and a final identity layer is appended.
pub fn decompose_hadamard(n: usize) -> Decomposition {
    let mut perms: Vec<Vec<usize>> = Vec::new();
    for step in 0..n {
        let half = 1usize << step;
        for p in perms.iter_mut() {
            *p = (0..2 * half).map(|y| 2 * p[y % half] + y / half).collect();
        }
        perms.push((0..2 * half).collect());
    }
    let layers = perms
        .into_iter()
        .map(|p| BeamSplitterLayer::new(p).expect("shuffle lifts preserve bijectivity"))
        .collect();
    Decomposition::new(1 << n, layers).expect("layers built at the network size")
}

/// Product `L_0 · L_1 · … · L_{n-1}` of the layer unitaries.
pub fn reconstruct(d: &Decomposition) -> ComplexMatrix {
    d.layers()
        .iter()
        .fold(ComplexMatrix::identity(d.size()), |acc, layer| {
            acc.matmul(&layer.unitary()).expect("layer sizes validated")
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::is_unitary;

    fn h() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap()
    }

    #[test]
    fn hadamard_small_orders() {
        assert_eq!(hadamard_walsh(0), ComplexMatrix::identity(1));
        assert!(hadamard_walsh(1).max_abs_diff(&h()) < 1e-15);
        // tensor-product oracle
        assert!(hadamard_walsh(2).max_abs_diff(&h().kron(&h())) < 1e-15);
        assert!(hadamard_walsh(3).max_abs_diff(&h().kron(&h()).kron(&h())) < 1e-15);
    }

    #[test]
    fn hadamard_is_unitary_with_flat_entries() {
        for n in 0..=6 {
            let hn = hadamard_walsh(n);
            assert!(is_unitary(&hn, 1e-12));
            let scale = (1u64 << n) as f64;
            assert!(hn
                .as_slice()
                .iter()
                .all(|z| (z.norm() * scale.sqrt() - 1.0).abs() < 1e-12 && z.im == 0.0));
        }
    }

    #[test]
    fn qft_cases() {
        assert_eq!(qft(2).row(0), &[0, 0]);
        assert_eq!(qft(2).row(1), &[0, 1]);
        assert!(qft(2).to_complex().max_abs_diff(&h().scale(2f64.sqrt())) < 1e-15);
        assert_eq!(qft(1).row(0), &[0]);
        for a in 1..=7 {
            assert!(is_unitary(
                &qft(a).to_complex_scaled(1.0 / (a as f64).sqrt()),
                1e-12
            ));
        }
    }

    #[test]
    fn group_spec_validation() {
        assert!(GroupSpec::new(vec![2, 4]).is_ok());
        assert!(GroupSpec::new(vec![4, 2]).is_err());
        assert!(GroupSpec::new(vec![2, 3]).is_err());
        assert!(GroupSpec::new(vec![]).is_err());
        assert!(GroupSpec::new(vec![0]).is_err());
        assert_eq!(
            "2, 2,2".parse::<GroupSpec>().unwrap(),
            GroupSpec::hadamard(3)
        );
        assert!("2,x".parse::<GroupSpec>().is_err());
        assert_eq!(GroupSpec::new(vec![2, 4]).unwrap().order(), 8);
        assert_eq!(GroupSpec::new(vec![3, 6]).unwrap().to_string(), "(3,6)");
    }

    #[test]
    fn group_unitary_special_cases() {
        for n in 1..=4 {
            let f = group_unitary(&GroupSpec::hadamard(n));
            let expected = hadamard_walsh(n).scale(((1 << n) as f64).sqrt());
            assert!(f.to_complex().max_abs_diff(&expected) < 1e-12);
        }
        for m in 1..=9 {
            assert_eq!(group_unitary(&GroupSpec::cyclic(m).unwrap()), qft(m));
        }
    }

    #[test]
    fn mixed_group_rows_are_closed() {
        let g = GroupSpec::new(vec![2, 4]).unwrap();
        let f = group_unitary(&g);
        assert_eq!(f.order(), 4);
        let rows: HashSet<&[usize]> = (0..8).map(|i| f.row(i)).collect();
        assert_eq!(rows.len(), 8);
        for i in 0..8 {
            for j in 0..8 {
                let prod: Vec<usize> = f
                    .row(i)
                    .iter()
                    .zip(f.row(j))
                    .map(|(a, b)| (a + b) % 4)
                    .collect();
                assert!(rows.contains(prod.as_slice()), "rows {i}*{j} not closed");
            }
        }
    }

    #[test]
    fn generator_examples() {
        let set = |g: &GroupSpec| generator_rows(g).into_iter().collect::<BTreeSet<_>>();
        assert_eq!(set(&GroupSpec::hadamard(2)), BTreeSet::from([1, 2]));
        assert_eq!(generator_rows(&GroupSpec::cyclic(5).unwrap()), vec![1]);
        let g = GroupSpec::new(vec![2, 4]).unwrap();
        assert_eq!(generator_rows(&g), vec![4, 1]);
        let closure = row_closure(&group_unitary(&g), &generator_rows(&g)).unwrap();
        assert_eq!(closure, (0..8).collect());
        assert_eq!(
            set(&GroupSpec::hadamard(5)),
            (0..5).map(|k| 1 << k).collect()
        );
    }

    #[test]
    fn closure_detects_insufficient_generators() {
        let g = GroupSpec::new(vec![2, 4]).unwrap();
        let f = group_unitary(&g);
        assert_eq!(row_closure(&f, &[1]).unwrap().len(), 4);
        assert_eq!(row_closure(&f, &[]).unwrap(), BTreeSet::from([0]));
    }

    #[test]
    fn decomposition_small_cases() {
        let d1 = decompose_hadamard(1);
        assert_eq!(d1.layers().len(), 1);
        assert_eq!(d1.layers()[0].permutation(), &[0, 1]);
        assert_eq!(d1.layers()[0].pairs(), &[(0, 1)]);
        assert!(reconstruct(&d1).max_abs_diff(&h()) < 1e-15);

        let d2 = decompose_hadamard(2);
        assert_eq!(d2.layers().len(), 2);
        assert_eq!(d2.beam_splitter_count(), 4);

        let empty = Decomposition::new(1, vec![]).unwrap();
        assert_eq!(reconstruct(&empty), ComplexMatrix::identity(1));
        assert_eq!(decompose_hadamard(0), empty);
    }

    #[test]
    fn decomposition_reconstructs_hadamard() {
        for n in 1..=6 {
            let d = decompose_hadamard(n);
            let m = 1 << n;
            assert_eq!(d.layers().len(), n);
            assert_eq!(d.beam_splitter_count(), m * n / 2);
            assert!(
                reconstruct(&d).max_abs_diff(&hadamard_walsh(n)) < 1e-12,
                "n={n}"
            );
        }
    }

    #[test]
    fn layer_matches_conjugated_block_diagonal() {
        // P (I ⊗ H) Pᵀ built with explicit matrices
        let layer = BeamSplitterLayer::new(vec![0, 2, 1, 3]).unwrap();
        let p = ComplexMatrix::permutation(layer.permutation()).unwrap();
        let block = ComplexMatrix::identity(2).kron(&h());
        let explicit = p.matmul(&block).unwrap().matmul(&p.transpose()).unwrap();
        assert!(layer.unitary().max_abs_diff(&explicit) < 1e-15);
    }

    #[test]
    fn layers_reject_bad_permutations() {
        assert!(BeamSplitterLayer::new(vec![0, 0]).is_err());
        assert!(BeamSplitterLayer::new(vec![0, 1, 2]).is_err());
        let l = BeamSplitterLayer::new(vec![1, 0]).unwrap();
        assert!(Decomposition::new(4, vec![l]).is_err());
    }
}
