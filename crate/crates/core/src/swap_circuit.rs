//! Statevector simulation of the controlled-swap circuit of order `M`, and
//! the symmetric-subspace bound on one-sided-error identity tests.
//!
//! Layout: `n = log2 M` ancilla qubits form the most significant index
//! block (ancilla `k` is bit `k` of that block); the `M` registers of
//! local dimension `d` follow, register 0 most significant. Register 0
//! carries φ, registers `1..M` carry ψ.

use itertools::Itertools;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_bijection, permanent_naive, ComplexMatrix, C64};
use crate::pattern::factorial;
use crate::photon_stats::{inner, norm_sqr};

/// Largest statevector (ancillas included) the simulator will allocate.
pub const MAX_AMPLITUDES: usize = 1 << 22;
/// Largest tuple accepted by [`symmetric_bound`].
pub const MAX_BOUND_STATES: usize = 6;
/// Largest Hilbert-space dimension for [`symmetric_projector`].
pub const MAX_PROJECTOR_DIM: usize = 1024;
/// Normalization tolerance for input states.
pub const INPUT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutVariant {
    /// `S_k`: `M/2` swaps per layer, layers commute.
    Full,
    /// `S'_k`: `2^k` swaps in layer `k`, applied in ascending order.
    Simplified,
}

/// Register swaps conditioned on one ancilla.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapLayer {
    pub control: usize,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitLayout {
    registers: usize,
    variant: LayoutVariant,
    layers: Vec<SwapLayer>,
}

impl CircuitLayout {
    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn ancillas(&self) -> usize {
        self.layers.len()
    }

    pub fn variant(&self) -> LayoutVariant {
        self.variant
    }

    pub fn layers(&self) -> &[SwapLayer] {
        &self.layers
    }

    pub fn swap_count(&self) -> usize {
        self.layers.iter().map(|l| l.pairs.len()).sum()
    }

    /// Layers applied in the order `order[0], order[1], …`, each keeping
    /// its control ancilla. Only meaningful for the full variant.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.layers.len() {
            return Err(Error::Dimension(format!(
                "order over {} layers for a {}-layer circuit",
                order.len(),
                self.layers.len()
            )));
        }
        check_bijection(order)?;
        Ok(Self {
            registers: self.registers,
            variant: self.variant,
            layers: order.iter().map(|&i| self.layers[i].clone()).collect(),
        })
    }
}

pub(crate) fn log2_exact(m: usize) -> Result<usize> {
    if m >= 2 && m.is_power_of_two() {
        Ok(m.trailing_zeros() as usize)
    } else {
        Err(Error::NotPowerOfTwo(m))
    }
}

pub fn build_layout(m: usize, variant: LayoutVariant) -> Result<CircuitLayout> {
    let n = log2_exact(m)?;
    let layers = (0..n)
        .map(|k| {
            let step = 1usize << k;
            let pairs = match variant {
                LayoutVariant::Full => (0..m >> (k + 1))
                    .flat_map(|j| {
                        (0..step).map(move |i| (j * 2 * step + i, j * 2 * step + i + step))
                    })
                    .collect(),
                LayoutVariant::Simplified => (0..step).map(|l| (l, l + step)).collect(),
            };
            SwapLayer { control: k, pairs }
        })
        .collect();
    Ok(CircuitLayout {
        registers: m,
        variant,
        layers,
    })
}

/// Registers of local dimension `d` plus qubit ancillas.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    local_dim: usize,
    register_count: usize,
    ancilla_count: usize,
    amplitudes: Vec<C64>,
}

impl QuditState {
    /// Normalized state; the squared norm must be 1 within `1e-12`.
    pub fn new(
        local_dim: usize,
        register_count: usize,
        ancilla_count: usize,
        amplitudes: Vec<C64>,
    ) -> Result<Self> {
        let state = Self::unchecked(local_dim, register_count, ancilla_count, amplitudes)?;
        let n = state.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(n));
        }
        Ok(state)
    }

    fn unchecked(
        local_dim: usize,
        register_count: usize,
        ancilla_count: usize,
        amplitudes: Vec<C64>,
    ) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "local dimension {local_dim} < 2"
            )));
        }
        let expected = local_dim
            .checked_pow(register_count as u32)
            .and_then(|r| r.checked_mul(1usize.checked_shl(ancilla_count as u32)?))
            .ok_or(Error::TooLarge {
                what: "statevector",
                size: usize::MAX,
                limit: MAX_AMPLITUDES,
            })?;
        if amplitudes.len() != expected {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {register_count} registers of dimension {local_dim} and {ancilla_count} ancillas",
                amplitudes.len()
            )));
        }
        Ok(Self {
            local_dim,
            register_count,
            ancilla_count,
            amplitudes,
        })
    }

    /// Tensor product `|s_0⟩ ⊗ … ⊗ |s_{k-1}⟩` of single-register states.
    pub fn product(states: &[&[C64]]) -> Result<Self> {
        let d = states.first().map_or(0, |s| s.len());
        if states.iter().any(|s| s.len() != d) {
            return Err(Error::Dimension("registers of unequal dimension".into()));
        }
        Self::new(d, states.len(), 0, product_state(states))
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn register_count(&self) -> usize {
        self.register_count
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancilla_count
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Squared norm; below 1 for post-selected states.
    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    fn register_dim(&self) -> usize {
        self.amplitudes.len() >> self.ancilla_count
    }

    fn hadamard(&mut self, ancilla: usize) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let stride = self.register_dim() << ancilla;
        for base in (0..self.amplitudes.len()).step_by(2 * stride) {
            for i in base..base + stride {
                let (a, b) = (self.amplitudes[i], self.amplitudes[i + stride]);
                self.amplitudes[i] = (a + b) * s;
                self.amplitudes[i + stride] = (a - b) * s;
            }
        }
    }

    fn controlled_swaps(&mut self, layer: &SwapLayer) {
        let perm = register_permutation(self.local_dim, self.register_count, &layer.pairs);
        let rd = self.register_dim();
        let mut buf = vec![C64::new(0.0, 0.0); rd];
        for a in (0..1usize << self.ancilla_count).filter(|a| a >> layer.control & 1 == 1) {
            let block = &mut self.amplitudes[a * rd..(a + 1) * rd];
            for (r, &amp) in block.iter().enumerate() {
                buf[perm[r]] = amp;
            }
            block.copy_from_slice(&buf);
        }
    }
}

/// Basis-index map of a product of register swaps.
fn register_permutation(d: usize, registers: usize, pairs: &[(usize, usize)]) -> Vec<usize> {
    let place = |k: usize| d.pow((registers - 1 - k) as u32);
    (0..d.pow(registers as u32))
        .map(|r| {
            let mut out = r;
            for &(i, j) in pairs {
                let (di, dj) = (out / place(i) % d, out / place(j) % d);
                out = out - di * place(i) - dj * place(j) + dj * place(i) + di * place(j);
            }
            out
        })
        .collect()
}

pub fn product_state(states: &[&[C64]]) -> Vec<C64> {
    states.iter().fold(vec![C64::new(1.0, 0.0)], |acc, s| {
        acc.iter()
            .flat_map(|a| s.iter().map(move |b| a * b))
            .collect()
    })
}

fn check_input(v: &[C64]) -> Result<()> {
    let n = norm_sqr(v);
    if (n - 1.0).abs() > INPUT_NORM_TOL {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// Full pre-measurement state: ancilla Hadamards, the controlled-swap
/// layers in layout order, then ancilla Hadamards again.
pub fn simulate(layout: &CircuitLayout, phi: &[C64], psi: &[C64]) -> Result<QuditState> {
    if phi.len() != psi.len() {
        return Err(Error::Dimension(format!(
            "phi has dimension {}, psi {}",
            phi.len(),
            psi.len()
        )));
    }
    check_input(phi)?;
    check_input(psi)?;
    let d = phi.len();
    let m = layout.registers();
    let n = layout.ancillas();
    let size = d
        .checked_pow(m as u32)
        .and_then(|r| r.checked_mul(1 << n))
        .filter(|&s| s <= MAX_AMPLITUDES)
        .ok_or(Error::TooLarge {
            what: "swap-circuit statevector",
            size: d.saturating_pow(m as u32).saturating_mul(1 << n),
            limit: MAX_AMPLITUDES,
        })?;

    let registers: Vec<&[C64]> = std::iter::once(phi)
        .chain(std::iter::repeat_n(psi, m - 1))
        .collect();
    let mut amplitudes = product_state(&registers);
    amplitudes.resize(size, C64::new(0.0, 0.0));
    let mut state = QuditState::unchecked(d, m, n, amplitudes)?;

    for k in 0..n {
        state.hadamard(k);
    }
    for layer in layout.layers() {
        state.controlled_swaps(layer);
    }
    for k in 0..n {
        state.hadamard(k);
    }
    Ok(state)
}

/// Unnormalized register state after projecting every ancilla onto `|0⟩`.
pub fn post_measurement_state(
    layout: &CircuitLayout,
    phi: &[C64],
    psi: &[C64],
) -> Result<QuditState> {
    let full = simulate(layout, phi, psi)?;
    let rd = full.register_dim();
    QuditState::unchecked(
        full.local_dim,
        full.register_count,
        0,
        full.amplitudes[..rd].to_vec(),
    )
}

/// Probability that every ancilla reads 0.
pub fn accept_probability(layout: &CircuitLayout, phi: &[C64], psi: &[C64]) -> Result<f64> {
    Ok(post_measurement_state(layout, phi, psi)?.norm_sqr())
}

fn gram_matrix(states: &[Vec<C64>]) -> Result<ComplexMatrix> {
    let d = states.first().map_or(0, Vec::len);
    if states.is_empty() || d == 0 || states.iter().any(|s| s.len() != d) {
        return Err(Error::Dimension(
            "states must be non-empty and of equal dimension".into(),
        ));
    }
    for s in states {
        check_input(s)?;
    }
    let m = states.len();
    Ok(ComplexMatrix::from_fn(m, m, |k, l| {
        inner(&states[k], &states[l])
    }))
}

/// `(1/M!) Σ_σ Π_k ⟨ψ_k|ψ_{σ(k)}⟩`, the permanent of the Gram matrix over `M!`.
pub fn symmetric_permutation_sum(states: &[Vec<C64>]) -> Result<C64> {
    if states.len() > MAX_BOUND_STATES {
        return Err(Error::TooLarge {
            what: "symmetric bound",
            size: states.len(),
            limit: MAX_BOUND_STATES,
        });
    }
    let gram = gram_matrix(states)?;
    Ok(permanent_naive(&gram)? / factorial(states.len()) as f64)
}

/// Lower bound on the error probability of any one-sided-error identity
/// test of the given states.
pub fn symmetric_bound(states: &[Vec<C64>]) -> Result<f64> {
    Ok(symmetric_permutation_sum(states)?.re)
}

/// Projector onto the symmetric subspace of `(C^d)^{⊗M}`,
/// `(1/M!) Σ_σ P_σ`, as an explicit matrix.
pub fn symmetric_projector(local_dim: usize, m: usize) -> Result<ComplexMatrix> {
    let dim = local_dim
        .checked_pow(m as u32)
        .filter(|&x| x <= MAX_PROJECTOR_DIM)
        .ok_or(Error::TooLarge {
            what: "symmetric projector",
            size: local_dim.saturating_pow(m as u32),
            limit: MAX_PROJECTOR_DIM,
        })?;
    let place: Vec<usize> = (0..m).map(|k| local_dim.pow((m - 1 - k) as u32)).collect();
    let weight = 1.0 / factorial(m) as f64;
    let mut p = ComplexMatrix::zeros(dim, dim);
    for sigma in (0..m).permutations(m) {
        for r in 0..dim {
            let target: usize = (0..m)
                .map(|k| (r / place[sigma[k]] % local_dim) * place[k])
                .sum();
            p[(target, r)] += C64::new(weight, 0.0);
        }
    }
    Ok(p)
}

/// `Tr[P |Ψ⟩⟨Ψ|] = ⟨Ψ|P|Ψ⟩`.
pub fn projector_expectation(p: &ComplexMatrix, state: &[C64]) -> Result<C64> {
    if p.rows() != state.len() || p.cols() != state.len() {
        return Err(Error::Dimension(format!(
            "{}x{} operator on a vector of length {}",
            p.rows(),
            p.cols(),
            state.len()
        )));
    }
    Ok((0..state.len())
        .map(|i| {
            let row: C64 = p.row(i).iter().zip(state).map(|(a, b)| a * b).sum();
            state[i].conj() * row
        })
        .sum())
}

/// Fewest reference copies `N` with `N ≥ 1/ε − 1`.
pub fn copies_lower_bound(epsilon: f64) -> Result<usize> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let x = 1.0 / epsilon - 1.0;
    let nearest = x.round();
    let n = if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    Ok(n.max(0.0) as usize)
}

/// Random pure state from normalized complex Gaussian amplitudes.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = norm_sqr(&v).sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}
