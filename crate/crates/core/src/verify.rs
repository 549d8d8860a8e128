//! Dense channel-level checks for small circuits.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::circuit::Circuit;
use crate::distances::mean_stderr;
use crate::error::{Error, Result};
use crate::protocol::ReplacementPlan;
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::sim::{
    apply_gate, apply_mixed_phase, apply_to_state, check_cap, identity_register,
    register_to_matrix, unitary_of, C64,
};
use crate::trace_ascent::{AscentOptions, UnitaryMixtureDifference};

pub const SUPEROPERATOR_CAP: usize = 5;
pub const DENSITY_CAP: usize = 8;
pub const LOWER_BOUND_CAP: usize = 4;

/// Row-major vectorized channel: `vec(E(ρ)) = S · vec(ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    width: usize,
    matrix: DMatrix<C64>,
}

/// Choi state `Σ_ij E(|i⟩⟨j|) ⊗ |i⟩⟨j| / d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiState {
    matrix: DMatrix<C64>,
}

fn vec_row_major(m: &DMatrix<C64>) -> Vec<C64> {
    let (r, c) = m.shape();
    (0..r * c).map(|k| m[(k / c, k % c)]).collect()
}

impl Superoperator {
    pub fn identity(width: usize) -> Result<Self> {
        check_cap("superoperator", width, SUPEROPERATOR_CAP)?;
        let d2 = 1usize << (2 * width);
        Ok(Superoperator {
            width,
            matrix: DMatrix::identity(d2, d2),
        })
    }

    /// Wraps a raw `d² × d²` matrix.
    pub fn from_matrix(width: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let d2 = 1usize << (2 * width);
        if matrix.shape() != (d2, d2) {
            return Err(Error::DimensionMismatch(d2, matrix.nrows()));
        }
        Ok(Superoperator { width, matrix })
    }

    /// `ρ ↦ UρU†`.
    pub fn of_unitary(u: &DMatrix<C64>) -> Result<Self> {
        let d = u.nrows();
        let width = d.trailing_zeros() as usize;
        if u.ncols() != d || 1usize << width != d {
            return Err(Error::DimensionMismatch(d, u.ncols()));
        }
        Ok(Superoperator {
            width,
            matrix: u.kronecker(&u.map(|z| z.conj())),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        1 << self.width
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let d = self.dim();
        if rho.shape() != (d, d) {
            return Err(Error::DimensionMismatch(d, rho.nrows()));
        }
        let v = &self.matrix * nalgebra::DVector::from_vec(vec_row_major(rho));
        Ok(DMatrix::from_row_slice(d, d, v.as_slice()))
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Superoperator) -> Result<Self> {
        if self.width != next.width {
            return Err(Error::DimensionMismatch(self.dim(), next.dim()));
        }
        Ok(Superoperator {
            width: self.width,
            matrix: &next.matrix * &self.matrix,
        })
    }

    /// Weighted sum `Σ w_k E_k`.
    pub fn weighted_sum(terms: &[(f64, Superoperator)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::param("weighted sum needs at least one channel"))?;
        let mut acc = DMatrix::zeros(first.1.matrix.nrows(), first.1.matrix.ncols());
        for (w, s) in terms {
            if s.width != first.1.width {
                return Err(Error::DimensionMismatch(first.1.dim(), s.dim()));
            }
            acc += &s.matrix * C64::new(*w, 0.0);
        }
        Ok(Superoperator {
            width: first.1.width,
            matrix: acc,
        })
    }

    /// `C[(a,i),(b,j)] = S[(a,b),(i,j)]`, positive semidefinite iff the map is CP.
    fn reshuffled(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d * d, d * d, |r, c| {
            let (a, i) = (r / d, r % d);
            let (b, j) = (c / d, c % d);
            self.matrix[(a * d + b, i * d + j)]
        })
    }

    pub fn choi(&self) -> ChoiState {
        ChoiState {
            matrix: self.reshuffled() / C64::new(self.dim() as f64, 0.0),
        }
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| {
                let s: C64 = (0..d).map(|a| self.matrix[(a * d + a, i * d + j)]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                (s - C64::new(want, 0.0)).norm() <= tol
            })
        })
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.choi().min_eigenvalue() >= -tol
    }

    /// Kraus operators `K` with `E(ρ) = Σ KρK†`, from the eigenvectors of the
    /// reshuffled matrix. Eigenvalues at or below `tol` are dropped.
    pub fn kraus(&self, tol: f64) -> Vec<DMatrix<C64>> {
        let d = self.dim();
        let c = self.reshuffled();
        let c = (&c + c.adjoint()) * C64::new(0.5, 0.0);
        let eig = c.symmetric_eigen();
        eig.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > tol)
            .map(|(k, &l)| {
                let v = eig.eigenvectors.column(k);
                DMatrix::from_fn(d, d, |a, i| v[a * d + i] * l.sqrt())
            })
            .collect()
    }
}

impl ChoiState {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).norm() <= tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn superoperator_register(width: usize, base: &Circuit, plan: Option<&ReplacementPlan>) -> Result<Superoperator> {
    check_cap("superoperator", width, SUPEROPERATOR_CAP)?;
    let n = 4 * width;
    let d2 = 1usize << (2 * width);
    let mut reg = identity_register(2 * width);
    let mixed = mixed_positions(base.len(), plan);
    for (i, g) in base.gates().iter().enumerate() {
        match mixed[i] {
            Some((q, p, theta)) => apply_mixed_phase(&mut reg, n, q, width + q, p, theta),
            None => {
                apply_gate(&mut reg, n, g, 0, false);
                apply_gate(&mut reg, n, g, width, true);
            }
        }
    }
    Ok(Superoperator {
        width,
        matrix: register_to_matrix(&reg, d2, d2),
    })
}

/// Per-gate replacement data `(qubit, p, θ̃)` at accepted positions.
fn mixed_positions(len: usize, plan: Option<&ReplacementPlan>) -> Vec<Option<(usize, f64, f64)>> {
    let mut out = vec![None; len];
    if let Some(plan) = plan {
        for c in plan.accepted() {
            out[c.gate_index] = Some((c.qubit, plan.p(), c.theta_tilde));
        }
    }
    out
}

/// Superoperator of a unitary circuit, gate by gate. Capped at width 5.
pub fn superoperator_of(c: &Circuit) -> Result<Superoperator> {
    superoperator_register(c.width(), c, None)
}

/// The ensemble-average channel of a plan: each accepted position becomes
/// `ρ ↦ pρ + (1−p) Z_θ̃ ρ Z_θ̃†` (plain deletion in squash mode).
pub fn mixed_channel_superoperator(plan: &ReplacementPlan) -> Result<Superoperator> {
    superoperator_register(plan.base().width(), plan.base(), Some(plan))
}

/// `½ √(‖J₁ − J₂‖_F² + tr[(E₁(τ) − E₂(τ))²])` with `τ = I/d`.
pub fn avg_case_distance(e1: &Superoperator, e2: &Superoperator) -> Result<f64> {
    if e1.width != e2.width {
        return Err(Error::DimensionMismatch(e1.dim(), e2.dim()));
    }
    let d = e1.dim();
    let diff = &e1.matrix - &e2.matrix;
    // the Choi matrix is a permutation of S scaled by 1/d
    let choi_sq = diff.norm_squared() / (d * d) as f64;
    let tau = DMatrix::<C64>::identity(d, d) / C64::new(d as f64, 0.0);
    let out = Superoperator {
        width: e1.width,
        matrix: diff,
    }
    .apply(&tau)?;
    // the output difference is Hermitian, so tr(X²) = ‖X‖_F²
    Ok(0.5 * (choi_sq + out.norm_squared()).sqrt())
}

fn haar_state<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= n;
    }
    v
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Exact `‖φφ† − Ē(ψψ†)‖_F` by evolving the density matrix.
fn frobenius_density(plan: &ReplacementPlan, psi: &[C64], phi: &[C64]) -> f64 {
    let l = plan.base().width();
    let n = 2 * l;
    let d = psi.len();
    let mut rho: Vec<C64> = (0..d * d).map(|k| psi[k / d] * psi[k % d].conj()).collect();
    let mixed = mixed_positions(plan.base().len(), Some(plan));
    for (i, g) in plan.base().gates().iter().enumerate() {
        match mixed[i] {
            Some((q, p, theta)) => apply_mixed_phase(&mut rho, n, q, l + q, p, theta),
            None => {
                apply_gate(&mut rho, n, g, 0, false);
                apply_gate(&mut rho, n, g, l, true);
            }
        }
    }
    rho.iter()
        .enumerate()
        .map(|(k, r)| (phi[k / d] * phi[k % d].conj() - r).norm_sqr())
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// `‖φφ† − σ‖_F` with `σ` estimated from sampled instance outputs. The
/// purity `tr σ²` uses distinct pairs only, which removes the shot-noise bias.
fn frobenius_sampled<R: Rng>(plan: &ReplacementPlan, psi: &[C64], phi: &[C64], shots: usize, rng: &mut R) -> f64 {
    let outs: Vec<Vec<C64>> = (0..shots)
        .map(|_| {
            let mut v = psi.to_vec();
            apply_to_state(&plan.instance(&plan.draw_deletions(rng)), &mut v);
            v
        })
        .collect();
    let m = shots as f64;
    let overlap: f64 = outs.iter().map(|o| inner(phi, o).norm_sqr()).sum::<f64>() / m;
    let purity = if shots < 2 {
        1.0
    } else {
        let mut pairs = 0.0;
        for (i, a) in outs.iter().enumerate() {
            for b in &outs[i + 1..] {
                pairs += inner(a, b).norm_sqr();
            }
        }
        2.0 * pairs / (m * (m - 1.0))
    };
    (1.0 - 2.0 * overlap + purity).max(0.0).sqrt()
}

fn frobenius_estimate(
    original: &Circuit,
    plan: &ReplacementPlan,
    n_states: usize,
    sampled_shots: Option<usize>,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_states == 0 {
        return Err(Error::param("need at least one state"));
    }
    if original.width() != plan.base().width() {
        return Err(Error::DimensionMismatch(original.width(), plan.base().width()));
    }
    if plan.accepted().is_empty() && original == plan.base() {
        return Ok((0.0, 0.0));
    }
    let dim = 1usize << original.width();
    let values: Vec<f64> = (0..n_states)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_from_seed(derive_seed(seed, stream::FROBENIUS, k as u64));
            let psi = haar_state(&mut rng, dim);
            let mut phi = psi.clone();
            apply_to_state(original, &mut phi);
            match sampled_shots {
                None => frobenius_density(plan, &psi, &phi),
                Some(shots) => frobenius_sampled(plan, &psi, &phi, shots, &mut rng),
            }
        })
        .collect();
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    Ok(mean_stderr(sum, sum_sq, n_states))
}

/// As [`frobenius_mc_full`] but always approximating the mixed channel by
/// `n_shots_per_state` sampled instances per state, at any width.
pub fn frobenius_mc_sampled(
    original: &Circuit,
    plan: &ReplacementPlan,
    n_states: usize,
    n_shots_per_state: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    frobenius_estimate(original, plan, n_states, Some(n_shots_per_state.max(1)), seed)
}

/// Monte-Carlo mean and standard error of `‖Uψψ†U† − Ē(ψψ†)‖_F` over Haar
/// states. Up to width 8 the mixed channel is applied exactly; beyond that it
/// is approximated by `n_shots_per_state` sampled instances per state.
pub fn frobenius_mc_full(
    original: &Circuit,
    plan: &ReplacementPlan,
    n_states: usize,
    n_shots_per_state: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let sampled = (original.width() > DENSITY_CAP).then_some(n_shots_per_state.max(1));
    frobenius_estimate(original, plan, n_states, sampled, seed)
}

/// Subadditive bound: the total price of the accepted replacements.
pub fn diamond_upper_bound(plan: &ReplacementPlan) -> f64 {
    plan.spent()
}

/// Best trace distance found between `(U⊗I)|u⟩` and `(Ē⊗Id)(|u⟩⟨u|)` over
/// pure inputs on the doubled space. Any value returned is a valid lower
/// bound on the diamond distance. Capped at width 4.
pub fn diamond_lower_bound(
    original: &Circuit,
    plan: &ReplacementPlan,
    n_restarts: usize,
    seed: u64,
) -> Result<f64> {
    let l = original.width();
    check_cap("diamond_lower_bound", l, LOWER_BOUND_CAP)?;
    if plan.base().width() != l {
        return Err(Error::DimensionMismatch(l, plan.base().width()));
    }
    let u = unitary_of(original)?;
    if plan.accepted().is_empty() && original == plan.base() {
        return Ok(0.0);
    }
    let d = 1usize << l;
    let k = plan.accepted().len();

    let mut terms = vec![(1.0, u)];
    if k < 2 * l {
        // fewer patterns than a generic Kraus decomposition
        for mask in 0..1usize << k {
            let deleted: Vec<bool> = (0..k).map(|b| mask >> b & 1 == 1).collect();
            let w = plan.pattern_weight(&deleted);
            if w > 0.0 {
                terms.push((-w, unitary_of(&plan.instance(&deleted))?));
            }
        }
    } else {
        let channel = mixed_channel_superoperator(plan)?;
        terms.extend(channel.kraus(1e-13).into_iter().map(|kr| (-1.0, kr)));
    }
    let map = UnitaryMixtureDifference::new(d, terms);
    let res = map.maximize(&AscentOptions {
        restarts: n_restarts.max(1),
        seed: derive_seed(seed, stream::LOWER_BOUND, 0),
        ..AscentOptions::default()
    });
    Ok(res.value)
}

/// Labeled distance figures for one plan.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DistanceReport {
    pub d_upper: f64,
    pub d_lower_est: Option<f64>,
    pub frobenius_mc: Option<(f64, f64)>,
    pub avg_case: Option<f64>,
}

impl std::fmt::Display for DistanceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "d_upper={}", self.d_upper)?;
        if let Some(v) = self.d_lower_est {
            writeln!(f, "d_lower_est={v}")?;
        }
        if let Some((m, e)) = self.frobenius_mc {
            writeln!(f, "frobenius_mc={m}")?;
            writeln!(f, "frobenius_mc_err={e}")?;
        }
        if let Some(v) = self.avg_case {
            writeln!(f, "avg_case={v}")?;
        }
        Ok(())
    }
}
