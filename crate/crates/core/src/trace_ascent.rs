//! Multi-start ascent for `max_u ‖Δ(|u⟩⟨u|)‖₁` where
//! `Δ(M) = Σ_k c_k (V_k ⊗ I) M (V_k ⊗ I)†` is a weighted difference of
//! unitary conjugations on a doubled space `C^d ⊗ C^d`.
//!
//! A doubled vector `u` is held as a `d × d` matrix `X` (system index on rows,
//! ancilla on columns). Every feasible `u` gives a lower bound on the diamond
//! norm of the map. Each step fixes the sign operator `P` of the current
//! output and moves `u` along `Δ*(P)u`; with a large enough shift this is a
//! power-iteration step on a positive operator, so the objective never drops.

use nalgebra::DMatrix;
use rand_distr::StandardNormal;

use crate::rng::rng_from_seed;
use crate::sim::C64;

pub(crate) struct UnitaryMixtureDifference {
    dim: usize,
    terms: Vec<(f64, DMatrix<C64>)>,
}

pub(crate) struct AscentResult {
    pub value: f64,
    pub argmax: DMatrix<C64>,
}

struct Eval {
    value: f64,
    direction: DMatrix<C64>,
}

pub(crate) struct AscentOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub polish_rounds: usize,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            restarts: 32,
            max_iter: 400,
            tol: 1e-9,
            polish_rounds: 24,
            seed: 0x00d1_a770,
        }
    }
}

fn normalize(x: &mut DMatrix<C64>) {
    let n = x.norm();
    if n > 0.0 {
        *x /= C64::new(n, 0.0);
    }
}

fn random_unit<R: rand::Rng>(rng: &mut R, d: usize) -> DMatrix<C64> {
    let mut x = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    normalize(&mut x);
    x
}

impl UnitaryMixtureDifference {
    pub fn new(dim: usize, terms: Vec<(f64, DMatrix<C64>)>) -> Self {
        debug_assert!(terms.iter().all(|(_, v)| v.shape() == (dim, dim)));
        UnitaryMixtureDifference { dim, terms }
    }

    fn weight_bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    fn evaluate(&self, x: &DMatrix<C64>) -> Eval {
        let d = self.dim;
        let n = d * d;
        let r = self.terms.len();
        let outputs: Vec<DMatrix<C64>> = self.terms.iter().map(|(_, v)| v * x).collect();
        let a = DMatrix::from_fn(n, r, |i, k| outputs[k][(i / d, i % d)]);
        let qr = a.qr();
        let q = qr.q();
        let rmat = qr.r();
        let weights = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            r,
            self.terms.iter().map(|(c, _)| C64::new(*c, 0.0)),
        ));
        let mut h = &rmat * weights * rmat.adjoint();
        // symmetrize away rounding before the Hermitian solver
        h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let value: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();
        let signs = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues
                .iter()
                .map(|&l| C64::new(if l > 0.0 { 1.0 } else if l < 0.0 { -1.0 } else { 0.0 }, 0.0)),
        ));
        let e = &eig.eigenvectors;
        // P y_k = Q E sgn E† R e_k for every term at once
        let p_outputs = &q * (e * signs * e.adjoint() * &rmat);
        let mut direction = DMatrix::zeros(d, d);
        for (k, (c, v)) in self.terms.iter().enumerate() {
            let py = DMatrix::from_fn(d, d, |i, j| p_outputs[(i * d + j, k)]);
            direction += v.adjoint() * py * C64::new(*c, 0.0);
        }
        Eval { value, direction }
    }

    pub fn value(&self, x: &DMatrix<C64>) -> f64 {
        self.evaluate(x).value
    }

    fn ascend_from(&self, mut x: DMatrix<C64>, opts: &AscentOptions) -> (f64, DMatrix<C64>) {
        let cap = self.weight_bound().max(1e-300);
        let mut shift = cap / 64.0;
        let mut cur = self.evaluate(&x);
        let mut stalled = 0;
        for _ in 0..opts.max_iter {
            let mut next_x = &cur.direction + &x * C64::new(shift, 0.0);
            normalize(&mut next_x);
            let next = self.evaluate(&next_x);
            if next.value < cur.value && shift < cap {
                shift = (shift * 4.0).min(cap);
                continue;
            }
            let gain = next.value - cur.value;
            x = next_x;
            cur = next;
            shift = (shift * 0.5).max(cap * 1e-6);
            if gain.abs() <= opts.tol * 1e-3 * cur.value.max(1e-300) {
                stalled += 1;
                if stalled >= 3 {
                    break;
                }
            } else {
                stalled = 0;
            }
        }
        (cur.value, x)
    }

    /// Gradient-free refinement: random perturbations at shrinking scales,
    /// kept only when they improve the objective.
    fn polish<R: rand::Rng>(
        &self,
        rng: &mut R,
        mut best: (f64, DMatrix<C64>),
        rounds: usize,
    ) -> (f64, DMatrix<C64>) {
        let d = self.dim;
        for scale in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            for _ in 0..rounds {
                let mut trial = &best.1 + random_unit(rng, d) * C64::new(scale, 0.0);
                normalize(&mut trial);
                let v = self.value(&trial);
                if v > best.0 {
                    best = (v, trial);
                }
            }
        }
        best
    }

    pub fn maximize(&self, opts: &AscentOptions) -> AscentResult {
        let mut rng = rng_from_seed(opts.seed);
        let mut best: Option<(f64, DMatrix<C64>)> = None;
        for _ in 0..opts.restarts.max(1) {
            let start = random_unit(&mut rng, self.dim);
            let found = self.ascend_from(start, opts);
            if best.as_ref().is_none_or(|b| found.0 > b.0) {
                best = Some(found);
            }
        }
        let best = best.expect("at least one restart");
        let (value, argmax) = self.polish(&mut rng, best, opts.polish_rounds);
        AscentResult { value, argmax }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(entries: &[C64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries))
    }

    #[test]
    fn identical_terms_give_zero() {
        let i = DMatrix::<C64>::identity(2, 2);
        let map = UnitaryMixtureDifference::new(2, vec![(1.0, i.clone()), (-1.0, i)]);
        let res = map.maximize(&AscentOptions::default());
        assert!(res.value < 1e-12);
    }

    #[test]
    fn orthogonal_unitaries_reach_two() {
        // Z vs I on one qubit: perfectly distinguishable with |+>
        let one = C64::new(1.0, 0.0);
        let z = diag(&[one, -one]);
        let i = DMatrix::<C64>::identity(2, 2);
        let map = UnitaryMixtureDifference::new(2, vec![(1.0, z), (-1.0, i)]);
        let res = map.maximize(&AscentOptions::default());
        assert!((res.value - 2.0).abs() < 1e-8, "{}", res.value);
    }
}
