//! Budgeted greedy replacement planning and per-shot instantiation.
//!
//! Planning prices every Z-phase gate by the minimal diamond distance of its
//! mixture replacement, then walks the gates cheapest-first. A gate is accepted
//! when its price still fits in the remaining budget and deleting it (on top
//! of every earlier acceptance) lowers the simplified CNOT count. At run time
//! each accepted gate is independently deleted with probability `p` or swapped
//! for the over-rotation `Z_θ̃`, and the resulting circuit is simplified.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Angle, Circuit, Gate};
use crate::distances::{min_diamond_distance, optimal_theta};
use crate::error::{Error, Result};
use crate::generators::{qft, random_circuit, GateProbabilities};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::simplify::best_simplify;
use crate::verify;

/// Shot count used when none is given (a common hardware default).
pub const DEFAULT_SHOTS: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReplacementMode {
    /// Delete with probability `p`, otherwise over-rotate to `θ̃`.
    Mixture,
    /// Always delete (pure phase squashing, the `p = 1` limit).
    Squash,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplacementCandidate {
    pub gate_index: usize,
    pub qubit: usize,
    pub alpha: Angle,
    pub d_min: f64,
    pub theta_tilde: f64,
}

#[derive(Clone, Debug)]
pub struct ReplacementPlan {
    base: Circuit,
    mode: ReplacementMode,
    p: f64,
    epsilon: f64,
    accepted: Vec<ReplacementCandidate>,
    spent: f64,
    baseline_2q: usize,
    final_planned_2q: usize,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::param(format!(
            "error budget must be finite and non-negative, got {epsilon}"
        )));
    }
    Ok(())
}

fn check_mixture_p(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::param(format!(
            "mixture planning needs p in [0, 1), got {p}; use squash mode for p = 1"
        )));
    }
    Ok(())
}

fn price(mode: ReplacementMode, alpha: f64, p: f64) -> (f64, f64) {
    match mode {
        ReplacementMode::Mixture => (min_diamond_distance(alpha, p), optimal_theta(alpha, p)),
        ReplacementMode::Squash => (min_diamond_distance(alpha, 1.0), 0.0),
    }
}

fn candidates(c: &Circuit, mode: ReplacementMode, p: f64) -> Vec<ReplacementCandidate> {
    let mut out: Vec<ReplacementCandidate> = c
        .gates()
        .iter()
        .enumerate()
        .filter_map(|(gate_index, g)| match *g {
            Gate::ZPhase(qubit, alpha) => {
                let (d_min, theta_tilde) = price(mode, alpha.radians(), p);
                Some(ReplacementCandidate {
                    gate_index,
                    qubit,
                    alpha,
                    d_min,
                    theta_tilde,
                })
            }
            _ => None,
        })
        .collect();
    out.sort_by(|a, b| {
        a.d_min
            .total_cmp(&b.d_min)
            .then(a.gate_index.cmp(&b.gate_index))
    });
    out
}

/// `base` with the flagged gates removed.
fn without(base: &Circuit, removed: &[bool]) -> Circuit {
    let gates = base
        .gates()
        .iter()
        .zip(removed)
        .filter(|(_, &r)| !r)
        .map(|(g, _)| *g)
        .collect();
    Circuit::from_gates(base.width(), gates).expect("subset of a valid circuit")
}

fn greedy(c: &Circuit, epsilon: f64, p: f64, mode: ReplacementMode) -> ReplacementPlan {
    let baseline_2q = best_simplify(c).two_qubit_count();
    let mut removed = vec![false; c.len()];
    let mut current = baseline_2q;
    let mut spent = 0.0;
    let mut accepted = Vec::new();

    for cand in candidates(c, mode, p) {
        if spent + cand.d_min > epsilon {
            // sorted ascending: nothing later fits either
            break;
        }
        removed[cand.gate_index] = true;
        let count = best_simplify(&without(c, &removed)).two_qubit_count();
        if count < current {
            current = count;
            spent += cand.d_min;
            accepted.push(cand);
        } else {
            removed[cand.gate_index] = false;
        }
    }

    ReplacementPlan {
        base: c.clone(),
        mode,
        p: if mode == ReplacementMode::Squash { 1.0 } else { p },
        epsilon,
        accepted,
        spent,
        baseline_2q,
        final_planned_2q: current,
    }
}

/// Greedy mixture planning under budget `epsilon` with identity weight `p`.
pub fn plan_replacements(c: &Circuit, epsilon: f64, p: f64) -> Result<ReplacementPlan> {
    check_epsilon(epsilon)?;
    check_mixture_p(p)?;
    Ok(greedy(c, epsilon, p, ReplacementMode::Mixture))
}

/// Greedy pure phase squashing: accepted gates are always deleted and are
/// priced at `2|sin(α/2)|`.
pub fn plan_squash(c: &Circuit, epsilon: f64) -> Result<ReplacementPlan> {
    check_epsilon(epsilon)?;
    Ok(greedy(c, epsilon, 1.0, ReplacementMode::Squash))
}

/// Dispatches `p = 1` to squash mode and everything in `[0, 1)` to mixtures.
pub fn plan_for_p(c: &Circuit, epsilon: f64, p: f64) -> Result<ReplacementPlan> {
    if p == 1.0 {
        plan_squash(c, epsilon)
    } else {
        plan_replacements(c, epsilon, p)
    }
}

impl ReplacementPlan {
    /// A plan with a caller-chosen replacement set, skipping the greedy scan.
    /// Every index must point at a Z-phase gate and the total price must fit
    /// in `epsilon`.
    pub fn with_replacements(
        base: &Circuit,
        epsilon: f64,
        p: f64,
        mode: ReplacementMode,
        gate_indices: &[usize],
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        if mode == ReplacementMode::Mixture {
            check_mixture_p(p)?;
        }
        let mut accepted = Vec::with_capacity(gate_indices.len());
        for &i in gate_indices {
            let Some(&Gate::ZPhase(qubit, alpha)) = base.gates().get(i) else {
                return Err(Error::param(format!("gate {i} is not a Z-phase gate")));
            };
            if accepted.iter().any(|c: &ReplacementCandidate| c.gate_index == i) {
                return Err(Error::param(format!("gate {i} listed twice")));
            }
            let (d_min, theta_tilde) = price(mode, alpha.radians(), p);
            accepted.push(ReplacementCandidate {
                gate_index: i,
                qubit,
                alpha,
                d_min,
                theta_tilde,
            });
        }
        let spent: f64 = accepted.iter().map(|c| c.d_min).sum();
        if spent > epsilon {
            return Err(Error::param(format!(
                "replacements cost {spent}, over the budget {epsilon}"
            )));
        }
        let mut removed = vec![false; base.len()];
        for c in &accepted {
            removed[c.gate_index] = true;
        }
        Ok(ReplacementPlan {
            base: base.clone(),
            mode,
            p: if mode == ReplacementMode::Squash { 1.0 } else { p },
            epsilon,
            baseline_2q: best_simplify(base).two_qubit_count(),
            final_planned_2q: best_simplify(&without(base, &removed)).two_qubit_count(),
            accepted,
            spent,
        })
    }

    pub fn base(&self) -> &Circuit {
        &self.base
    }

    pub fn mode(&self) -> ReplacementMode {
        self.mode
    }

    /// Identity-branch probability (1 in squash mode).
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn accepted(&self) -> &[ReplacementCandidate] {
        &self.accepted
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn baseline_2q(&self) -> usize {
        self.baseline_2q
    }

    /// CNOT count with every accepted gate deleted.
    pub fn fully_squashed_2q(&self) -> usize {
        self.final_planned_2q
    }

    /// The unsimplified circuit for one draw: `deleted[k]` says whether the
    /// k-th accepted gate is removed (otherwise it becomes `Z_θ̃`).
    pub fn instance(&self, deleted: &[bool]) -> Circuit {
        assert_eq!(deleted.len(), self.accepted.len());
        let mut slot: HashMap<usize, usize> = HashMap::with_capacity(self.accepted.len());
        for (k, c) in self.accepted.iter().enumerate() {
            slot.insert(c.gate_index, k);
        }
        let mut out = Circuit::new(self.base.width());
        for (i, g) in self.base.gates().iter().enumerate() {
            match slot.get(&i) {
                Some(&k) if deleted[k] => {}
                Some(&k) => out
                    .push_phase(self.accepted[k].qubit, self.accepted[k].theta_tilde)
                    .expect("over-rotation is finite"),
                None => out.push(*g).expect("gate from a valid circuit"),
            }
        }
        out
    }

    /// Draws the Bernoulli deletion pattern for one shot.
    pub fn draw_deletions<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        self.accepted
            .iter()
            .map(|_| match self.mode {
                ReplacementMode::Squash => true,
                ReplacementMode::Mixture => rng.random::<f64>() < self.p,
            })
            .collect()
    }

    /// Probability of a given deletion pattern.
    pub fn pattern_weight(&self, deleted: &[bool]) -> f64 {
        match self.mode {
            ReplacementMode::Squash => {
                if deleted.iter().all(|&d| d) {
                    1.0
                } else {
                    0.0
                }
            }
            ReplacementMode::Mixture => deleted
                .iter()
                .map(|&d| if d { self.p } else { 1.0 - self.p })
                .product(),
        }
    }
}

/// One shot: sample the replacement pattern and simplify the instance.
pub fn sample_instance<R: Rng + ?Sized>(plan: &ReplacementPlan, rng: &mut R) -> Circuit {
    let deleted = plan.draw_deletions(rng);
    best_simplify(&plan.instance(&deleted))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotStats {
    pub mean: f64,
    pub stderr: f64,
    /// CNOT count → number of shots.
    pub histogram: BTreeMap<usize, usize>,
}

/// Sample mean of the simplified CNOT count over `n_shots` independent
/// instances. Shot `k` uses the seed `derive_seed(seed, SHOTS, k)`, so the
/// estimate does not depend on how shots are scheduled.
pub fn estimate_avg_two_qubit(plan: &ReplacementPlan, n_shots: usize, seed: u64) -> Result<ShotStats> {
    if n_shots == 0 {
        return Err(Error::param("need at least one shot"));
    }
    let patterns: Vec<Vec<bool>> = (0..n_shots)
        .into_par_iter()
        .map(|k| plan.draw_deletions(&mut rng_from_seed(derive_seed(seed, stream::SHOTS, k as u64))))
        .collect();

    // a pattern fully determines the simplified circuit, so count each once
    let mut distinct: Vec<&Vec<bool>> = patterns.iter().collect();
    distinct.sort();
    distinct.dedup();
    let counts: HashMap<&Vec<bool>, usize> = distinct
        .par_iter()
        .map(|&pat| (pat, best_simplify(&plan.instance(pat)).two_qubit_count()))
        .collect();

    let mut histogram = BTreeMap::new();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for pat in &patterns {
        let c = counts[pat];
        *histogram.entry(c).or_insert(0) += 1;
        sum += c as f64;
        sum_sq += (c * c) as f64;
    }
    let (mean, stderr) = crate::distances::mean_stderr(sum, sum_sq, n_shots);
    Ok(ShotStats {
        mean,
        stderr,
        histogram,
    })
}

/// Which circuits a sweep runs on.
#[derive(Clone, Debug)]
pub enum CircuitSource {
    Qft { width: usize },
    Rqc {
        width: usize,
        depth: usize,
        probs: GateProbabilities,
    },
    Fixed { name: String, circuit: Circuit },
}

impl CircuitSource {
    pub fn label(&self) -> &str {
        match self {
            CircuitSource::Qft { .. } => "qft",
            CircuitSource::Rqc { .. } => "rqc",
            CircuitSource::Fixed { name, .. } => name,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            CircuitSource::Qft { width } | CircuitSource::Rqc { width, .. } => *width,
            CircuitSource::Fixed { circuit, .. } => circuit.width(),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, CircuitSource::Rqc { .. })
    }

    pub fn realize(&self, seed: u64) -> Result<Circuit> {
        match self {
            CircuitSource::Qft { width } => qft(*width),
            CircuitSource::Rqc { width, depth, probs } => random_circuit(*width, *depth, probs, seed),
            CircuitSource::Fixed { circuit, .. } => Ok(circuit.clone()),
        }
    }
}

/// Optional channel-level checks attached to each sweep row.
#[derive(Clone, Debug, Default)]
pub struct SweepVerify {
    /// Restarts for the diamond lower bound; 0 disables it. Only runs at
    /// widths within [`verify::LOWER_BOUND_CAP`].
    pub lower_bound_restarts: usize,
    /// Haar states for the Frobenius estimate; 0 disables it.
    pub frobenius_states: usize,
    /// Sampled instances per state when the exact density path is too wide.
    pub frobenius_shots_per_state: usize,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub source: CircuitSource,
    pub epsilons: Vec<f64>,
    pub ps: Vec<f64>,
    pub n_shots: usize,
    pub n_realizations: usize,
    pub seed: u64,
    pub verify: SweepVerify,
}

/// One CSV row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub circuit: String,
    #[serde(rename = "L")]
    pub width: usize,
    pub epsilon: f64,
    pub p: f64,
    pub realization: usize,
    pub baseline_2q: usize,
    pub mean_2q: f64,
    pub stderr_2q: f64,
    pub n_accepted: usize,
    pub spent_budget: f64,
    pub d_upper: f64,
    pub d_lower_est: Option<f64>,
    pub frobenius_mc: Option<f64>,
    pub frobenius_mc_err: Option<f64>,
    pub seed: u64,
}

pub const SWEEP_CSV_HEADER: &str = "circuit,L,epsilon,p,realization,baseline_2q,mean_2q,stderr_2q,n_accepted,spent_budget,d_upper,d_lower_est,frobenius_mc,frobenius_mc_err,seed";

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.ps.is_empty() {
            return Err(Error::param("sweep grids must be non-empty"));
        }
        for &e in &self.epsilons {
            check_epsilon(e)?;
        }
        for &p in &self.ps {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("p = {p} outside [0, 1]")));
            }
        }
        if self.n_shots == 0 || self.n_realizations == 0 {
            return Err(Error::param("shots and realizations must be positive"));
        }
        if let CircuitSource::Rqc { probs, .. } = &self.source {
            probs.validate()?;
        }
        Ok(())
    }

    fn realizations(&self) -> usize {
        if self.source.is_random() {
            self.n_realizations
        } else {
            1
        }
    }
}

fn sweep_point(
    cfg: &SweepConfig,
    circuit: &Circuit,
    realization: usize,
    realization_seed: u64,
    grid_index: u64,
    epsilon: f64,
    p: f64,
) -> Result<SweepRecord> {
    let plan = plan_for_p(circuit, epsilon, p)?;
    let point_seed = derive_seed(realization_seed, stream::GRID, grid_index);
    let stats = estimate_avg_two_qubit(&plan, cfg.n_shots, derive_seed(point_seed, stream::SHOTS, 0))?;

    let width = circuit.width();
    let d_lower_est = if cfg.verify.lower_bound_restarts > 0 && width <= verify::LOWER_BOUND_CAP {
        Some(verify::diamond_lower_bound(
            circuit,
            &plan,
            cfg.verify.lower_bound_restarts,
            derive_seed(point_seed, stream::LOWER_BOUND, 0),
        )?)
    } else {
        None
    };
    let frob = if cfg.verify.frobenius_states > 0 {
        Some(verify::frobenius_mc_full(
            circuit,
            &plan,
            cfg.verify.frobenius_states,
            cfg.verify.frobenius_shots_per_state.max(1),
            derive_seed(point_seed, stream::FROBENIUS, 0),
        )?)
    } else {
        None
    };

    Ok(SweepRecord {
        circuit: cfg.source.label().to_string(),
        width,
        epsilon,
        p,
        realization,
        baseline_2q: plan.baseline_2q(),
        mean_2q: stats.mean,
        stderr_2q: stats.stderr,
        n_accepted: plan.accepted().len(),
        spent_budget: plan.spent(),
        d_upper: verify::diamond_upper_bound(&plan),
        d_lower_est,
        frobenius_mc: frob.map(|f| f.0),
        frobenius_mc_err: frob.map(|f| f.1),
        seed: realization_seed,
    })
}

/// Runs plan + shot estimate (+ optional verification) for every
/// `(epsilon, p, realization)`. Rows are ordered by epsilon index, then p
/// index, then realization, independent of scheduling.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let n_real = cfg.realizations();
    let circuits: Vec<(u64, Circuit)> = (0..n_real)
        .into_par_iter()
        .map(|r| {
            let s = derive_seed(cfg.seed, stream::REALIZATION, r as u64);
            cfg.source.realize(s).map(|c| (s, c))
        })
        .collect::<Result<_>>()?;

    let n_p = cfg.ps.len();
    let tasks: Vec<(usize, usize, usize)> = (0..cfg.epsilons.len())
        .flat_map(|i| (0..n_p).flat_map(move |j| (0..n_real).map(move |r| (i, j, r))))
        .collect();
    tasks
        .par_iter()
        .map(|&(i, j, r)| {
            let (seed, circuit) = &circuits[r];
            sweep_point(
                cfg,
                circuit,
                r,
                *seed,
                (i * n_p + j) as u64,
                cfg.epsilons[i],
                cfg.ps[j],
            )
        })
        .collect()
}

/// Serializes sweep rows as CSV with the fixed header.
pub fn sweep_to_csv(records: &[SweepRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(SWEEP_CSV_HEADER.split(','))
            .map_err(|e| Error::param(e.to_string()))?;
    }
    for r in records {
        w.serialize(r).map_err(|e| Error::param(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::param(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
