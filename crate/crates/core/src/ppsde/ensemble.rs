//! Parallel ensembles of positive-P trajectories and their moment statistics.
//!
//! Trajectories are grouped into fixed blocks of [`BLOCK_SIZE`] consecutive
//! indices. Each block is integrated by one worker into a private accumulator;
//! blocks are merged strictly in index order with compensated sums, so the
//! result is bit-identical for any number of workers.

use num_complex::Complex64;
use rayon::prelude::*;

use super::charges::charge_values;
use super::noise::NoiseStream;
use super::system::{Interaction, PhaseSpacePoint, SdeSystem, N_NOISES};
use super::SdeError;
use crate::model::{CriterionSamples, MomentTable, Provenance, SystemKind, SystemSpec};

pub const BLOCK_SIZE: usize = 256;
/// Blocks integrated between two merges; bounds memory, not results.
const BLOCKS_PER_ROUND: usize = 64;

/// Default abscissa step: `χ|β0|Δz = 10⁻³` (or `γ1 Δt = 10⁻³`).
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Propagation distance, reported as `ξ = |β1(0)| χ1 z`.
    Spatial,
    /// Time, reported as `γ1 t`.
    Temporal,
}

/// Fixed-step grid in reported (scaled) units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationGrid {
    pub kind: GridKind,
    /// Step in reported units.
    pub step: f64,
    pub n_steps: usize,
    /// Reported units per unit of the equations' own coordinate.
    pub scale: f64,
}

impl IntegrationGrid {
    pub fn new(kind: GridKind, step: f64, n_steps: usize, scale: f64) -> Result<Self, SdeError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(SdeError::BadGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if n_steps == 0 {
            return Err(SdeError::BadGrid("n_steps must be at least 1".into()));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(SdeError::BadGrid(format!(
                "scale must be positive, got {scale}"
            )));
        }
        Ok(IntegrationGrid {
            kind,
            step,
            n_steps,
            scale,
        })
    }

    /// Grid from 0 to `end` (reported units) with the natural scale of `spec`.
    ///
    /// Travelling wave: `scale = χ1|β1(0)|`, falling back to 1 (plain `z`) when
    /// that product vanishes. Cascaded cavity: `scale = γ1`.
    pub fn for_spec(spec: &SystemSpec, end: f64, step: f64) -> Result<Self, SdeError> {
        let (kind, scale) = match spec.kind() {
            SystemKind::CascadedTW | SystemKind::ConcurrentTW => {
                let (b1, _) = spec.pump_init().expect("travelling-wave kinds carry pumps");
                let s = spec.chi1() * b1.norm();
                (GridKind::Spatial, if s > 0.0 { s } else { 1.0 })
            }
            SystemKind::CascadedCavity => {
                let (loss_a, _) = spec.losses().expect("cavity kinds carry losses");
                (GridKind::Temporal, loss_a[0])
            }
            kind @ SystemKind::ConcurrentCavity => return Err(SdeError::UnsupportedKind(kind)),
        };
        if !(end.is_finite() && end > 0.0) {
            return Err(SdeError::BadGrid(format!(
                "grid end must be positive, got {end}"
            )));
        }
        let n_steps = (end / step).round() as usize;
        if ((n_steps as f64 * step) - end).abs() > 1e-9 * end.max(1.0) {
            return Err(SdeError::BadGrid(format!(
                "end {end} is not a multiple of step {step}"
            )));
        }
        Self::new(kind, step, n_steps, scale)
    }

    /// Step in the equations' own coordinate (`z` or `t`).
    pub fn coordinate_step(&self) -> f64 {
        self.step / self.scale
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.abscissa(self.n_steps)
    }

    /// Step index of abscissa `x`, if `x` lies on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let k = (x / self.step).round();
        if !(k >= 0.0 && k <= self.n_steps as f64) {
            return None;
        }
        let tol = 1e-9 * self.step.max(x.abs() * f64::EPSILON * 1e6);
        ((k * self.step - x).abs() <= tol).then_some(k as usize)
    }

    /// `count` evenly spaced grid abscissae from 0 to the end (inclusive).
    pub fn even_samples(&self, count: usize) -> Vec<f64> {
        if count < 2 {
            return vec![self.end()];
        }
        (0..count)
            .map(|i| self.abscissa(i * self.n_steps / (count - 1)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub seed: u64,
    /// Magnitude above which a trajectory counts as diverged; `None` means
    /// `10⁸·max(1, pump scale)`.
    pub divergence_bound: Option<f64>,
    /// Abort when more than this fraction of trajectories diverge.
    pub max_divergent_fraction: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Starting point; `None` means vacuum signals with the spec's pumps
    /// (travelling wave) or the all-vacuum state (cavity).
    pub initial: Option<PhaseSpacePoint>,
    /// Each step sums this many consecutive per-step deviate blocks and
    /// rescales by `1/√n`. A grid with step `nΔ` and `noise_substeps = n` then
    /// follows the same Brownian path as a grid with step `Δ` and 1.
    pub noise_substeps: u32,
}

impl EnsembleConfig {
    pub fn new(n_traj: usize, seed: u64) -> Self {
        EnsembleConfig {
            n_traj,
            seed,
            divergence_bound: None,
            max_divergent_fraction: 1e-3,
            workers: None,
            initial: None,
            noise_substeps: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    fn validate(&self) -> Result<(), SdeError> {
        if self.n_traj < 2 {
            return Err(SdeError::BadConfig(format!(
                "n_traj must be at least 2, got {}",
                self.n_traj
            )));
        }
        if let Some(b) = self.divergence_bound {
            if !(b.is_finite() && b > 0.0) {
                return Err(SdeError::BadConfig(format!(
                    "divergence bound must be positive, got {b}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.max_divergent_fraction) {
            return Err(SdeError::BadConfig(format!(
                "max_divergent_fraction must lie in [0, 1], got {}",
                self.max_divergent_fraction
            )));
        }
        if self.workers == Some(0) {
            return Err(SdeError::BadConfig("workers must be at least 1".into()));
        }
        if self.noise_substeps == 0 {
            return Err(SdeError::BadConfig(
                "noise_substeps must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn resolved_bound(&self, spec: &SystemSpec) -> f64 {
        self.divergence_bound
            .unwrap_or(1e8 * spec.pump_scale().max(1.0))
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// `|mean - value| / se`, or 0/∞ when `se = 0`.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if self.se > 0.0 {
            d / self.se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

impl ComplexEstimate {
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.re.mean, self.im.mean)
    }
}

/// Everything measured at one sample abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSample {
    pub abscissa: f64,
    pub table: MomentTable,
    /// `⟨β_j⁺β_j⟩`.
    pub pump_intensity: [Estimate; 2],
    /// Number combinations that the exact dynamics conserves (see [`super::conserved_charges`]).
    pub charges: [Estimate; 3],
    /// `⟨α_j⁺ − α_j*⟩` per mode; zero in the mean.
    pub hermiticity: [ComplexEstimate; 3],
    /// `⟨β_j⟩`.
    pub pump_mean: [ComplexEstimate; 2],
    /// `⟨κ_jβ_j + χ_j·(pump sink)⟩`, i.e. `κ1β1 + χ1α1α2` and `κ2β2 + χ2α2α3⁺`
    /// (cascaded) or `κ2β2 + χ2α2α3` (concurrent); κ is 0 for travelling waves.
    /// In a cavity steady state its mean equals `ε_j`.
    pub pump_balance: [ComplexEstimate; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub grid: IntegrationGrid,
    pub start: PhaseSpacePoint,
    pub interaction: Interaction,
    pub samples: Vec<EnsembleSample>,
    pub n_requested: usize,
    pub n_diverged: usize,
}

impl EnsembleResult {
    pub fn n_used(&self) -> usize {
        self.n_requested - self.n_diverged
    }

    pub fn tables(&self) -> impl Iterator<Item = &MomentTable> {
        self.samples.iter().map(|s| &s.table)
    }
}

// Per-trajectory observable layout.
const X: usize = 0;
const Y: usize = 3;
const XX: usize = 6;
const YY: usize = 12;
const N: usize = 18;
const NB: usize = 21;
const W: usize = 23;
const Q: usize = 26;
const H: usize = 29;
const B: usize = 35;
const BAL: usize = 39;
const IM: usize = 43;
const N_OBS: usize = 64;

/// Upper-triangle order of the symmetric second moments.
const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[derive(Clone, Copy)]
struct ObsContext {
    interaction: Interaction,
    chi: [f64; 2],
    loss_b: [f64; 2],
}

fn observe(ctx: &ObsContext, p: &PhaseSpacePoint, out: &mut [f64]) {
    let i = Complex64::new(0.0, 1.0);
    let x: [Complex64; 3] = std::array::from_fn(|j| p.a(j) + p.ap(j));
    let y: [Complex64; 3] = std::array::from_fn(|j| -i * (p.a(j) - p.ap(j)));
    let n: [Complex64; 3] = std::array::from_fn(|j| p.ap(j) * p.a(j));
    let nb: [f64; 2] = std::array::from_fn(|j| (p.bp(j) * p.b(j)).re);
    for j in 0..3 {
        out[X + j] = x[j].re;
        out[Y + j] = y[j].re;
        out[N + j] = n[j].re;
        out[IM + j] = x[j].im;
        out[IM + 3 + j] = y[j].im;
        out[IM + 18 + j] = n[j].im;
        let h = p.ap(j) - p.a(j).conj();
        out[H + 2 * j] = h.re;
        out[H + 2 * j + 1] = h.im;
    }
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        let xx = x[a] * x[b];
        let yy = y[a] * y[b];
        out[XX + k] = xx.re;
        out[YY + k] = yy.re;
        out[IM + 6 + k] = xx.im;
        out[IM + 12 + k] = yy.im;
    }
    out[NB] = nb[0];
    out[NB + 1] = nb[1];
    // same complex products as the stored moments, so the spread matches the criterion
    let ysum = y[0] + y[1] + y[2];
    for (k, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        out[W + k] = ((x[a] - x[b]).powi(2) + ysum * ysum).re;
    }
    out[Q..Q + 3].copy_from_slice(&charge_values(ctx.interaction, p));
    let sink2 = match ctx.interaction {
        Interaction::Cascaded => p.a(1) * p.ap(2),
        Interaction::Concurrent => p.a(1) * p.a(2),
    };
    let bal = [
        ctx.loss_b[0] * p.b(0) + ctx.chi[0] * p.a(0) * p.a(1),
        ctx.loss_b[1] * p.b(1) + ctx.chi[1] * sink2,
    ];
    for j in 0..2 {
        out[B + 2 * j] = p.b(j).re;
        out[B + 2 * j + 1] = p.b(j).im;
        out[BAL + 2 * j] = bal[j].re;
        out[BAL + 2 * j + 1] = bal[j].im;
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Compensated) {
        self.add(other.sum);
        self.add(other.comp);
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Shifted first and second power sums per (sample, observable).
#[derive(Clone)]
struct Accumulator {
    count: usize,
    diverged: usize,
    first_divergence: Option<(usize, usize)>,
    s1: Vec<Compensated>,
    s2: Vec<Compensated>,
}

impl Accumulator {
    fn new(n_samples: usize) -> Self {
        Accumulator {
            count: 0,
            diverged: 0,
            first_divergence: None,
            s1: vec![Compensated::default(); n_samples * N_OBS],
            s2: vec![Compensated::default(); n_samples * N_OBS],
        }
    }

    fn add_trajectory(&mut self, obs: &[f64], shift: &[f64]) {
        self.count += 1;
        for (k, &v) in obs.iter().enumerate() {
            let d = v - shift[k % N_OBS];
            self.s1[k].add(d);
            self.s2[k].add(d * d);
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        self.diverged += other.diverged;
        if self.first_divergence.is_none() {
            self.first_divergence = other.first_divergence;
        }
        for (a, b) in self.s1.iter_mut().zip(&other.s1) {
            a.merge(b);
        }
        for (a, b) in self.s2.iter_mut().zip(&other.s2) {
            a.merge(b);
        }
    }

    fn estimate(&self, k: usize, shift: f64) -> Estimate {
        let n = self.count as f64;
        let m = self.s1[k].value() / n;
        let var = ((self.s2[k].value() - n * m * m) / (n - 1.0)).max(0.0);
        Estimate {
            mean: shift + m,
            se: (var / n).sqrt(),
        }
    }
}

struct Runner<'a> {
    system: SdeSystem,
    ctx: ObsContext,
    grid: &'a IntegrationGrid,
    cfg: &'a EnsembleConfig,
    start: PhaseSpacePoint,
    bound_sq: f64,
    sample_steps: Vec<usize>,
    shift: Vec<f64>,
}

impl Runner<'_> {
    /// Integrates one trajectory, writing its observables into `obs`.
    /// Returns the step at which it diverged, if it did.
    fn trajectory(&self, index: usize, obs: &mut [f64]) -> Option<usize> {
        let mut noise = NoiseStream::new(self.cfg.seed, index as u64);
        let dt = self.grid.coordinate_step();
        let sqrt_dt = dt.sqrt();
        let sub = self.cfg.noise_substeps;
        let sub_norm = sqrt_dt / (sub as f64).sqrt();
        let mut p = self.start;
        let mut deviates = [0.0; N_NOISES];
        let mut dw = [0.0; N_NOISES];
        let mut next_sample = 0;
        for step in 0..=self.grid.n_steps {
            while next_sample < self.sample_steps.len() && self.sample_steps[next_sample] == step {
                observe(
                    &self.ctx,
                    &p,
                    &mut obs[next_sample * N_OBS..(next_sample + 1) * N_OBS],
                );
                next_sample += 1;
            }
            if step == self.grid.n_steps || next_sample == self.sample_steps.len() {
                break;
            }
            if sub == 1 {
                noise.next_step(&mut deviates);
                for k in 0..N_NOISES {
                    dw[k] = deviates[k] * sqrt_dt;
                }
            } else {
                dw = [0.0; N_NOISES];
                for _ in 0..sub {
                    noise.next_step(&mut deviates);
                    for k in 0..N_NOISES {
                        dw[k] += deviates[k];
                    }
                }
                for w in dw.iter_mut() {
                    *w *= sub_norm;
                }
            }
            p = self.system.step_with_increments(&p, dt, &dw);
            let escaped = p.vars.iter().any(|z| !(z.norm_sqr() <= self.bound_sq));
            if escaped {
                return Some(step + 1);
            }
        }
        None
    }

    fn block(&self, block: usize) -> Accumulator {
        let n_samples = self.sample_steps.len();
        let mut acc = Accumulator::new(n_samples);
        let mut obs = vec![0.0; n_samples * N_OBS];
        let lo = block * BLOCK_SIZE;
        let hi = (lo + BLOCK_SIZE).min(self.cfg.n_traj);
        for index in lo..hi {
            match self.trajectory(index, &mut obs) {
                None => acc.add_trajectory(&obs, &self.shift),
                Some(step) => {
                    acc.diverged += 1;
                    if acc.first_divergence.is_none() {
                        acc.first_divergence = Some((index, step));
                    }
                }
            }
        }
        acc
    }
}

/// Integrates `cfg.n_traj` trajectories of `spec` on `grid` and returns the
/// moment statistics at each abscissa in `sample_points` (strictly increasing
/// grid points).
///
/// A trajectory that leaves the divergence bound or overflows is dropped from
/// every sample. If more than `cfg.max_divergent_fraction` of all trajectories
/// diverge the run aborts with [`SdeError::TooManyDiverged`].
pub fn run_ensemble(
    spec: &SystemSpec,
    grid: &IntegrationGrid,
    cfg: &EnsembleConfig,
    sample_points: &[f64],
) -> Result<EnsembleResult, SdeError> {
    cfg.validate()?;
    let system = SdeSystem::new(spec)?;
    if sample_points.is_empty() {
        return Err(SdeError::BadGrid("no sample points".into()));
    }
    let mut sample_steps = Vec::with_capacity(sample_points.len());
    for &x in sample_points {
        let k = grid.index_of(x).ok_or(SdeError::SampleOffGrid(x))?;
        if sample_steps.last().is_some_and(|&prev| prev >= k) {
            return Err(SdeError::BadGrid(
                "sample points must be strictly increasing".into(),
            ));
        }
        sample_steps.push(k);
    }

    let start = cfg.initial.unwrap_or_else(|| match spec.pump_init() {
        Some((b1, b2)) => PhaseSpacePoint::coherent_pumps(b1, b2),
        None => PhaseSpacePoint::coherent_pumps(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
    });
    let ctx = ObsContext {
        interaction: system.interaction(),
        chi: [spec.chi1(), spec.chi2()],
        loss_b: spec.losses().map_or([0.0; 2], |(_, b)| b),
    };
    let mut shift = vec![0.0; N_OBS];
    observe(&ctx, &start, &mut shift);
    let bound = cfg.resolved_bound(spec);
    let runner = Runner {
        system,
        ctx,
        grid,
        cfg,
        start,
        bound_sq: bound * bound,
        sample_steps,
        shift,
    };

    let allowed = (cfg.max_divergent_fraction * cfg.n_traj as f64).floor() as usize;
    let n_blocks = cfg.n_traj.div_ceil(BLOCK_SIZE);
    let mut total = Accumulator::new(runner.sample_steps.len());
    let run_rounds = |total: &mut Accumulator| -> Result<(), SdeError> {
        let mut next = 0;
        while next < n_blocks {
            let end = (next + BLOCKS_PER_ROUND).min(n_blocks);
            let parts: Vec<Accumulator> = (next..end)
                .into_par_iter()
                .map(|b| runner.block(b))
                .collect();
            for part in &parts {
                total.merge(part);
            }
            if total.diverged > allowed {
                return Err(SdeError::TooManyDiverged {
                    diverged: total.diverged,
                    attempted: (end * BLOCK_SIZE).min(cfg.n_traj),
                    n_traj: cfg.n_traj,
                    max_fraction: cfg.max_divergent_fraction,
                    bound,
                    first: total.first_divergence,
                });
            }
            next = end;
        }
        Ok(())
    };
    match cfg.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| SdeError::BadConfig(format!("thread pool: {e}")))?;
            pool.install(|| run_rounds(&mut total))?;
        }
        None => run_rounds(&mut total)?,
    }
    if total.count < 2 {
        return Err(SdeError::TooFewTrajectories(total.count));
    }

    let samples = runner
        .sample_steps
        .iter()
        .enumerate()
        .map(|(s, &step)| summarize(&total, &runner.shift, s, grid.abscissa(step)))
        .collect();
    Ok(EnsembleResult {
        grid: *grid,
        start: runner.start,
        interaction: runner.ctx.interaction,
        samples,
        n_requested: cfg.n_traj,
        n_diverged: total.diverged,
    })
}

fn summarize(acc: &Accumulator, shift: &[f64], sample: usize, abscissa: f64) -> EnsembleSample {
    let est = |k: usize| acc.estimate(sample * N_OBS + k, shift[k]);
    let cest = |k: usize| ComplexEstimate {
        re: est(k),
        im: est(k + 1),
    };
    let mut table = MomentTable::vacuum();
    table.provenance = Provenance::Ensemble { n_traj: acc.count };
    for j in 0..3 {
        let (x, y, n) = (est(X + j), est(Y + j), est(N + j));
        table.mean_x[j] = x.mean;
        table.se_mean_x[j] = x.se;
        table.mean_y[j] = y.mean;
        table.se_mean_y[j] = y.se;
        table.intensity[j] = n.mean;
        table.se_intensity[j] = n.se;
    }
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        let (xx, yy) = (est(XX + k), est(YY + k));
        for (r, c) in [(a, b), (b, a)] {
            table.second_xx[r][c] = xx.mean;
            table.se_second_xx[r][c] = xx.se;
            table.second_yy[r][c] = yy.mean;
            table.se_second_yy[r][c] = yy.se;
        }
    }
    let w: [Estimate; 3] = std::array::from_fn(|k| est(W + k));
    table.criterion_samples = Some(CriterionSamples {
        mean: w.map(|e| e.mean),
        se: w.map(|e| e.se),
    });
    table.imag_residual = (0..21).map(|k| est(IM + k).mean.abs()).fold(0.0, f64::max);

    EnsembleSample {
        abscissa,
        table,
        pump_intensity: [est(NB), est(NB + 1)],
        charges: [est(Q), est(Q + 1), est(Q + 2)],
        hermiticity: [cest(H), cest(H + 2), cest(H + 4)],
        pump_mean: [cest(B), cest(B + 2)],
        pump_balance: [cest(BAL), cest(BAL + 2)],
    }
}
