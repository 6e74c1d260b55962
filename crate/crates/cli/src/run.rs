use std::fmt::Write as _;

use num_complex::Complex64;
use twinchi2_core::analytic::{
    cascaded_moment_table, concurrent_moment_table, moment_ode_oracle, AnalyticParams, Regime, Scheme,
};
use twinchi2_core::cavity::{find_steady_state, linearize, spectrum, BranchHint, CavityError};
use twinchi2_core::model::{vlf_criteria, CriteriaReport, MomentTable, ENTANGLEMENT_BOUND};
use twinchi2_core::ppsde::{run_ensemble, EnsembleConfig, IntegrationGrid, PhaseSpacePoint};

use crate::config::{Abscissa, AnalyticConfig, BranchChoice, CavityConfig, ExperimentConfig, SdeConfig, Start};
use crate::{format_number, CliError};

/// Execution settings that do not change the output.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads for the stochastic route; `None` uses all cores.
    pub workers: Option<usize>,
}

/// Summary of a run, for reporting alongside the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    /// Two criteria below 4 at some abscissa (using `value + 3 s.e.` for stochastic runs).
    pub entangled: bool,
    /// First abscissa where that happens.
    pub first_entangled_at: Option<f64>,
    /// Smallest value of each criterion and where it occurs.
    pub minima: [(f64, f64); 3],
    /// Whether each signal `X` output spectrum dips below vacuum (spectral route).
    pub squeezed_x: Option<[bool; 3]>,
    /// Some stability eigenvalue is close to the imaginary axis (spectral route).
    pub marginal: bool,
    /// Trajectories dropped for divergence (stochastic route).
    pub diverged: Option<usize>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            entangled: false,
            first_entangled_at: None,
            minima: [(f64::INFINITY, f64::NAN); 3],
            squeezed_x: None,
            marginal: false,
            diverged: None,
        }
    }

    fn record(&mut self, x: f64, values: [f64; 3], entangled: bool) {
        for (m, v) in self.minima.iter_mut().zip(values) {
            if v < m.0 {
                *m = (v, x);
            }
        }
        if entangled && !self.entangled {
            self.entangled = true;
            self.first_entangled_at = Some(x);
        }
    }

    /// Human-readable lines.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        let labels = ["V12", "V13", "V23"];
        let mins: Vec<String> = labels
            .iter()
            .zip(&self.minima)
            .map(|(l, (v, x))| format!("min {l} = {v:.6} at {x}"))
            .collect();
        out.push(mins.join(", "));
        out.push(match self.first_entangled_at {
            Some(x) => format!("entangled: true (two criteria below {ENTANGLEMENT_BOUND} first at {x})"),
            None => "entangled: false".to_string(),
        });
        if let Some(sq) = self.squeezed_x {
            out.push(format!("X output squeezing (modes 1, 2, 3): {sq:?}"));
        }
        if self.marginal {
            out.push("linearization marginal: an eigenvalue has real part above -1e-3".to_string());
        }
        if let Some(d) = self.diverged {
            out.push(format!("diverged trajectories: {d}"));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    /// Config echo, column header and rows.
    pub csv: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub verdict: Verdict,
}

impl Output {
    fn new(cfg: &ExperimentConfig, columns: Vec<String>, rows: Vec<Vec<f64>>, verdict: Verdict) -> Self {
        let mut csv = cfg.echo();
        csv.push('\n');
        csv.push_str(&columns.join(","));
        csv.push('\n');
        for row in &rows {
            let fields: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            let _ = writeln!(csv, "{}", fields.join(","));
        }
        Output { csv, columns, rows, verdict }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn criteria_columns(x: &str) -> Vec<String> {
    [x, "V12", "V13", "V23"].iter().map(|s| s.to_string()).collect()
}

pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Output, CliError> {
    match cfg {
        ExperimentConfig::Analytic(c) => run_analytic(cfg, c),
        ExperimentConfig::Sde(c) => run_sde(cfg, c, opts),
        ExperimentConfig::CavitySpectrum(c) => run_cavity(cfg, c),
    }
}

fn run_analytic(cfg: &ExperimentConfig, c: &AnalyticConfig) -> Result<Output, CliError> {
    let scheme = if c.kind.is_cascaded() { Scheme::Cascaded } else { Scheme::Concurrent };
    let p = AnalyticParams::new(scheme, c.coupling1, c.coupling2)?;
    let regime = p.regime();
    let (name, rate) = match c.abscissa {
        Abscissa::Time => ("t", 1.0),
        Abscissa::RateTime => match regime {
            Regime::Hyperbolic { zeta } => ("zeta_t", zeta),
            Regime::Oscillatory { omega } | Regime::Concurrent { omega } => ("Omega_t", omega),
            Regime::Degenerate => {
                return Err(CliError::Config("equal cascaded couplings have no rate; use abscissa=t".into()))
            }
        },
    };
    let table = |t: f64| -> Result<MomentTable, CliError> {
        Ok(match (scheme, regime) {
            (Scheme::Concurrent, _) => concurrent_moment_table(&p, t)?,
            (Scheme::Cascaded, Regime::Degenerate) => moment_ode_oracle(&p, t)?,
            (Scheme::Cascaded, _) => cascaded_moment_table(&p, t)?,
        })
    };
    let mut columns = criteria_columns(name);
    if c.se_columns {
        columns.extend(["se_V12", "se_V13", "se_V23"].map(String::from));
    }
    if c.intensities {
        columns.extend(["n1", "n2", "n3"].map(String::from));
    }
    let mut verdict = Verdict::new();
    let mut rows = Vec::with_capacity(c.points);
    for x in linspace(c.start, c.end, c.points) {
        let m = table(x / rate)?;
        let r = vlf_criteria(&m)?;
        verdict.record(x, r.values, r.entangled);
        let mut row = vec![x];
        row.extend(r.values);
        if c.se_columns {
            row.extend([0.0; 3]);
        }
        if c.intensities {
            row.extend(m.intensity);
        }
        rows.push(row);
    }
    Ok(Output::new(cfg, columns, rows, verdict))
}

fn run_sde(cfg: &ExperimentConfig, c: &SdeConfig, opts: &RunOptions) -> Result<Output, CliError> {
    let spec = c.system.spec()?;
    let grid = IntegrationGrid::for_spec(&spec, c.end, c.step)?;
    let mut ens = EnsembleConfig::new(c.traj, c.seed);
    ens.max_divergent_fraction = c.max_divergent_fraction;
    ens.workers = opts.workers;
    if c.initial == Start::Classical {
        let b = [0, 1].map(|j| Complex64::new(c.system.pumps[j] / c.system.loss_b[j], 0.0));
        ens.initial = Some(PhaseSpacePoint::classical([Complex64::new(0.0, 0.0); 3], b));
    }
    let points = grid.even_samples(c.samples);
    let res = run_ensemble(&spec, &grid, &ens, &points)?;

    let name = if spec.kind().is_cavity() { "t" } else { "xi" };
    let mut columns = criteria_columns(name);
    columns.extend(["se_V12", "se_V13", "se_V23"].map(String::from));
    if c.intensities {
        columns.extend(["n1", "n2", "n3", "se_n1", "se_n2", "se_n3"].map(String::from));
    }
    let mut verdict = Verdict::new();
    verdict.diverged = Some(res.n_diverged);
    let mut rows = Vec::with_capacity(res.samples.len());
    for s in &res.samples {
        let r: CriteriaReport = vlf_criteria(&s.table)?;
        verdict.record(s.abscissa, r.values, r.conservatively_entangled());
        let mut row = vec![s.abscissa];
        row.extend(r.values);
        row.extend(r.se);
        if c.intensities {
            row.extend(s.table.intensity);
            row.extend(s.table.se_intensity);
        }
        rows.push(row);
    }
    Ok(Output::new(cfg, columns, rows, verdict))
}

fn run_cavity(cfg: &ExperimentConfig, c: &CavityConfig) -> Result<Output, CliError> {
    let spec = c.system.spec()?;
    let hint = match c.branch {
        BranchChoice::Auto => BranchHint::Auto,
        BranchChoice::Below => BranchHint::Below,
        BranchChoice::Above => BranchHint::Above,
    };
    let ss = find_steady_state(&spec, hint)?;
    let lin = linearize(&spec, &ss)?;
    if !lin.stable {
        return Err(CavityError::Unstable(lin.eigenvalues.to_vec()).into());
    }
    let omegas = linspace(c.omega_min, c.omega_max, c.omega_points);
    let s = spectrum(&lin, &spec, &omegas)?;

    let columns: Vec<String> = [
        "omega", "S12", "S13", "S23", "X1", "X2", "X3", "Y1", "Y2", "Y3", "pump_X1", "pump_X2",
    ]
    .map(String::from)
    .to_vec();
    let mut verdict = Verdict::new();
    verdict.marginal = s.marginal;
    let mut squeezed = [false; 3];
    let mut rows = Vec::with_capacity(omegas.len());
    for (k, &w) in s.omega.iter().enumerate() {
        verdict.record(w, s.criteria_at(k), s.entangled_at(k));
        for j in 0..3 {
            squeezed[j] |= s.x[j][k] < 1.0;
        }
        let mut row = vec![w];
        row.extend(s.criteria_at(k));
        row.extend((0..3).map(|j| s.x[j][k]));
        row.extend((0..3).map(|j| s.y[j][k]));
        row.extend((0..2).map(|j| s.pump_x[j][k]));
        rows.push(row);
    }
    verdict.squeezed_x = Some(squeezed);
    Ok(Output::new(cfg, columns, rows, verdict))
}
