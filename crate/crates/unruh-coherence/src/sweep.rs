//! Parameter sweeps, figure-data presets, CSV output, and numeric-versus-
//! analytic comparison.
//!
//! A sweep enumerates scenarios in a fixed lexicographic order (angles,
//! accelerated-party count, acceleration grid), evaluates each point through
//! the closed forms and/or the truncated numeric pipeline, and renders rows
//! with a fixed column schema at 17 significant digits. Output is
//! byte-identical across runs and thread counts.

use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::analytic::{closed_form, propagated_bound, CoherenceTriple};
use crate::coherence::evaluate_numeric;
use crate::error::{Error, Result};
use crate::rindler::{AccelerationSpec, TruncationPolicy};
use crate::states::{StateFamily, StateSpec};

/// Which evaluation route(s) a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Numeric,
    Analytic,
    Both,
}

impl EvalMode {
    pub fn wants_numeric(self) -> bool {
        matches!(self, EvalMode::Numeric | EvalMode::Both)
    }

    pub fn wants_analytic(self) -> bool {
        matches!(self, EvalMode::Analytic | EvalMode::Both)
    }
}

/// Family selector as exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Ghz,
    W,
    WSym,
    Plus,
    WWbar,
    Star,
    GhzN,
    WN,
}

impl FamilyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ghz" => Ok(FamilyKind::Ghz),
            "w" => Ok(FamilyKind::W),
            "w-sym" => Ok(FamilyKind::WSym),
            "plus" => Ok(FamilyKind::Plus),
            "wwbar" => Ok(FamilyKind::WWbar),
            "star" => Ok(FamilyKind::Star),
            "ghz-n" => Ok(FamilyKind::GhzN),
            "w-n" => Ok(FamilyKind::WN),
            other => Err(Error::InvalidArgument(format!(
                "unknown family '{other}' (expected ghz, w, w-sym, plus, wwbar, star, ghz-n, w-n)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Ghz => "ghz",
            FamilyKind::W => "w",
            FamilyKind::WSym => "w-sym",
            FamilyKind::Plus => "plus",
            FamilyKind::WWbar => "wwbar",
            FamilyKind::Star => "star",
            FamilyKind::GhzN => "ghz-n",
            FamilyKind::WN => "w-n",
        }
    }

    pub fn uses_theta(self) -> bool {
        matches!(self, FamilyKind::Ghz | FamilyKind::W)
    }

    pub fn uses_phi(self) -> bool {
        matches!(self, FamilyKind::W)
    }

    /// Number of parties once the `--N` argument (if any) is applied.
    pub fn party_count(self, n: Option<usize>) -> usize {
        match self {
            FamilyKind::Ghz
            | FamilyKind::W
            | FamilyKind::WSym
            | FamilyKind::WWbar
            | FamilyKind::Star => 3,
            FamilyKind::Plus | FamilyKind::GhzN | FamilyKind::WN => n.unwrap_or(3),
        }
    }

    fn family(self, theta: Option<f64>, phi: Option<f64>, parties: usize) -> Result<StateFamily> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| {
                Error::InvalidArgument(format!("family '{}' needs --{name}", self.name()))
            })
        };
        Ok(match self {
            FamilyKind::Ghz => StateFamily::GeneralizedGhz {
                theta: need(theta, "theta")?,
            },
            FamilyKind::W => StateFamily::GeneralizedW {
                theta: need(theta, "theta")?,
                phi: need(phi, "phi")?,
            },
            FamilyKind::WSym => StateFamily::SymmetricW { parties: 3 },
            FamilyKind::Plus => StateFamily::PlusProduct { parties },
            FamilyKind::WWbar => StateFamily::WWbar,
            FamilyKind::Star => StateFamily::Star,
            FamilyKind::GhzN => StateFamily::GhzN { parties },
            FamilyKind::WN => StateFamily::SymmetricW { parties },
        })
    }
}

/// Uniform grid `start..=stop` with `count` points (a single point when
/// `count == 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let err = || Error::InvalidArgument(format!("grid '{s}' is not start:stop:count"));
        if parts.len() != 3 {
            return Err(err());
        }
        let start: f64 = parts[0].parse().map_err(|_| err())?;
        let stop: f64 = parts[1].parse().map_err(|_| err())?;
        let count: usize = parts[2].parse().map_err(|_| err())?;
        let grid = Grid { start, stop, count };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 1
            || !self.start.is_finite()
            || !self.stop.is_finite()
            || self.start > self.stop
        {
            return Err(Error::InvalidArgument(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count as f64 - 1.0);
        (0..self.count)
            .map(|i| self.start + step * i as f64)
            .collect()
    }
}

/// Linearly spaced values, endpoints included.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    Grid { start, stop, count }.values()
}

/// One sweep: a family, which angles to visit, which parties accelerate,
/// the acceleration grid, truncation policy, and evaluation mode.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub family: FamilyKind,
    pub n_parties: Option<usize>,
    /// Theta values to visit; `[None]` effectively for families without it.
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Explicit (theta, phi) pairs; when set, overrides the cross product.
    pub angle_pairs: Option<Vec<(f64, f64)>>,
    /// Accelerated parties, ascending. Empty for inertial-only rows.
    pub pattern: Vec<usize>,
    /// Acceleration values; meaning depends on `cartesian_r`.
    pub r_values: Vec<f64>,
    /// For two-party patterns: sweep the full r1 x r2 product instead of the
    /// equal-acceleration diagonal.
    pub cartesian_r: bool,
    /// For the N-party families: sweep the number of equally accelerated
    /// parties (parties `0..n` accelerate). Overrides `pattern`.
    pub n_accel_values: Option<Vec<usize>>,
    pub policy: TruncationPolicy,
    pub mode: EvalMode,
}

impl SweepConfig {
    fn angle_combos(&self) -> Vec<(Option<f64>, Option<f64>)> {
        if let Some(pairs) = &self.angle_pairs {
            return pairs.iter().map(|&(t, p)| (Some(t), Some(p))).collect();
        }
        let thetas: Vec<Option<f64>> = if self.family.uses_theta() {
            self.thetas.iter().map(|&t| Some(t)).collect()
        } else {
            vec![None]
        };
        let phis: Vec<Option<f64>> = if self.family.uses_phi() {
            self.phis.iter().map(|&p| Some(p)).collect()
        } else {
            vec![None]
        };
        let mut combos = Vec::with_capacity(thetas.len() * phis.len());
        for &t in &thetas {
            for &p in &phis {
                combos.push((t, p));
            }
        }
        combos
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub family: FamilyKind,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    /// Acceleration of the lowest accelerated party (or the common value
    /// when more than two parties accelerate equally).
    pub r1: Option<f64>,
    /// Acceleration of the second accelerated party, for two-party patterns.
    pub r2: Option<f64>,
    pub n_parties: usize,
    pub n_accel: usize,
    pub numeric: Option<CoherenceTriple>,
    pub analytic: Option<CoherenceTriple>,
    /// Largest cutoff used across accelerated parties (numeric runs only).
    pub n_max: Option<u32>,
    /// Union tail bound across accelerated parties (numeric runs only).
    pub tail_bound: Option<f64>,
    /// Comparison tolerance `10 x propagated bound + 1e-9` (both-mode runs).
    pub allowed_deviation: Option<f64>,
}

/// Scenario of a single row before evaluation.
#[derive(Debug, Clone)]
struct RowSpec {
    theta: Option<f64>,
    phi: Option<f64>,
    accel: Vec<(usize, f64)>,
}

fn enumerate_rows(config: &SweepConfig) -> Result<Vec<RowSpec>> {
    let parties = config.family.party_count(config.n_parties);
    let mut rows = Vec::new();
    for (theta, phi) in config.angle_combos() {
        let patterns: Vec<Vec<usize>> = match &config.n_accel_values {
            Some(counts) => {
                for &n in counts {
                    if n > parties {
                        return Err(Error::InvalidArgument(format!(
                            "cannot accelerate {n} of {parties} parties"
                        )));
                    }
                }
                counts.iter().map(|&n| (0..n).collect()).collect()
            }
            None => vec![config.pattern.clone()],
        };
        for pattern in patterns {
            if pattern.is_empty() {
                rows.push(RowSpec {
                    theta,
                    phi,
                    accel: Vec::new(),
                });
            } else if config.cartesian_r && pattern.len() == 2 {
                for &r1 in &config.r_values {
                    for &r2 in &config.r_values {
                        rows.push(RowSpec {
                            theta,
                            phi,
                            accel: vec![(pattern[0], r1), (pattern[1], r2)],
                        });
                    }
                }
            } else {
                for &r in &config.r_values {
                    rows.push(RowSpec {
                        theta,
                        phi,
                        accel: pattern.iter().map(|&p| (p, r)).collect(),
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn evaluate_row(config: &SweepConfig, row: &RowSpec) -> Result<SweepRow> {
    let parties = config.family.party_count(config.n_parties);
    let family = config.family.family(row.theta, row.phi, parties)?;
    let mut accel = BTreeMap::new();
    for &(p, r) in &row.accel {
        accel.insert(p, AccelerationSpec::from_r(r)?);
    }
    let spec = StateSpec::new(family, accel, config.policy)?;

    let analytic = if config.mode.wants_analytic() {
        Some(closed_form(&spec)?)
    } else {
        None
    };
    let (numeric, n_max, tail, allowed) = if config.mode.wants_numeric() {
        if spec.accel.len() > 2 {
            return Err(Error::TooManyAccelerated(spec.accel.len()));
        }
        let report = evaluate_numeric(&spec)?;
        let allowed = if config.mode.wants_analytic() {
            Some(10.0 * propagated_bound(&spec, &report.n_max_used)? + 1e-9)
        } else {
            None
        };
        let triple = CoherenceTriple {
            total: report.c_total,
            global: report.c_global.unwrap_or(0.0),
            local: report.c_local.unwrap_or(0.0),
        };
        (
            Some(triple),
            report.n_max_used.values().max().copied(),
            Some(report.tail_bound_total),
            allowed,
        )
    } else {
        (None, None, None, None)
    };

    let sorted: Vec<(usize, f64)> = {
        let mut a = row.accel.clone();
        a.sort_by_key(|&(p, _)| p);
        a
    };
    let (r1, r2) = match sorted.as_slice() {
        [] => (None, None),
        [(_, r)] => (Some(*r), None),
        [(_, ra), (_, rb)] => (Some(*ra), Some(*rb)),
        many => (Some(many[0].1), None),
    };
    Ok(SweepRow {
        family: config.family,
        theta: row.theta,
        phi: row.phi,
        r1,
        r2,
        n_parties: parties,
        n_accel: row.accel.len(),
        numeric,
        analytic,
        n_max,
        tail_bound: tail,
        allowed_deviation: allowed,
    })
}

/// Evaluate every grid point of a sweep, in deterministic row order. Points
/// are independent, so they run on the thread pool when available.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let rows = enumerate_rows(config)?;
    #[cfg(feature = "parallel")]
    {
        rows.par_iter().map(|r| evaluate_row(config, r)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        rows.iter().map(|r| evaluate_row(config, r)).collect()
    }
}

/// Run several sweeps back to back, concatenating rows in config order.
pub fn run_sweeps(configs: &[SweepConfig]) -> Result<Vec<SweepRow>> {
    let mut all = Vec::new();
    for config in configs {
        all.extend(run_sweep(config)?);
    }
    Ok(all)
}

/// Fixed CSV column schema shared by `sweep` and `coherence` output.
pub const CSV_HEADER: &str = "family,theta,phi,r1,r2,N,n_accel,c_total_numeric,c_global_numeric,c_local_numeric,c_total_analytic,c_global_analytic,c_local_analytic,n_max,tail_bound";

fn fmt_f64(v: f64) -> String {
    // 17 significant digits: enough to round-trip any f64. Adding 0.0 folds
    // negative zero (the identity of empty f64 sums) into plain zero.
    format!("{:.16e}", v + 0.0)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Render rows as CSV. `preset` adds a `# preset=NAME` comment line before
/// the header. Output is deterministic byte for byte.
pub fn render_csv(rows: &[SweepRow], preset: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(name) = preset {
        out.push_str(&format!("# preset={name}\n"));
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let n = row.numeric;
        let a = row.analytic;
        let fields = [
            row.family.name().to_string(),
            fmt_opt(row.theta),
            fmt_opt(row.phi),
            fmt_opt(row.r1),
            fmt_opt(row.r2),
            row.n_parties.to_string(),
            row.n_accel.to_string(),
            fmt_opt(n.map(|t| t.total)),
            fmt_opt(n.map(|t| t.global)),
            fmt_opt(n.map(|t| t.local)),
            fmt_opt(a.map(|t| t.total)),
            fmt_opt(a.map(|t| t.global)),
            fmt_opt(a.map(|t| t.local)),
            row.n_max.map(|m| m.to_string()).unwrap_or_default(),
            fmt_opt(row.tail_bound),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Tolerance rule for [`compare`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompareTolerance {
    /// Fixed absolute tolerance on every component at every grid point.
    Absolute(f64),
    /// Per-point tolerance `10 x propagated truncation bound + 1e-9`.
    Propagated,
}

/// Outcome of a numeric-versus-analytic comparison over a grid.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub rows: usize,
    /// Largest |numeric - analytic| over all rows and components.
    pub max_deviation: f64,
    /// Largest per-point propagated tolerance seen.
    pub max_propagated: f64,
    /// True if every row met its tolerance.
    pub pass: bool,
}

/// Run a sweep in both modes and check the two routes against each other.
pub fn compare(config: &SweepConfig, tolerance: CompareTolerance) -> Result<CompareReport> {
    let mut config = config.clone();
    config.mode = EvalMode::Both;
    let rows = run_sweep(&config)?;
    let mut max_dev: f64 = 0.0;
    let mut max_prop: f64 = 0.0;
    let mut pass = true;
    for row in &rows {
        let (Some(n), Some(a)) = (row.numeric, row.analytic) else {
            continue;
        };
        let dev = (n.total - a.total)
            .abs()
            .max((n.global - a.global).abs())
            .max((n.local - a.local).abs());
        let prop = row.allowed_deviation.unwrap_or(1e-9);
        max_dev = max_dev.max(dev);
        max_prop = max_prop.max(prop);
        let allowed = match tolerance {
            CompareTolerance::Absolute(t) => t,
            CompareTolerance::Propagated => prop,
        };
        if dev > allowed {
            pass = false;
        }
    }
    Ok(CompareReport {
        rows: rows.len(),
        max_deviation: max_dev,
        max_propagated: max_prop,
        pass,
    })
}

fn analytic_config(family: FamilyKind) -> SweepConfig {
    SweepConfig {
        family,
        n_parties: None,
        thetas: Vec::new(),
        phis: Vec::new(),
        angle_pairs: None,
        pattern: Vec::new(),
        r_values: Vec::new(),
        cartesian_r: false,
        n_accel_values: None,
        policy: TruncationPolicy::TailTol(1e-10),
        mode: EvalMode::Analytic,
    }
}

/// Names of the available figure-data presets.
pub const PRESET_NAMES: [&str; 9] = [
    "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9a", "fig9b",
];

/// Configurations regenerating the data behind each figure. All presets run
/// the closed forms; pass the rendered config through [`compare`] or rerun
/// with another mode to add numeric columns.
pub fn preset(name: &str) -> Result<Vec<SweepConfig>> {
    use std::f64::consts::PI;
    let symmetric_w_theta = (1.0f64 / 3.0f64.sqrt()).acos();
    let configs = match name {
        // Coherence of the biased GHZ state against acceleration, one party
        // accelerated, several biases.
        "fig3a" => vec![SweepConfig {
            thetas: vec![PI / 4.0, PI / 5.0, PI / 6.0, PI / 8.0],
            pattern: vec![2],
            r_values: linspace(0.0, 3.0, 60),
            ..analytic_config(FamilyKind::Ghz)
        }],
        // Coherence against the bias angle, several fixed accelerations.
        // 33 points over [0, pi] place the extrema exactly on the grid.
        "fig3b" => vec![SweepConfig {
            thetas: linspace(0.0, PI, 33),
            pattern: vec![2],
            r_values: vec![0.0, 0.5, 1.0, 2.0],
            ..analytic_config(FamilyKind::Ghz)
        }],
        // Two accelerated parties, full r1 x r2 surface.
        "fig4" => vec![SweepConfig {
            thetas: vec![PI / 4.0, PI / 5.0, PI / 6.0],
            pattern: vec![1, 2],
            r_values: linspace(0.0, 2.5, 26),
            cartesian_r: true,
            ..analytic_config(FamilyKind::Ghz)
        }],
        // Generalized W against acceleration for selected angle pairs.
        "fig5" => vec![SweepConfig {
            angle_pairs: Some(vec![
                (symmetric_w_theta, PI / 4.0),
                (PI / 3.0, PI / 4.0),
                (PI / 4.0, PI / 6.0),
                (PI / 5.0, PI / 5.0),
            ]),
            pattern: vec![2],
            r_values: linspace(0.0, 3.0, 60),
            ..analytic_config(FamilyKind::W)
        }],
        // Angle surface of the generalized W at slow and fast acceleration.
        "fig6" => vec![SweepConfig {
            thetas: linspace(0.0, PI, 33),
            phis: linspace(0.0, 2.0 * PI * 32.0 / 33.0, 33),
            pattern: vec![2],
            r_values: vec![0.01, 4.0],
            ..analytic_config(FamilyKind::W)
        }],
        // Two accelerated parties of the generalized W.
        "fig7" => vec![SweepConfig {
            angle_pairs: Some(vec![
                (symmetric_w_theta, PI / 4.0),
                (PI / 5.0, PI / 5.0),
                (PI / 6.0, PI / 6.0),
                (PI / 3.0, PI / 6.0),
            ]),
            pattern: vec![1, 2],
            r_values: linspace(0.0, 2.5, 26),
            cartesian_r: true,
            ..analytic_config(FamilyKind::W)
        }],
        // Total/global/local splits: WW-bar, then the star state with the
        // hub accelerated, then with a leaf accelerated.
        "fig8" => vec![
            SweepConfig {
                pattern: vec![2],
                r_values: linspace(0.0, 3.0, 60),
                ..analytic_config(FamilyKind::WWbar)
            },
            SweepConfig {
                pattern: vec![2],
                r_values: linspace(0.0, 3.0, 60),
                ..analytic_config(FamilyKind::Star)
            },
            SweepConfig {
                pattern: vec![0],
                r_values: linspace(0.0, 3.0, 60),
                ..analytic_config(FamilyKind::Star)
            },
        ],
        // Eleven-party networks against acceleration, one or ten parties
        // accelerated.
        "fig9a" => vec![
            SweepConfig {
                n_parties: Some(11),
                n_accel_values: Some(vec![1, 10]),
                r_values: linspace(0.0, 3.0, 60),
                ..analytic_config(FamilyKind::GhzN)
            },
            SweepConfig {
                n_parties: Some(11),
                n_accel_values: Some(vec![1, 10]),
                r_values: linspace(0.0, 3.0, 60),
                ..analytic_config(FamilyKind::WN)
            },
        ],
        // Eleven-party networks against the number of accelerated parties.
        "fig9b" => vec![
            SweepConfig {
                n_parties: Some(11),
                n_accel_values: Some((0..=10).collect()),
                r_values: vec![1.5, 2.0],
                ..analytic_config(FamilyKind::GhzN)
            },
            SweepConfig {
                n_parties: Some(11),
                n_accel_values: Some((0..=10).collect()),
                r_values: vec![1.5, 2.0],
                ..analytic_config(FamilyKind::WN)
            },
        ],
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown preset '{other}' (expected one of {PRESET_NAMES:?})"
            )))
        }
    };
    Ok(configs)
}
