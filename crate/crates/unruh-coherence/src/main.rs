//! Command-line front end: single evaluations, parameter sweeps,
//! numeric-versus-analytic comparison, and figure-data regeneration.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use unruh_coherence::analytic::{closed_form, propagated_bound, CoherenceTriple};
use unruh_coherence::coherence::evaluate_numeric;
use unruh_coherence::error::Error;
use unruh_coherence::rindler::{AccelerationSpec, TruncationPolicy};
use unruh_coherence::states::{
    StateFamily, StateSpec, STAR_CENTRAL_PARTY, STAR_PERIPHERAL_PARTIES,
};
use unruh_coherence::sweep::{
    compare, preset, render_csv, run_sweep, run_sweeps, CompareTolerance, EvalMode, FamilyKind,
    Grid, SweepConfig, SweepRow,
};

#[derive(Parser)]
#[command(
    name = "unruh-coherence",
    about = "Quantum coherence of multipartite states under uniform acceleration",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single scenario and print it as a CSV row.
    Coherence(CoherenceArgs),
    /// Evaluate a grid of scenarios and write CSV.
    Sweep(SweepArgs),
    /// Run numeric and analytic routes over a grid and report the gap.
    Compare(CompareArgs),
    /// Regenerate the data behind a named figure.
    Preset(PresetArgs),
}

#[derive(Args)]
struct FamilyArgs {
    /// State family: ghz, w, w-sym, plus, wwbar, star, ghz-n, w-n.
    #[arg(long)]
    family: String,
    /// Superposition bias angle, radians (ghz, w).
    #[arg(long)]
    theta: Option<f64>,
    /// Second generalization angle, radians (w).
    #[arg(long)]
    phi: Option<f64>,
    /// Number of parties (plus, ghz-n, w-n; default 3).
    #[arg(long = "N")]
    n_parties: Option<usize>,
}

impl FamilyArgs {
    fn kind(&self) -> Result<FamilyKind, Error> {
        FamilyKind::parse(&self.family)
    }

    fn family(&self, kind: FamilyKind) -> Result<StateFamily, Error> {
        let parties = kind.party_count(self.n_parties);
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| {
                Error::InvalidArgument(format!("family '{}' needs --{name}", kind.name()))
            })
        };
        Ok(match kind {
            FamilyKind::Ghz => StateFamily::GeneralizedGhz {
                theta: need(self.theta, "theta")?,
            },
            FamilyKind::W => StateFamily::GeneralizedW {
                theta: need(self.theta, "theta")?,
                phi: need(self.phi, "phi")?,
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

#[derive(Args)]
struct PolicyArgs {
    /// Per-party cap on the omitted probability of the mode expansions.
    #[arg(long, default_value_t = 1e-10, conflicts_with = "n_max")]
    tail_tol: f64,
    /// Fixed expansion cutoff instead of a tolerance.
    #[arg(long)]
    n_max: Option<u32>,
}

impl PolicyArgs {
    fn policy(&self) -> TruncationPolicy {
        match self.n_max {
            Some(n) => TruncationPolicy::FixedNMax(n),
            None => TruncationPolicy::TailTol(self.tail_tol),
        }
    }
}

#[derive(Args)]
struct CoherenceArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Accelerated parties with squeezing parameters: "2:2.0,1:1.5",
    /// "central:2.0", "peripheral:1.0,peripheral:2.0", or "none".
    #[arg(long, default_value = "none")]
    accel: String,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Evaluation route: numeric, analytic, or both.
    #[arg(long, default_value = "both")]
    mode: String,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Accelerated parties, squeezing taken from the grid: "2", "1,2",
    /// "central", "peripheral,peripheral", or "none".
    #[arg(long, default_value = "none")]
    accel: String,
    /// Acceleration grid start:stop:count.
    #[arg(long)]
    grid: Option<String>,
    /// For two accelerated parties, sweep the full r1 x r2 product instead
    /// of the equal-acceleration diagonal.
    #[arg(long)]
    cartesian: bool,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Evaluation route: numeric, analytic, or both.
    #[arg(long, default_value = "analytic")]
    mode: String,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Accelerated parties, as for sweep.
    #[arg(long, default_value = "none")]
    accel: String,
    /// Acceleration grid start:stop:count.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    cartesian: bool,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Pass threshold: an absolute value like 1e-6, or "propagated" to use
    /// ten times the per-point truncation bound.
    #[arg(long, default_value = "1e-6")]
    tol: String,
}

#[derive(Args)]
struct PresetArgs {
    /// One of fig3a, fig3b, fig4, fig5, fig6, fig7, fig8, fig9a, fig9b.
    name: String,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn parse_mode(s: &str) -> Result<EvalMode, Error> {
    match s {
        "numeric" => Ok(EvalMode::Numeric),
        "analytic" => Ok(EvalMode::Analytic),
        "both" => Ok(EvalMode::Both),
        other => Err(Error::InvalidArgument(format!(
            "unknown mode '{other}' (expected numeric, analytic, both)"
        ))),
    }
}

/// Resolve one accel token's party id. Star scenarios may name the hub and
/// leaves by role; `peripheral_seen` distinguishes the two leaves.
fn resolve_party(
    token: &str,
    family: FamilyKind,
    peripheral_seen: &mut usize,
) -> Result<usize, Error> {
    match token {
        "central" | "peripheral" if family != FamilyKind::Star => Err(Error::InvalidArgument(
            format!("'{token}' only names a party of the star family"),
        )),
        "central" => Ok(STAR_CENTRAL_PARTY),
        "peripheral" => {
            let idx = *peripheral_seen;
            *peripheral_seen += 1;
            STAR_PERIPHERAL_PARTIES
                .get(idx)
                .copied()
                .ok_or_else(|| Error::InvalidArgument("more than two peripheral parties".into()))
        }
        _ => token
            .parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("bad party id '{token}'"))),
    }
}

/// Parse "2:2.0,1:1.5" style acceleration lists.
fn parse_accel_with_r(s: &str, family: FamilyKind) -> Result<BTreeMap<usize, f64>, Error> {
    let mut out = BTreeMap::new();
    if s == "none" || s.is_empty() {
        return Ok(out);
    }
    let mut peripheral_seen = 0;
    for item in s.split(',') {
        let (party, r) = item.split_once(':').ok_or_else(|| {
            Error::InvalidArgument(format!("accel entry '{item}' is not party:r"))
        })?;
        let party = resolve_party(party.trim(), family, &mut peripheral_seen)?;
        let r: f64 = r
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad squeezing value in '{item}'")))?;
        if out.insert(party, r).is_some() {
            return Err(Error::DuplicateParty(party));
        }
    }
    Ok(out)
}

/// Parse "1,2" / "central,peripheral" style party lists (no r values).
fn parse_accel_parties(s: &str, family: FamilyKind) -> Result<Vec<usize>, Error> {
    if s == "none" || s.is_empty() {
        return Ok(Vec::new());
    }
    let mut peripheral_seen = 0;
    let mut parties = Vec::new();
    for item in s.split(',') {
        let party = resolve_party(item.trim(), family, &mut peripheral_seen)?;
        if parties.contains(&party) {
            return Err(Error::DuplicateParty(party));
        }
        parties.push(party);
    }
    parties.sort_unstable();
    Ok(parties)
}

fn sweep_config_from(
    args: &FamilyArgs,
    accel: &str,
    grid: Option<&str>,
    cartesian: bool,
    policy: TruncationPolicy,
    mode: EvalMode,
) -> Result<SweepConfig, Error> {
    let family = args.kind()?;
    let pattern = parse_accel_parties(accel, family)?;
    let r_values = match grid {
        Some(g) => Grid::parse(g)?.values(),
        None if pattern.is_empty() => Vec::new(),
        None => {
            return Err(Error::InvalidArgument(
                "--grid is required when parties accelerate".into(),
            ))
        }
    };
    Ok(SweepConfig {
        family,
        n_parties: args.n_parties,
        thetas: args.theta.into_iter().collect(),
        phis: args.phi.into_iter().collect(),
        angle_pairs: None,
        pattern,
        r_values,
        cartesian_r: cartesian,
        n_accel_values: None,
        policy,
        mode,
    })
}

/// Evaluate one explicit scenario (possibly with unequal accelerations)
/// into a CSV row.
fn single_row(args: &CoherenceArgs) -> Result<SweepRow, Error> {
    let kind = args.family.kind()?;
    let mode = parse_mode(&args.mode)?;
    let accel = parse_accel_with_r(&args.accel, kind)?;
    let family = args.family.family(kind)?;
    let mut spec_accel = BTreeMap::new();
    for (&p, &r) in &accel {
        spec_accel.insert(p, AccelerationSpec::from_r(r)?);
    }
    let spec = StateSpec::new(family, spec_accel, args.policy.policy())?;

    let analytic = if mode.wants_analytic() {
        Some(closed_form(&spec)?)
    } else {
        None
    };
    let (numeric, n_max, tail, allowed) = if mode.wants_numeric() {
        if spec.accel.len() > 2 {
            return Err(Error::TooManyAccelerated(spec.accel.len()));
        }
        let report = evaluate_numeric(&spec)?;
        let allowed = if mode.wants_analytic() {
            Some(10.0 * propagated_bound(&spec, &report.n_max_used)? + 1e-9)
        } else {
            None
        };
        (
            Some(CoherenceTriple {
                total: report.c_total,
                global: report.c_global.unwrap_or(0.0),
                local: report.c_local.unwrap_or(0.0),
            }),
            report.n_max_used.values().max().copied(),
            Some(report.tail_bound_total),
            allowed,
        )
    } else {
        (None, None, None, None)
    };

    let rs: Vec<f64> = accel.values().copied().collect();
    let (r1, r2) = match rs.as_slice() {
        [] => (None, None),
        [r] => (Some(*r), None),
        [a, b] => (Some(*a), Some(*b)),
        more => (Some(more[0]), None),
    };
    Ok(SweepRow {
        family: kind,
        theta: if kind.uses_theta() {
            args.family.theta
        } else {
            None
        },
        phi: if kind.uses_phi() {
            args.family.phi
        } else {
            None
        },
        r1,
        r2,
        n_parties: kind.party_count(args.family.n_parties),
        n_accel: accel.len(),
        numeric,
        analytic,
        n_max,
        tail_bound: tail,
        allowed_deviation: allowed,
    })
}

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<(), (String, u8)> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| (format!("cannot write {}: {e}", path.display()), 1)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Exit code for a library error: truncation-cap overruns and similar
/// runtime failures exit 1, argument problems exit 2.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::CapExceeded { .. } | Error::NormExceedsOne(_) => 1,
        _ => 2,
    }
}

fn run() -> Result<(), (String, u8)> {
    let cli = Cli::parse();
    let lib = |e: Error| (e.to_string(), exit_code_for(&e));
    match cli.command {
        Command::Coherence(args) => {
            let row = single_row(&args).map_err(lib)?;
            emit(&render_csv(&[row], None), args.out.as_deref())
        }
        Command::Sweep(args) => {
            let mode = parse_mode(&args.mode).map_err(lib)?;
            let config = sweep_config_from(
                &args.family,
                &args.accel,
                args.grid.as_deref(),
                args.cartesian,
                args.policy.policy(),
                mode,
            )
            .map_err(lib)?;
            let rows = run_sweep(&config).map_err(lib)?;
            emit(&render_csv(&rows, None), args.out.as_deref())
        }
        Command::Compare(args) => {
            let config = sweep_config_from(
                &args.family,
                &args.accel,
                args.grid.as_deref(),
                args.cartesian,
                args.policy.policy(),
                EvalMode::Both,
            )
            .map_err(lib)?;
            let tolerance = match args.tol.as_str() {
                "propagated" => CompareTolerance::Propagated,
                v => CompareTolerance::Absolute(
                    v.parse()
                        .map_err(|_| ("--tol expects a number or 'propagated'".to_string(), 2u8))?,
                ),
            };
            let report = compare(&config, tolerance).map_err(lib)?;
            println!(
                "rows={} max_deviation={:.3e} propagated_tolerance={:.3e} verdict={}",
                report.rows,
                report.max_deviation,
                report.max_propagated,
                if report.pass {
                    "within tolerance"
                } else {
                    "OUT OF TOLERANCE"
                }
            );
            if report.pass {
                Ok(())
            } else {
                Err((
                    "numeric and analytic routes disagree beyond tolerance".into(),
                    1,
                ))
            }
        }
        Command::Preset(args) => {
            let configs = preset(&args.name).map_err(lib)?;
            let rows = run_sweeps(&configs).map_err(lib)?;
            emit(&render_csv(&rows, Some(&args.name)), args.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((msg, code)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
