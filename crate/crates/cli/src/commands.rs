use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use seqpt::estimator::{derive_seed, plan_shots, ShotBound};
use seqpt::oracle::{check_identity, exact_chi, IdentityName, IdentityReport};
use seqpt::{
    kraus_to_chi, ChannelFile, DimensionFactorization, EstimateOptions, EstimateResult, EstimatorScheme, KrausChannel,
    Mode, Protocol, ProductOperatorBasis, StandardChannel,
};

use crate::output::{write_json, write_rows, Format};
use crate::{ChannelArgs, Cli, Command, DesignArgs, EstimateArgs, PlanArgs, SchemeSelection, SweepArgs, Target, VerifyArgs};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<seqpt::Error> for CliError {
    fn from(e: seqpt::Error) -> Self {
        if e.is_data_violation() {
            CliError::Data(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Design(a) => design(a, cli.format, out),
        Command::Channel(a) => channel(a, cli.format, out),
        Command::Plan(a) => plan(a, cli.format, out),
        Command::Estimate(a) => estimate(a, cli.seed, cli.format, out),
        Command::Sweep(a) => sweep(a, cli.seed, cli.format, out),
        Command::Verify(a) => verify(a, cli.seed, cli.format, out),
    }
}

fn json_only(format: Format, what: &str) -> Result<(), CliError> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Config(format!("{what} output is JSON only"))),
    }
}

fn protocol(selection: &SchemeSelection, dim: usize) -> Result<Protocol, CliError> {
    let scheme = selection.scheme.map(EstimatorScheme::from).unwrap_or_else(|| EstimatorScheme::default_for(dim));
    Ok(Protocol::new(scheme, dim, selection.big)?)
}

fn design(a: &DesignArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    json_only(format, "design")?;
    let p = protocol(&a.scheme, a.dim)?;
    let x = p.design();
    let mut weights: Vec<f64> = x.probabilities().to_vec();
    weights.sort_by(f64::total_cmp);
    weights.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
    eprintln!(
        "{} design, d = {}{}: {} states, weights {:?}",
        p.scheme(),
        a.dim,
        p.big_dim().map(|b| format!(", D = {b}")).unwrap_or_default(),
        x.len(),
        weights
    );
    write_json(out, &x.to_file())
}

fn channel(a: &ChannelArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    json_only(format, "channel")?;
    let ch = a.channel.parse::<StandardChannel>()?.build(a.dim)?;
    if a.chi {
        let basis = ProductOperatorBasis::weyl(&DimensionFactorization::new(a.dim)?.subsystem_dims())?;
        write_json(out, &kraus_to_chi(&ch, &basis)?.to_file())
    } else {
        write_json(out, &ch.to_file())
    }
}

#[derive(Serialize)]
struct PlanReport {
    scheme: EstimatorScheme,
    d: Option<usize>,
    factors: Option<usize>,
    epsilon: f64,
    confidence: f64,
    shots: u64,
    formula: String,
}

fn plan(a: &PlanArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let scheme = EstimatorScheme::from(a.scheme);
    let bound = ShotBound::for_scheme(scheme, a.dim, a.factors)?;
    let shots = plan_shots(a.eps, 1.0 - a.conf, bound)?;
    eprintln!("M = {shots}  [{}]", bound.formula());
    let report = PlanReport {
        scheme,
        d: a.dim,
        factors: a.factors,
        epsilon: a.eps,
        confidence: a.conf,
        shots,
        formula: bound.formula(),
    };
    write_rows(out, format, &report, || vec![&report])
}

fn load_channel(t: &Target) -> Result<KrausChannel, CliError> {
    let path = Path::new(&t.channel);
    if path.exists() || t.channel.ends_with(".json") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read channel file {}: {e}", path.display())))?;
        let file: ChannelFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("malformed channel file {}: {e}", path.display())))?;
        let ch = KrausChannel::from_file(&file)?;
        if let Some(d) = t.dim {
            if d != ch.dim() {
                return Err(seqpt::Error::DimensionMismatch { expected: d, got: ch.dim() }.into());
            }
        }
        Ok(ch)
    } else {
        let dim = t.dim.ok_or_else(|| CliError::Config("--dim is required with a named channel".into()))?;
        Ok(t.channel.parse::<StandardChannel>()?.build(dim)?)
    }
}

fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    s.split(',')
        .map(|p| {
            let bad = || CliError::Config(format!("bad element '{p}' (expected i:j)"));
            let (i, j) = p.trim().split_once(':').ok_or_else(bad)?;
            Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

#[derive(Serialize)]
struct EstimateRow {
    scheme: EstimatorScheme,
    d: usize,
    #[serde(rename = "D")]
    big_dim: Option<usize>,
    i: usize,
    j: usize,
    estimate_re: f64,
    estimate_im: f64,
    shots: u64,
    epsilon_bound: Option<f64>,
    confidence: f64,
    seed: u64,
    mode: Mode,
}

impl From<&EstimateResult> for EstimateRow {
    fn from(r: &EstimateResult) -> Self {
        Self {
            scheme: r.scheme,
            d: r.d,
            big_dim: r.big_dim,
            i: r.i,
            j: r.j,
            estimate_re: r.estimate[0],
            estimate_im: r.estimate[1],
            shots: r.shots,
            epsilon_bound: r.epsilon_bound,
            confidence: r.confidence,
            seed: r.seed,
            mode: r.mode,
        }
    }
}

fn estimate(a: &EstimateArgs, seed: u64, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let ch = load_channel(&a.target)?;
    let p = protocol(&a.target.scheme, ch.dim())?;
    let pairs = match (&a.pairs, a.all, a.i.zip(a.j)) {
        (Some(list), _, _) => parse_pairs(list)?,
        (None, true, _) => {
            let n = p.basis().len();
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
        }
        (None, false, Some(pair)) => vec![pair],
        (None, false, None) => return Err(CliError::Config("choose elements with --i/--j, --pairs or --all".into())),
    };
    let mode = seqpt::Mode::from(a.target.mode);
    let shots = match (mode, a.shots, a.eps) {
        (Mode::Exact, _, _) => 0,
        (Mode::MonteCarlo, Some(m), None) => m,
        (Mode::MonteCarlo, None, Some(eps)) => {
            let bound = p.shot_bound();
            let m = plan_shots(eps, 1.0 - a.target.conf, bound)?;
            eprintln!("M = {m} from {}", bound.formula());
            m
        }
        _ => return Err(CliError::Config("Monte Carlo runs need exactly one of --shots or --eps".into())),
    };
    let opts = EstimateOptions { shots, confidence: a.target.conf, seed, mode };
    let rows = p.estimate_elements(&ch, &pairs, &opts)?;
    write_rows(out, format, &rows, || rows.iter().map(EstimateRow::from).collect())
}

#[derive(Serialize, Clone)]
struct SweepRow {
    i: usize,
    j: usize,
    shots: u64,
    repetition: u64,
    seed: u64,
    estimate_re: f64,
    estimate_im: f64,
    exact_re: f64,
    exact_im: f64,
    error: f64,
    epsilon_bound: Option<f64>,
}

#[derive(Serialize)]
struct SweepSummary {
    i: usize,
    j: usize,
    shots: u64,
    reps: u64,
    mean_error: f64,
    q50_error: f64,
    q95_error: f64,
    max_error: f64,
    epsilon_bound: Option<f64>,
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn sweep(a: &SweepArgs, seed: u64, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    if a.reps == 0 {
        return Err(CliError::Config("--reps must be positive".into()));
    }
    let ch = load_channel(&a.target)?;
    let p = protocol(&a.target.scheme, ch.dim())?;
    let exact = exact_chi(&ch, p.basis())?.get(a.i, a.j);
    let mode = seqpt::Mode::from(a.target.mode);
    let conf = a.target.conf;
    let jobs: Vec<(u64, u64)> = a.shots.iter().flat_map(|&m| (0..a.reps).map(move |r| (m, r))).collect();

    let rows: Vec<SweepRow> = match mode {
        Mode::Exact => {
            let opts = EstimateOptions { shots: 0, confidence: conf, seed, mode };
            let value = p.estimate_elements(&ch, &[(a.i, a.j)], &opts)?.remove(0).value();
            jobs.iter()
                .map(|&(m, r)| SweepRow {
                    i: a.i,
                    j: a.j,
                    shots: m,
                    repetition: r,
                    seed,
                    estimate_re: value.re,
                    estimate_im: value.im,
                    exact_re: exact.re,
                    exact_im: exact.im,
                    error: (value - exact).norm(),
                    epsilon_bound: None,
                })
                .collect()
        }
        Mode::MonteCarlo => {
            let sim = p.simulator(&ch, a.i, a.j)?;
            jobs.par_iter()
                .map(|&(m, r)| {
                    let s = derive_seed(seed, m, r);
                    let est = sim.estimate(m, conf, s)?;
                    let v = est.value();
                    Ok(SweepRow {
                        i: a.i,
                        j: a.j,
                        shots: m,
                        repetition: r,
                        seed: s,
                        estimate_re: v.re,
                        estimate_im: v.im,
                        exact_re: exact.re,
                        exact_im: exact.im,
                        error: (v - exact).norm(),
                        epsilon_bound: est.epsilon_bound,
                    })
                })
                .collect::<Result<_, seqpt::Error>>()?
        }
    };

    if !a.summary {
        return write_rows(out, format, &rows, || rows.clone());
    }
    let summary: Vec<SweepSummary> = a
        .shots
        .iter()
        .map(|&m| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.shots == m).collect();
            let mut errors: Vec<f64> = group.iter().map(|r| r.error).collect();
            errors.sort_by(f64::total_cmp);
            SweepSummary {
                i: a.i,
                j: a.j,
                shots: m,
                reps: a.reps,
                mean_error: errors.iter().sum::<f64>() / errors.len() as f64,
                q50_error: quantile(&errors, 0.5),
                q95_error: quantile(&errors, 0.95),
                max_error: errors[errors.len() - 1],
                epsilon_bound: group[0].epsilon_bound,
            }
        })
        .collect();
    for s in &summary {
        eprintln!("M = {:>8}  q95 error {:.4e}  bound {:?}", s.shots, s.q95_error, s.epsilon_bound);
    }
    write_rows(out, format, &summary, || summary.iter().collect())
}

#[derive(Serialize)]
struct IdentityRow<'a> {
    identity: &'a str,
    dims: String,
    trials: usize,
    max_deviation: f64,
    passed: bool,
}

fn verify(a: &VerifyArgs, seed: u64, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let all = a.identity.eq_ignore_ascii_case("all");
    let names: Vec<IdentityName> = if all { IdentityName::ALL.to_vec() } else { vec![a.identity.parse()?] };
    let mut reports: Vec<IdentityReport> = Vec::new();
    for name in names {
        let dim = a.dim.unwrap_or_else(|| name.default_dim());
        let trials = a.trials.unwrap_or_else(|| name.default_trials());
        let big = if name == IdentityName::NonUniform2Design { a.big } else { None };
        match check_identity(name, dim, big, trials, seed) {
            Ok(r) => {
                eprintln!(
                    "{:<18} {:<10} trials {:>4}  max deviation {:.3e}  {}",
                    r.identity,
                    format!("{:?}", r.dims),
                    r.trials,
                    r.max_deviation,
                    if r.passed { "pass" } else { "FAIL" }
                );
                reports.push(r);
            }
            Err(e @ seqpt::Error::IdentityNotApplicable { .. }) if all => eprintln!("skipped: {e}"),
            Err(e) => return Err(e.into()),
        }
    }
    write_rows(out, format, &reports, || {
        reports
            .iter()
            .map(|r| IdentityRow {
                identity: &r.identity,
                dims: r.dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
                trials: r.trials,
                max_deviation: r.max_deviation,
                passed: r.passed,
            })
            .collect()
    })?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} identity check(s) exceeded tolerance")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_lists() {
        assert_eq!(parse_pairs("0:0, 3:4").unwrap(), vec![(0, 0), (3, 4)]);
        assert!(parse_pairs("1-2").is_err());
        assert!(parse_pairs("a:1").is_err());
    }

    #[test]
    fn nearest_rank_quantiles() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(quantile(&v, 0.5), 10.0);
        assert_eq!(quantile(&v, 0.95), 19.0);
        assert_eq!(quantile(&v, 1.0), 20.0);
        assert_eq!(quantile(&[4.0], 0.95), 4.0);
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(seqpt::Error::NotPrimePower(6)).exit_code(), 2);
        assert_eq!(CliError::from(seqpt::Error::NotTracePreserving { deviation: 0.1 }).exit_code(), 3);
    }
}
