//! Flat CSV input, TSV reports and the orchestration behind the `casekin`
//! command-line tool.
//!
//! Input is one row per person with header `family_id,role,time,status`,
//! `role` being `P` (proband) or `R` (relative).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::bandwidth::{percentile_ci, select_bandwidth, BandwidthConfig, BandwidthSelection, CiBands, CiConfig};
use crate::error::{Error, Result};
use crate::frailty::{oracle_pipeline_error, simulate_dataset, FrailtyKind, Scenario, SimConfig, SimulatedStudy};
use crate::marginal::{EstimatorConfig, MarginalEstimate};
use crate::surfaces::ConditionalSurfaces;
use crate::types::{validate_dataset, Dataset, RawRow, Role};

pub const CSV_HEADER: [&str; 4] = ["family_id", "role", "time", "status"];

/// Parses the flat family CSV from any reader.
pub fn parse_csv_reader<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(line, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        if !seen_header {
            let fields: Vec<&str> = record.iter().collect();
            if fields != CSV_HEADER {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header `{}`", CSV_HEADER.join(",")),
                });
            }
            seen_header = true;
            continue;
        }
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let role = match &record[1] {
            "P" => Role::Proband,
            "R" => Role::Relative,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("role must be P or R, found `{other}`"),
                })
            }
        };
        let time: f64 = record[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid time `{}`", &record[2]),
        })?;
        let status = match &record[3] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("status must be 0 or 1, found `{other}`"),
                })
            }
        };
        rows.push(RawRow::new(&record[0], role, time, status));
    }
    validate_dataset(rows)
}

pub fn parse_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_csv_reader(BufReader::new(file))
}

pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    for row in ds.to_rows() {
        let role = match row.role {
            Role::Proband => "P",
            Role::Relative => "R",
        };
        writeln!(w, "{},{},{},{}", row.family_id, role, row.time, row.status)?;
    }
    w.flush()?;
    Ok(())
}

/// 64-bit FNV-1a of a configuration description.
pub fn fingerprint(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn header_comment(command: &str, config: &str) -> String {
    format!("# casekin {command}\n# config: {config}\n# fingerprint: {:016x}\n", fingerprint(config))
}

/// Report ages: every 2 years from the floored 5th percentile of proband
/// ages up to the largest proband age.
pub fn report_ages(ds: &Dataset) -> Vec<f64> {
    let mut ages: Vec<f64> = ds.families().iter().map(|f| f.proband.time).collect();
    ages.sort_by(f64::total_cmp);
    let start = crate::bandwidth::quantile_type7(&ages, 0.05).floor();
    let end = ds.tau0();
    let mut out = Vec::new();
    let mut t = start;
    while t <= end + 1e-9 {
        out.push(t);
        t += 2.0;
    }
    out
}

/// Age-by-estimator table: `t, Lambda_hat, S_hat, S_tilde, naive_km` and,
/// when a band is given, `lower, upper`.
pub fn write_estimate_tsv<W: Write>(
    est: &MarginalEstimate,
    ages: &[f64],
    ci: Option<&CiBands>,
    config: &str,
    writer: W,
) -> Result<()> {
    let mut w = BufWriter::new(writer);
    write!(w, "{}", header_comment("estimate", config))?;
    writeln!(w, "# bandwidth: {}", est.bandwidth)?;
    let g = &est.t_grid;
    write!(w, "t\tLambda_hat\tS_hat\tS_tilde\tnaive_km")?;
    if ci.is_some() {
        write!(w, "\tlower\tupper")?;
    }
    writeln!(w)?;
    for &t in ages {
        write!(
            w,
            "{t}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            g.interpolate(&est.lambda_hat, t),
            g.interpolate(&est.s_hat, t),
            g.interpolate(&est.s_tilde, t),
            g.interpolate(&est.km_naive, t)
        )?;
        if let Some(b) = ci {
            write!(w, "\t{:.6}\t{:.6}", b.t_grid.interpolate(&b.lower, t), b.t_grid.interpolate(&b.upper, t))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ci_tsv<W: Write>(bands: &CiBands, config: &str, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    write!(w, "{}", header_comment("ci", config))?;
    writeln!(w, "# level: {} succeeded: {}/{}", bands.level, bands.succeeded, bands.attempted)?;
    writeln!(w, "t\tS_tilde\tlower\tupper")?;
    for (j, t) in bands.t_grid.points().iter().enumerate() {
        writeln!(w, "{t:.6}\t{:.6}\t{:.6}\t{:.6}", bands.estimate[j], bands.lower[j], bands.upper[j])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_imse_tsv<W: Write>(sel: &BandwidthSelection, config: &str, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    write!(w, "{}", header_comment("select-bandwidth", config))?;
    writeln!(w, "stage\th\timse")?;
    for (stage, list) in [(1, &sel.stage1), (2, &sel.stage2)] {
        for c in list {
            match c.imse {
                Some(v) => writeln!(w, "{stage}\t{}\t{v:.9e}", c.h)?,
                None => writeln!(w, "{stage}\t{}\tNA", c.h)?,
            }
        }
    }
    writeln!(w, "# selected: {}", sel.h)?;
    w.flush()?;
    Ok(())
}

pub fn write_truth_tsv<W: Write>(study: &SimulatedStudy, config: &str, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    write!(w, "{}", header_comment("simulate", config))?;
    writeln!(w, "t\tS_true")?;
    for (t, s) in study.truth_grid.points().iter().zip(&study.true_survival) {
        writeln!(w, "{t:.4}\t{s:.9}")?;
    }
    w.flush()?;
    Ok(())
}

/// `u, s, S0, S1, Lam0star`, one row per lattice point.
pub fn write_surfaces_tsv<W: Write>(surf: &ConditionalSurfaces, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "u\ts\tS0\tS1\tLam0star")?;
    for (i, s) in surf.s_grid.points().iter().enumerate() {
        for (j, u) in surf.u_grid.points().iter().enumerate() {
            writeln!(
                w,
                "{u:.6}\t{s:.6}\t{:.8}\t{:.8}\t{:.8e}",
                surf.s0.get(i, j),
                surf.s1.get(i, j),
                surf.lam0_star.get(i, j)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Estimate,
    Simulate,
    SelectBandwidth,
    Ci,
    OracleCheck,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthChoice {
    Fixed(f64),
    Auto,
}

impl std::str::FromStr for BandwidthChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(BandwidthChoice::Auto);
        }
        let h: f64 = s
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bandwidth must be a number or `auto`, got `{s}`")))?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
        }
        Ok(BandwidthChoice::Fixed(h))
    }
}

/// Simulation design parameters exposed on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub frailty: FrailtyKind,
    pub kendall_tau: f64,
    pub event_rate: f64,
    /// Target share of censored relatives; `None` picks 0.60 for a 60% event
    /// rate, 0.90 for 15%, and no interim censoring otherwise.
    pub censoring: Option<f64>,
    pub n1: usize,
    pub ratio: usize,
    pub relatives: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            frailty: FrailtyKind::Gamma,
            kendall_tau: 0.5,
            event_rate: 0.6,
            censoring: None,
            n1: 500,
            ratio: 1,
            relatives: 1,
        }
    }
}

impl SimSettings {
    pub fn scenario(&self) -> Scenario {
        let censoring = self.censoring.or(if (self.event_rate - 0.60).abs() < 1e-12 {
            Some(0.60)
        } else if (self.event_rate - 0.15).abs() < 1e-12 {
            Some(0.90)
        } else {
            None
        });
        Scenario {
            kind: self.frailty,
            kendall_tau: self.kendall_tau,
            event_rate: self.event_rate,
            censoring_fraction: censoring,
            end_of_study: 110.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub bandwidth: BandwidthChoice,
    pub seed: u64,
    pub with_ci: bool,
    pub estimator: EstimatorConfig,
    pub selection: BandwidthConfig,
    pub ci: CiConfig,
    pub sim: SimSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Estimate,
            input: None,
            output: None,
            bandwidth: BandwidthChoice::Auto,
            seed: 1,
            with_ci: false,
            estimator: EstimatorConfig::default(),
            selection: BandwidthConfig::default(),
            ci: CiConfig::default(),
            sim: SimSettings::default(),
        }
    }
}

impl RunConfig {
    fn describe(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "bandwidth={:?} seed={} s_grid={} u_grid={} t_grid={}",
            self.bandwidth, self.seed, self.estimator.s_points, self.estimator.u_points, self.estimator.t_points
        );
        match self.command {
            Command::Estimate | Command::SelectBandwidth | Command::Ci => {
                let _ = write!(s, " b_inner={} pilot_h={}", self.selection.b_inner, self.selection.pilot_h);
                if self.command == Command::Ci || self.with_ci {
                    let _ = write!(s, " b_outer={} level={}", self.ci.b_outer, self.ci.level);
                }
            }
            Command::Simulate | Command::OracleCheck => {
                let sim = &self.sim;
                let _ = write!(
                    s,
                    " frailty={} tau={} event_rate={} censoring={:?} n1={} ratio={} relatives={}",
                    sim.frailty.name(),
                    sim.kendall_tau,
                    sim.event_rate,
                    sim.censoring,
                    sim.n1,
                    sim.ratio,
                    sim.relatives
                );
            }
        }
        s
    }

    fn selection_config(&self) -> BandwidthConfig {
        BandwidthConfig {
            seed: crate::rng::derive_seed(self.seed, 1),
            ..self.selection.clone()
        }
    }

    fn ci_config(&self) -> CiConfig {
        CiConfig {
            seed: crate::rng::derive_seed(self.seed, 2),
            ..self.ci.clone()
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// False when the command ran but its check failed (oracle-check).
    pub success: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout()),
    })
}

fn load_input(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--input is required".into()))?;
    parse_csv(path)
}

fn resolve_bandwidth(ds: &Dataset, cfg: &RunConfig) -> Result<(f64, Option<BandwidthSelection>)> {
    match cfg.bandwidth {
        BandwidthChoice::Fixed(h) => Ok((h, None)),
        BandwidthChoice::Auto => {
            let sel = select_bandwidth(ds, &cfg.selection_config(), &cfg.estimator)?;
            Ok((sel.h, Some(sel)))
        }
    }
}

/// Executes one command described by `cfg`.
pub fn run_command(cfg: &RunConfig) -> Result<RunOutcome> {
    let config = cfg.describe();
    let mut files = Vec::new();
    if let Some(p) = &cfg.output {
        files.push(p.clone());
    }
    match cfg.command {
        Command::Estimate => {
            let ds = load_input(cfg)?;
            let (h, _) = resolve_bandwidth(&ds, cfg)?;
            let est = crate::marginal::estimate_marginal(&ds, h, &cfg.estimator)?;
            let bands = if cfg.with_ci {
                Some(percentile_ci(&ds, h, &cfg.ci_config(), &cfg.estimator)?)
            } else {
                None
            };
            let ages = report_ages(&ds);
            write_estimate_tsv(&est, &ages, bands.as_ref(), &config, open_output(cfg.output.as_deref())?)?;
            Ok(RunOutcome {
                success: true,
                summary: format!(
                    "estimated S(t) for {} families (n1={}, n0={}) at h={h}",
                    ds.len(),
                    ds.n1(),
                    ds.n0()
                ),
                files,
            })
        }
        Command::Simulate => {
            let sim = &cfg.sim;
            let model = sim.scenario().model(sim.ratio, cfg.seed)?;
            let study = simulate_dataset(&SimConfig::new(model, sim.n1, sim.ratio, sim.relatives, cfg.seed))?;
            write_csv(&study.dataset, open_output(cfg.output.as_deref())?)?;
            if let Some(out) = &cfg.output {
                let truth = truth_path(out);
                let file = File::create(&truth).map_err(|e| Error::Io(format!("{}: {e}", truth.display())))?;
                write_truth_tsv(&study, &config, file)?;
                files.push(truth);
            }
            Ok(RunOutcome {
                success: true,
                summary: format!(
                    "simulated {} families ({} cases, {} controls) with {} relatives",
                    study.dataset.len(),
                    study.dataset.n1(),
                    study.dataset.n0(),
                    study.dataset.n_relatives()
                ),
                files,
            })
        }
        Command::SelectBandwidth => {
            let ds = load_input(cfg)?;
            let sel = select_bandwidth(&ds, &cfg.selection_config(), &cfg.estimator)?;
            write_imse_tsv(&sel, &config, open_output(cfg.output.as_deref())?)?;
            Ok(RunOutcome {
                success: true,
                summary: format!("selected h={} (stage-1 minimum {})", sel.h, sel.h1),
                files,
            })
        }
        Command::Ci => {
            let ds = load_input(cfg)?;
            let (h, _) = resolve_bandwidth(&ds, cfg)?;
            let bands = percentile_ci(&ds, h, &cfg.ci_config(), &cfg.estimator)?;
            write_ci_tsv(&bands, &config, open_output(cfg.output.as_deref())?)?;
            Ok(RunOutcome {
                success: true,
                summary: format!(
                    "{:.0}% percentile band at h={h} from {}/{} replications",
                    100.0 * bands.level,
                    bands.succeeded,
                    bands.attempted
                ),
                files,
            })
        }
        Command::OracleCheck => {
            let mut scenario = cfg.sim.scenario();
            scenario.censoring_fraction = None;
            let model = scenario.model(cfg.sim.ratio, cfg.seed)?;
            let report = oracle_pipeline_error(
                &model,
                cfg.estimator.s_points,
                cfg.estimator.u_points,
                cfg.estimator.t_points,
            )?;
            let mut w = BufWriter::new(open_output(cfg.output.as_deref())?);
            write!(w, "{}", header_comment("oracle-check", &config))?;
            writeln!(w, "t\tLambda_hat\tLambda_true")?;
            for ((t, a), b) in report.t_grid.points().iter().zip(&report.lambda_hat).zip(&report.lambda_true) {
                writeln!(w, "{t:.6}\t{a:.9}\t{b:.9}")?;
            }
            writeln!(w, "# max_abs_error: {:.3e} at t={:.3}", report.max_abs_error, report.worst_t)?;
            w.flush()?;
            let success = report.max_abs_error < 1e-3;
            Ok(RunOutcome {
                success,
                summary: format!(
                    "oracle max |Lambda_hat - Lambda| = {:.3e} at t={:.2} ({})",
                    report.max_abs_error,
                    report.worst_t,
                    if success { "ok" } else { "FAILED, tolerance 1e-3" }
                ),
                files,
            })
        }
    }
}

/// `<stem>_truth.tsv` next to a simulated CSV.
pub fn truth_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("simulated");
    csv_path.with_file_name(format!("{stem}_truth.tsv"))
}

/// Caps the global rayon pool at `CASEKIN_THREADS` when set.
pub fn configure_threads_from_env() {
    if let Some(n) = std::env::var("CASEKIN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "family_id,role,time,status\nf1,P,64,1\nf1,R,50,1\nf2,P,60,0\nf2,R,93,0\n";

    #[test]
    fn minimal_file() {
        let ds = parse_csv_reader(MINIMAL.as_bytes()).unwrap();
        assert_eq!((ds.n1(), ds.n0()), (1, 1));
        assert_eq!(ds.tau(), 93.0);
    }

    #[test]
    fn bad_status_reports_line() {
        let text = "family_id,role,time,status\nf1,P,64,1\nf1,R,50,2\n";
        match parse_csv_reader(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_header() {
        assert!(matches!(
            parse_csv_reader("id,role,time,status\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        assert_eq!(parse_csv_reader("".as_bytes()), Err(Error::EmptyDataset { n1: 0, n0: 0 }));
    }

    #[test]
    fn bandwidth_choice_parsing() {
        assert_eq!("auto".parse::<BandwidthChoice>().unwrap(), BandwidthChoice::Auto);
        assert_eq!("0.3".parse::<BandwidthChoice>().unwrap(), BandwidthChoice::Fixed(0.3));
        assert!("-1".parse::<BandwidthChoice>().is_err());
        assert!("wide".parse::<BandwidthChoice>().is_err());
    }

    #[test]
    fn report_ages_step_two_years() {
        let ds = parse_csv_reader(MINIMAL.as_bytes()).unwrap();
        assert_eq!(report_ages(&ds), vec![60.0, 62.0, 64.0]);
    }
}
