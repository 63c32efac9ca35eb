//! `mixvol` command dispatch and report files.

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixvol_core::harness::{run_campaign, Campaign};
use mixvol_core::higher_rank::{tilde_mixed_volume, BodyTuple, Partition};
use mixvol_core::mixed::{mixed_volume, projection_body};
use mixvol_core::scalar::{format_scalar, to_f64};
use mixvol_core::spherical::{diagram_check, hr_check, kernel_check, selfadjoint_check, Sphere, SphereCheck, DEFAULT_BAND};
use mixvol_core::valuation::{Coeff, MixedVolumeValuation, ValuationJson};
use mixvol_core::{BodyJson, Error, Polytope, Result, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const THREADS_ENV: &str = "MIXVOL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "mixvol", version, about = "Exact mixed volumes and higher-rank mixed volumes of polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (falls back to MIXVOL_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mixed volume of n body files in dimension n.
    Compute {
        #[arg(long, num_args = 1.., required = true)]
        bodies: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Higher-rank mixed volume for a partition such as 1,1,1.
    Tilde {
        #[arg(long, value_delimiter = ',', required = true)]
        partition: Vec<usize>,
        /// One file per tuple (JSON array of bodies), or one body file per body.
        #[arg(long, num_args = 1.., required = true)]
        tuples: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Mixed projection body of n-1 body files.
    Projbody {
        #[arg(long, num_args = 1.., required = true)]
        bodies: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Valuation algebra operations on a JSON spec.
    Val {
        #[arg(long, value_enum)]
        op: ValOp,
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Spherical Hodge-Riemann checks.
    Sphere {
        #[arg(long, value_enum)]
        check: SphereKind,
        #[arg(long = "L", default_value_t = DEFAULT_BAND)]
        band: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized inequality campaign.
    Verify {
        #[arg(value_enum)]
        campaign: CampaignKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Matrix size for daf.
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Band limit for hr.
        #[arg(long = "L", default_value_t = DEFAULT_BAND)]
        band: usize,
        /// Dimension for af, daf2 and graphing.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ValOp {
    Convolve,
    Product,
    Sigma,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SphereKind {
    Hr,
    Selfadjoint,
    Kernel,
    Diagram,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CampaignKind {
    Af,
    Daf,
    Daf2,
    Dmv,
    Graphing,
    Hr,
}

/// Report written by every subcommand.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportFile {
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub results: Value,
    pub exact: BTreeMap<String, String>,
    pub decimal: BTreeMap<String, f64>,
    pub runtime_ms: u64,
}

impl ReportFile {
    fn new(command: &str, params: Value, seed: Option<u64>) -> Self {
        ReportFile {
            command: command.into(),
            params,
            seed,
            results: Value::Null,
            exact: BTreeMap::new(),
            decimal: BTreeMap::new(),
            runtime_ms: 0,
        }
    }

    fn put_exact(&mut self, key: &str, v: &Scalar) {
        self.exact.insert(key.into(), format_scalar(v));
        self.decimal.insert(key.into(), to_f64(v));
    }

    fn put_coeff(&mut self, key: &str, c: &Coeff) {
        self.put_exact(&format!("{key}.re"), &c.re);
        self.put_exact(&format!("{key}.im"), &c.im);
    }
}

pub fn parse_body(path: &Path) -> Result<Polytope> {
    BodyJson::parse_str(&read(path)?)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| Error::Parse(format!("{THREADS_ENV}={s:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

/// Tuple files hold a JSON array of bodies; a body document counts as a
/// one-body tuple.
fn parse_tuple_file(path: &Path) -> Result<Vec<Polytope>> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    match v {
        Value::Array(items) => items
            .into_iter()
            .map(|it| serde_json::from_value::<BodyJson>(it).map_err(|e| Error::Parse(e.to_string()))?.to_polytope())
            .collect(),
        other => Ok(vec![serde_json::from_value::<BodyJson>(other).map_err(|e| Error::Parse(e.to_string()))?.to_polytope()?]),
    }
}

fn group_tuples(p: &Partition, files: Vec<Vec<Polytope>>) -> Result<Vec<BodyTuple>> {
    if files.len() == p.len() {
        return Ok(files.into_iter().map(BodyTuple::new).collect());
    }
    let flat: Vec<Polytope> = files.into_iter().flatten().collect();
    let need: usize = p.parts().iter().map(|k| p.n() - k).sum();
    if flat.len() != need {
        return Err(Error::LengthMismatch { expected: need, found: flat.len() });
    }
    let mut it = flat.into_iter();
    Ok(p.parts().iter().map(|k| BodyTuple::new(it.by_ref().take(p.n() - k).collect())).collect())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValSpec {
    operands: Vec<ValuationJson>,
    #[serde(default)]
    evaluate_at: Option<BodyJson>,
}

fn campaign_of(kind: CampaignKind, m: usize, band: usize, n: usize) -> Campaign {
    match kind {
        CampaignKind::Af => Campaign::Af { n },
        CampaignKind::Daf => Campaign::Daf { m },
        CampaignKind::Daf2 => Campaign::Daf2 { n },
        CampaignKind::Dmv => Campaign::Dmv,
        CampaignKind::Graphing => Campaign::Graphing { n },
        CampaignKind::Hr => Campaign::Hr { band },
    }
}

fn sphere_report(report: &mut ReportFile, c: &SphereCheck) -> i32 {
    report.results = serde_json::to_value(c).expect("check serializes");
    for (k, v) in &c.values {
        report.decimal.insert((*k).into(), *v);
    }
    if c.passed {
        0
    } else {
        2
    }
}

fn execute(cmd: Command) -> Result<(ReportFile, Option<PathBuf>, i32)> {
    let start = Instant::now();
    let (mut report, common, code) = match cmd {
        Command::Compute { bodies, common } => {
            let ps = bodies.iter().map(|p| parse_body(p)).collect::<Result<Vec<_>>>()?;
            let mut r = ReportFile::new("compute", json!({"bodies": bodies}), None);
            let v = mixed_volume(&ps)?;
            r.results = json!({"mixed_volume": format_scalar(&v)});
            r.put_exact("mixed_volume", &v);
            (r, common, 0)
        }
        Command::Tilde { partition, tuples, common } => {
            let n = partition.iter().sum();
            let p = Partition::new(n, partition.clone())?;
            let files = tuples.iter().map(|f| parse_tuple_file(f)).collect::<Result<Vec<_>>>()?;
            let ts = group_tuples(&p, files)?;
            let v = tilde_mixed_volume(&p, &ts)?;
            let mut r = ReportFile::new("tilde", json!({"partition": partition, "tuples": tuples}), None);
            r.results = json!({"tilde_mixed_volume": format_scalar(&v), "cokernel_dim": p.cokernel_dim()});
            r.put_exact("tilde_mixed_volume", &v);
            (r, common, 0)
        }
        Command::Projbody { bodies, common } => {
            let ps = bodies.iter().map(|p| parse_body(p)).collect::<Result<Vec<_>>>()?;
            let pi = projection_body(&ps)?;
            let mut r = ReportFile::new("projbody", json!({"bodies": bodies}), None);
            r.results = json!({"projection_body": BodyJson::from_polytope(&pi)});
            r.put_exact("volume", &pi.volume());
            (r, common, 0)
        }
        Command::Val { op, spec, common } => {
            let doc: ValSpec = serde_json::from_str(&read(&spec)?).map_err(|e| Error::Parse(e.to_string()))?;
            let vals = doc.operands.iter().map(ValuationJson::to_valuation).collect::<Result<Vec<_>>>()?;
            let mut r = ReportFile::new("val", json!({"op": op, "spec": spec}), None);
            let first = vals.first().ok_or(Error::EmptyInput)?;
            match op {
                ValOp::Product => {
                    let c = MixedVolumeValuation::product_top_degree(&vals)?;
                    r.results = json!({"volume_coefficient": {"re": format_scalar(&c.re), "im": format_scalar(&c.im)}});
                    r.put_coeff("volume_coefficient", &c);
                }
                ValOp::Convolve | ValOp::Sigma => {
                    let out = if matches!(op, ValOp::Sigma) {
                        if vals.len() != 1 {
                            return Err(Error::LengthMismatch { expected: 1, found: vals.len() });
                        }
                        first.euler_verdier()
                    } else {
                        vals[1..].iter().try_fold(first.clone(), |acc, v| acc.convolve(v))?
                    };
                    r.results = json!({"valuation": out.to_json()});
                    if let Some(b) = &doc.evaluate_at {
                        let v = out.evaluate(&b.to_polytope()?)?;
                        r.put_coeff("value", &v);
                    }
                }
            }
            (r, common, 0)
        }
        Command::Sphere { check, band, seed, count, common } => {
            let sphere = Sphere::new(band);
            let c = match check {
                SphereKind::Kernel => kernel_check(&sphere)?,
                SphereKind::Selfadjoint => selfadjoint_check(&sphere, seed, count)?,
                SphereKind::Hr => hr_check(&sphere, seed, count)?,
                SphereKind::Diagram => diagram_check(&sphere, seed, count)?,
            };
            let mut r = ReportFile::new("sphere", json!({"check": check, "L": band, "count": count}), Some(seed));
            let code = sphere_report(&mut r, &c);
            (r, common, code)
        }
        Command::Verify { campaign, seed, count, m, band, n, common } => {
            let threads = resolve_threads(common.threads)?;
            let c = campaign_of(campaign, m, band, n);
            let rep = run_campaign(c, seed, count, threads)?;
            let mut r = ReportFile::new("verify", serde_json::to_value(c).expect("campaign serializes"), Some(seed));
            r.params["count"] = json!(count);
            if let Some(s) = &rep.min_slack {
                if let Some(e) = &s.exact {
                    r.exact.insert("min_slack".into(), e.clone());
                }
                r.decimal.insert("min_slack".into(), s.decimal);
            }
            let code = rep.exit_code();
            r.results = serde_json::to_value(&rep).expect("report serializes");
            (r, common, code)
        }
    };
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok((report, common.out, code))
}

fn emit(report: &ReportFile, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Error::Parse(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs the command. Exit codes: 0 on
/// success, 2 when a check or campaign found a violation, 1 on any error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command).and_then(|(report, out, code)| emit(&report, out.as_deref()).map(|_| code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mixvol: {e}");
            1
        }
    }
}
