//! The `eml` command line: one subcommand per suite, JSON output to `--out`,
//! a human-readable summary on stdout.
//!
//! Exit codes: 0 when the suite passes, 1 on a mathematical failure, 2 on
//! usage errors and unsupported parameters.

pub mod cache;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::characters::WeightFunction;
use crate::error::{Error, Result};
use crate::local_factors::compute_P_poly;
use crate::measure::{katz_bridge_check, random_congruent_pair, verify_congruence, verify_interpolation, Report};
use crate::qexp::{apply_theta, build_E_twisted, build_G, check_duality, Mismatch};
use crate::schwartz_p::oracle::brute_force_all;
use crate::schwartz_p::{build_schwartz_pair, coeff_at_p};
pub use cache::{cache_key, cache_roundtrip, Cache, CacheEntry};
pub use config::Config;

#[derive(Parser, Debug)]
#[command(name = "eml", version, about = "Exact q-expansions of p-adic Eisenstein series on U(n,n)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set series.k=6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Write the JSON result here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Ignore the cache even if a directory is configured.
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute a q-expansion (`suite.route` = G or E).
    Qexp(Common),
    /// Compare the brute-force local coefficient at p with the closed form for every b mod p^c.
    Lemma10(Common),
    /// The local polynomial at `suite.ell` for the index value `suite.beta`.
    PPoly(Common),
    /// Interpolation: moment of the avatar against theta^d G.
    VerifyInterp(Common),
    /// Congruences between moments of random congruent test pairs.
    VerifyCongruence(Common),
    /// Transport through the dual cusp at `suite.lambda`.
    Duality(Common),
    /// Rank-one bridge identities for the unit `suite.e`.
    Bridge(Common),
}

/// Result of a suite: JSON document, verdict and a small table.
pub struct Outcome {
    pub json: serde_json::Value,
    pub pass: bool,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Outcome {
    fn from_report(r: &Report) -> Self {
        let mut rows = vec![vec![r.check.clone(), if r.pass { "PASS" } else { "FAIL" }.into(), r.failures.len().to_string()]];
        rows.extend(r.failures.iter().take(20).map(failure_row));
        Outcome { json: r.to_json(), pass: r.pass, columns: cols(&["check", "result", "failures"]), rows }
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn failure_row(m: &Mismatch) -> Vec<String> {
    let beta = m.beta.iter().map(|r| r.join(" ")).collect::<Vec<_>>().join("; ");
    vec![format!("  b = [{beta}]"), "mismatch".into(), String::new()]
}

fn cached<F>(cfg: &Config, common: &Common, kind: &str, compute: F) -> Result<String>
where
    F: FnOnce() -> Result<String>,
{
    match cfg.cache_dir() {
        Some(dir) if !common.no_cache => {
            let cache = Cache::new(&dir)?;
            cache.get_or_compute(&cache_key(kind, &cfg.canonical()), compute)
        }
        _ => compute(),
    }
}

fn run_qexp(cfg: &Config, common: &Common) -> Result<Outcome> {
    let ctx = cfg.ctx()?;
    let euler = cfg.euler(&ctx)?;
    let part = cfg.part()?;
    let bound = cfg.bound()?;
    let chi = cfg.chi(&ctx)?;
    let mu = cfg.mu(&ctx, &part)?;
    let d = cfg.twist()?;
    let route = cfg.string("suite.route")?;
    let text = cached(cfg, common, "qexp", || {
        let series = match route.as_str() {
            "G" => apply_theta(&build_G(chi.inf.k, chi.inf.nu, &chi, &mu, &euler, bound, &ctx, &part)?, d),
            "E" => build_E_twisted(&WeightFunction::avatar(&chi), &mu, d, &euler, bound, &ctx, &part)?,
            other => return Err(Error::Config(format!("suite.route = {other:?}; expected G or E"))),
        };
        Ok(series.to_canonical_string())
    })?;
    let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let series = crate::qexp::QExpansion::from_json(&json)?;
    let rows = series
        .coeffs
        .iter()
        .map(|c| {
            let beta = c.beta.to_strings().iter().map(|r| r.join(" ")).collect::<Vec<_>>().join("; ");
            let mut value = c.value.to_string();
            for f in &c.formal {
                value.push_str(&format!(" * P[{}^{}]({})", f.ell, f.ord, f.arg));
            }
            vec![format!("[{beta}]"), value]
        })
        .collect();
    Ok(Outcome { json, pass: true, columns: cols(&["beta", "coefficient"]), rows })
}

fn run_lemma10(cfg: &Config) -> Result<Outcome> {
    let ctx = cfg.ctx()?;
    let part = cfg.part()?;
    let chi = cfg.chi(&ctx)?;
    let mu = cfg.mu(&ctx, &part)?;
    let pair = build_schwartz_pair(&chi, &mu, &part, &ctx)?;
    let oracle = brute_force_all(&pair);
    let mut failures = Vec::new();
    for b in oracle.matrices() {
        let fast = coeff_at_p(&b, &pair);
        let slow = oracle.get(&b);
        if &fast != slow {
            failures.push(Mismatch {
                beta: vec![b.e.iter().map(|x| x.to_string()).collect()],
                left: Some(slow.canonical().to_json()),
                right: Some(fast.canonical().to_json()),
            });
        }
    }
    let params = serde_json::json!({
        "D": ctx.d, "p": ctx.p, "c": ctx.c, "n": part.n, "parts": part.parts,
        "charId": chi.id(), "mu": mu.id(), "indices": oracle.len(),
    });
    let report = Report { check: "lemma10".into(), params, pass: failures.is_empty(), failures };
    Ok(Outcome::from_report(&report))
}

fn run_p_poly(cfg: &Config, common: &Common) -> Result<Outcome> {
    let ctx = cfg.ctx()?;
    let euler = cfg.euler(&ctx)?;
    let beta = cfg.rational("suite.beta")?;
    let ell = cfg.uint("suite.ell")?;
    let n = cfg.n()?;
    let text = cached(cfg, common, "p-poly", || Ok(compute_P_poly(&beta, ell, n, &euler)?.to_json()))?;
    let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let rows = json["coeffs"]
        .as_array()
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(j, c)| vec![format!("Y^{j}"), c.to_string()])
        .collect();
    Ok(Outcome { json, pass: true, columns: cols(&["term", "coefficient"]), rows })
}

fn run_interp(cfg: &Config) -> Result<Outcome> {
    let ctx = cfg.ctx()?;
    let euler = cfg.euler(&ctx)?;
    let part = cfg.part()?;
    let chi = cfg.chi(&ctx)?;
    let mu = cfg.mu(&ctx, &part)?;
    let r = verify_interpolation(&chi, &mu, cfg.twist()?, &euler, cfg.bound()?, &ctx, &part)?;
    Ok(Outcome::from_report(&r))
}

fn run_congruence(cfg: &Config) -> Result<Outcome> {
    let ctx = cfg.ctx()?;
    let euler = cfg.euler(&ctx)?;
    let part = cfg.part()?;
    let bound = cfg.bound()?;
    let m = u32::try_from(cfg.uint("suite.m")?).map_err(|_| Error::Config("suite.m too large".into()))?;
    let seed = cfg.uint("suite.seed")?;
    let samples = cfg.uint("suite.samples")?;
    let mut failures = Vec::new();
    for s in seed..seed + samples {
        let (a, b) = random_congruent_pair(s, m, cfg.inf()?, &ctx, part.r())?;
        failures.extend(verify_congruence(&a, &b, m, &euler, bound, &ctx, &part)?.failures);
    }
    let params = serde_json::json!({
        "D": ctx.d, "p": ctx.p, "c": ctx.c, "M": ctx.precision, "m": m,
        "k": cfg.int("series.k")?, "nu": cfg.int("series.nu")?, "B": bound,
        "seed": seed, "samples": samples,
    });
    let report = Report { check: "congruence".into(), params, pass: failures.is_empty(), failures };
    Ok(Outcome::from_report(&report))
}

fn run_duality(cfg: &Config) -> Result<Outcome> {
    let ctx = cfg.ctx()?;
    let euler = cfg.euler(&ctx)?;
    let part = cfg.part()?;
    let chi = cfg.chi(&ctx)?;
    let mu = cfg.mu(&ctx, &part)?;
    let lambda = cfg.rational("suite.lambda")?;
    let g = build_G(chi.inf.k, chi.inf.nu, &chi, &mu, &euler, cfg.bound()?, &ctx, &part)?;
    let d = check_duality(&g, &lambda, &chi, chi.inf.k)?;
    let params = serde_json::json!({"lambda": lambda.to_string(), "k": chi.inf.k, "charId": chi.id(), "involution": d.involution});
    let report = Report { check: "duality".into(), params, pass: d.pass, failures: d.mismatches };
    Ok(Outcome::from_report(&report))
}

fn run_bridge(cfg: &Config) -> Result<Outcome> {
    let ctx = cfg.ctx()?;
    let part = cfg.part()?;
    let chi = cfg.chi(&ctx)?;
    let mu = cfg.mu(&ctx, &part)?;
    let pair = build_schwartz_pair(&chi, &mu, &part, &ctx)?;
    let r = katz_bridge_check(&pair, cfg.int("suite.e")?, chi.inf.k)?;
    Ok(Outcome::from_report(&r))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render(o: &Outcome, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&o.json).expect("plain data") + "\n",
        Format::Csv => {
            let mut out = String::new();
            for row in std::iter::once(&o.columns).chain(&o.rows) {
                out.push_str(&row.iter().map(|s| csv_field(s)).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
        Format::Table => {
            let ncols = o.columns.len();
            let mut widths = vec![0; ncols];
            for row in std::iter::once(&o.columns).chain(&o.rows) {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let mut out = String::new();
            for row in std::iter::once(&o.columns).chain(&o.rows) {
                let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                out.push_str(cells.join("  ").trim_end());
                out.push('\n');
            }
            out
        }
    }
}

fn dispatch(cmd: &Command) -> Result<(Outcome, Common)> {
    let common = match cmd {
        Command::Qexp(c)
        | Command::Lemma10(c)
        | Command::PPoly(c)
        | Command::VerifyInterp(c)
        | Command::VerifyCongruence(c)
        | Command::Duality(c)
        | Command::Bridge(c) => c.clone(),
    };
    let cfg = Config::load(common.config.as_deref(), &common.set)?;
    let outcome = match cmd {
        Command::Qexp(_) => run_qexp(&cfg, &common),
        Command::Lemma10(_) => run_lemma10(&cfg),
        Command::PPoly(_) => run_p_poly(&cfg, &common),
        Command::VerifyInterp(_) => run_interp(&cfg),
        Command::VerifyCongruence(_) => run_congruence(&cfg),
        Command::Duality(_) => run_duality(&cfg),
        Command::Bridge(_) => run_bridge(&cfg),
    }?;
    Ok((outcome, common))
}

/// Run `argv` (including the program name), writing the summary to `stdout`
/// and diagnostics to `stderr`; returns the exit code.
pub fn run_command_with(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return 2;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    let (outcome, common) = match dispatch(&cli.command) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    if let Some(path) = &common.out {
        let text = serde_json::to_string_pretty(&outcome.json).expect("plain data") + "\n";
        if let Err(e) = std::fs::write(path, text) {
            let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
            return 2;
        }
    }
    let _ = stdout.write_all(render(&outcome, common.format).as_bytes());
    if outcome.pass {
        0
    } else {
        1
    }
}

pub fn run_command(argv: &[String]) -> i32 {
    run_command_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
