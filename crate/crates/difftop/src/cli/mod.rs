//! The `difftop` command line: tables, the verification driver and the cache.
//!
//! Exit codes: 0 success, 1 a verification clause failed, 2 usage error.

pub mod cache;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::correlators::{loop_check, random_points, tr_compare, tt_audit, w1_tower, LoopSystem};
use crate::diffsys::{l_coeffs_z, l_p1, m_audit, m_p1, MTower};
use crate::dlbridge::{bridge_check, DTower};
use crate::dy::{dy_compare, dy_generate, dy_shift_check, dy_system_check, identity_battery, DyKind};
use crate::exact::{parse_q, Q};
use crate::gw::{gw_check, gw_extract};
use crate::report::Report;
use crate::toprec::TopRec;

use cache::{cache_key, resolve_dir, Cache};

#[derive(Debug, Parser)]
#[command(name = "difftop", version, about = "Exact topological recursion and the ℏ-difference system of the ℙ¹ quantum curve")]
pub struct Cli {
    /// Cache directory (overrides DIFFTOP_CACHE).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Recompute and compare against the cached payload; exit 1 on a mismatch.
    #[arg(long, global = true, conflicts_with = "no_cache")]
    pub check_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ω_n^{(g)} in the pole basis.
    Omega {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run a verification suite and print its JSON report.
    Verify(VerifyArgs),
    /// The M tower M₀..M_K.
    M {
        #[arg(long)]
        order: usize,
        /// Render entries as R(x) + T(x)·√(x²−4).
        #[arg(long)]
        x_form: bool,
        #[arg(long, value_parser = parse_lambda, default_value = "1/2")]
        lambda: Q,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// The D tower D₀..D_K.
    D {
        #[arg(long)]
        order: usize,
        #[arg(long, value_parser = parse_lambda, default_value = "1/2")]
        lambda: Q,
    },
    /// Stationary GW brackets extracted from ω_n^{(g)}.
    Gw {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Coefficient grid of α, P or Q.
    Dy {
        #[arg(long, value_parser = parse_kind)]
        kind: DyKind,
        #[arg(long)]
        hbar: u32,
        #[arg(long)]
        terms: i64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    MStructure,
    Series,
    Parity,
    Poles,
    LeadingOrder,
    Loop,
    TrCompare,
    Dy,
    Roundtrip,
    Identities,
    Gw,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 6)]
    pub hbar_order: usize,
    #[arg(long, default_value_t = 4)]
    pub nmax: usize,
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, value_parser = parse_lambda, default_value = "1/2")]
    pub lambda: Q,
    #[arg(long, default_value_t = 8)]
    pub smax: i64,
    #[arg(long, default_value_t = 8)]
    pub pmax: i64,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_lambda(s: &str) -> Result<Q, String> {
    parse_q(s).map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<DyKind, String> {
    s.parse()
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Exit {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Exit {
    Exit { code: 2, message: message.into() }
}

fn internal(e: impl std::fmt::Display) -> Exit {
    Exit { code: 1, message: e.to_string() }
}

/// Parse `args`, run, print to stdout; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(e) => {
            eprintln!("difftop: {}", e.message);
            e.code
        }
    }
}

/// Output text and exit code for a parsed command line.
pub fn execute(cli: &Cli) -> Result<(String, i32), Exit> {
    if let Command::Verify(v) = &cli.command {
        return verify(v);
    }
    let (op, params) = describe(&cli.command);
    let cache = if cli.no_cache {
        None
    } else {
        resolve_dir(cli.cache_dir.as_deref()).and_then(|d| Cache::open(d).ok())
    };
    let key = cache_key(op, &params);
    if let Some(c) = &cache {
        if let Some(hit) = c.get(&key).map_err(internal)? {
            if !cli.check_cache {
                return Ok((hit.payload, 0));
            }
            let fresh = compute(&cli.command)?;
            if fresh != hit.payload {
                return Err(internal(format!("cached payload for {op} differs from recomputation")));
            }
            return Ok((fresh, 0));
        }
    }
    let out = compute(&cli.command)?;
    if let Some(c) = &cache {
        c.put(op, &params, &out).map_err(internal)?;
    }
    Ok((out, 0))
}

fn describe(cmd: &Command) -> (&'static str, serde_json::Value) {
    match cmd {
        Command::Omega { g, n, format } => ("omega", json!({"g": g, "n": n, "format": format!("{format:?}")})),
        Command::M { order, x_form, lambda, format } => {
            ("m", json!({"order": order, "x_form": x_form, "lambda": lambda.to_string(), "format": format!("{format:?}")}))
        }
        Command::D { order, lambda } => ("d", json!({"order": order, "lambda": lambda.to_string()})),
        Command::Gw { g, n, kmax, format } => ("gw", json!({"g": g, "n": n, "kmax": kmax, "format": format!("{format:?}")})),
        Command::Dy { kind, hbar, terms, format } => {
            ("dy", json!({"kind": kind.to_string(), "hbar": hbar, "terms": terms, "format": format!("{format:?}")}))
        }
        Command::Verify(_) => ("verify", json!({})),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn stable(g: u32, n: usize) -> Result<(), Exit> {
    if n == 0 {
        return Err(usage("n must be at least 1"));
    }
    if (g, n) == (0, 2) {
        return Err(usage("omega(0,2) is the Bergmann kernel dz1 dz2/(z1-z2)^2, not produced by the recursion"));
    }
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(usage(format!("omega({g},{n}) is unstable: need 2g-2+n > 0")));
    }
    Ok(())
}

fn compute(cmd: &Command) -> Result<String, Exit> {
    match cmd {
        Command::Omega { g, n, format } => {
            stable(*g, *n)?;
            let mut tr = TopRec::new();
            let w = tr.omega(*g, *n).map_err(internal)?;
            Ok(match format {
                Format::Json => pretty(&json!({"g": g, "n": n, "terms": w.to_json()})),
                Format::Csv => w.to_csv(),
            })
        }
        Command::M { order, x_form, lambda, format } => {
            if *order > 12 {
                return Err(usage("--order must be at most 12"));
            }
            let t = m_p1(*order, lambda);
            Ok(m_output(&t, *x_form, *format))
        }
        Command::D { order, lambda } => {
            if *order > 6 {
                return Err(usage("--order must be at most 6"));
            }
            let t = DTower::p1(*order, lambda).map_err(internal)?;
            Ok(pretty(&serde_json::Value::Array(t.to_json())))
        }
        Command::Gw { g, n, kmax, format } => {
            stable(*g, *n)?;
            if *kmax > 16 {
                return Err(usage("--kmax must be at most 16"));
            }
            let mut tr = TopRec::new();
            let t = gw_extract(&mut tr, *g, *n, *kmax).map_err(internal)?;
            Ok(match format {
                Format::Json => pretty(&json!({"g": g, "n": n, "kmax": kmax, "entries": t.to_json()})),
                Format::Csv => t.to_csv(),
            })
        }
        Command::Dy { kind, hbar, terms, format } => {
            if *terms < 0 || *terms > 200 || *hbar > 64 {
                return Err(usage("need 0 <= --terms <= 200 and --hbar <= 64"));
            }
            let s = dy_generate(*kind, *hbar, *terms);
            Ok(match format {
                Format::Csv => s.to_csv(),
                Format::Json => {
                    let cells: Vec<_> =
                        s.grid.cells.iter().map(|(&(h, n), c)| json!({"hbar": h, "x_power": -n, "value": c.to_string()})).collect();
                    pretty(&json!({"kind": kind.to_string(), "hbar": hbar, "terms": terms, "cells": cells}))
                }
            })
        }
        Command::Verify(_) => unreachable!("handled before the cache"),
    }
}

fn m_output(t: &MTower, x_form: bool, format: Format) -> String {
    let cell = |k: usize, i: usize, j: usize| -> String {
        if x_form {
            t.x_display(k, i, j)
        } else {
            t.get(k).get(i, j).to_string()
        }
    };
    match format {
        Format::Csv => {
            let mut s = String::from("k,i,j,value\n");
            for k in 0..t.len() {
                for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    s.push_str(&format!("{k},{},{},\"{}\"\n", i + 1, j + 1, cell(k, i, j)));
                }
            }
            s
        }
        Format::Json if x_form => {
            let v: Vec<_> = (0..t.len())
                .map(|k| json!({"k": k, "entries": [[cell(k, 0, 0), cell(k, 0, 1)], [cell(k, 1, 0), cell(k, 1, 1)]]}))
                .collect();
            pretty(&json!({"lambda": t.lambda.to_string(), "chart": "x", "orders": v}))
        }
        Format::Json => pretty(&json!({"lambda": t.lambda.to_string(), "chart": "z", "orders": t.to_json()})),
    }
}

fn audit_report(t: &MTower, k: usize) -> Report {
    let a = m_audit(t, k);
    let mut rep = Report::new("m-structure");
    for c in a.checks {
        rep.push(&c.name, c.first_failure.map(|o| format!("order {o}")));
    }
    rep
}

fn only(rep: Report, suite: &str, ids: &[&str]) -> Report {
    let mut r = Report::new(suite);
    r.clauses = rep.clauses.into_iter().filter(|c| ids.contains(&c.id.as_str())).collect();
    r
}

fn run_suite(suite: Suite, v: &VerifyArgs) -> Result<Report, Exit> {
    let k = v.hbar_order;
    let tt = |ids: &[&str], name: &str| -> Result<Report, Exit> {
        let m = m_p1(k + 2, &v.lambda);
        let w = w1_tower(&m, k).map_err(internal)?;
        Ok(only(tt_audit(&m, &w, k, v.nmax, v.seed), name, ids))
    };
    Ok(match suite {
        Suite::MStructure => audit_report(&m_p1(k, &v.lambda), k),
        Suite::Series => tt(&["series"], "series")?,
        Suite::Parity => tt(&["parity"], "parity")?,
        Suite::Poles => tt(&["poles"], "poles")?,
        Suite::LeadingOrder => tt(&["leading-order"], "leading-order")?,
        Suite::Loop => {
            let top = k.min(4);
            let m = m_p1(top + 2, &v.lambda);
            let w = w1_tower(&m, top + 1).map_err(internal)?;
            let d = DTower::p1(top, &v.lambda).map_err(internal)?;
            let sys = LoopSystem::new(&m, &d, &w, top);
            let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
            let samples = random_points(&mut rng, v.samples.max(3));
            loop_check(&sys, &samples)
        }
        Suite::TrCompare => {
            let chi_max = 4.min(v.nmax as i64);
            let mut pairs = vec![(0u32, 2usize)];
            for g in 0..=((chi_max + 1) / 2) as u32 {
                for n in 1..=v.nmax {
                    let chi = 2 * g as i64 - 2 + n as i64;
                    if (1..=chi_max).contains(&chi) {
                        pairs.push((g, n));
                    }
                }
            }
            let kk = pairs.iter().map(|&(g, n)| n + 2 * g as usize - 2).max().unwrap_or(0);
            let m = m_p1(kk + 2, &v.lambda);
            let w = w1_tower(&m, kk).map_err(internal)?;
            let mut tr = TopRec::new();
            let mut rep = Report::new("tr-compare");
            for (g, n) in pairs {
                rep.merge(tr_compare(&m, &w, &mut tr, g, n, v.samples.max(5), v.seed).map_err(internal)?);
            }
            rep
        }
        Suite::Dy => {
            let kmax = k.max(1);
            let m = m_p1(kmax, &v.lambda);
            let mut rep = dy_compare(&m, kmax, 20);
            rep.merge(dy_shift_check(kmax as u32, 20));
            rep.merge(dy_system_check(kmax as u32, 20));
            rep.suite = "dy".into();
            rep
        }
        Suite::Roundtrip => {
            let top = k.min(3);
            let d = DTower::p1(top, &v.lambda).map_err(internal)?;
            let l = l_coeffs_z(&l_p1(&v.lambda), 1);
            bridge_check(&d, &l, 9)
        }
        Suite::Identities => identity_battery(v.smax, v.pmax, 30),
        Suite::Gw => {
            let mut tr = TopRec::new();
            gw_check(&mut tr, 6, 2, 8).map_err(internal)?
        }
        Suite::All => {
            let mut all = Report::new("all");
            for s in [
                Suite::MStructure,
                Suite::Series,
                Suite::Parity,
                Suite::Poles,
                Suite::LeadingOrder,
                Suite::Loop,
                Suite::TrCompare,
                Suite::Dy,
                Suite::Roundtrip,
                Suite::Identities,
                Suite::Gw,
            ] {
                let r = run_suite(s, v)?;
                for mut c in r.clauses {
                    c.id = format!("{}/{}", r.suite, c.id);
                    all.clauses.push(c);
                }
            }
            all
        }
    })
}

fn verify(v: &VerifyArgs) -> Result<(String, i32), Exit> {
    if v.nmax < 1 || v.nmax > 6 {
        return Err(usage("--nmax must be between 1 and 6"));
    }
    if v.hbar_order > 10 {
        return Err(usage("--hbar-order must be at most 10"));
    }
    if v.smax < 0 || v.pmax < 0 {
        return Err(usage("--smax and --pmax must be nonnegative"));
    }
    let rep = run_suite(v.suite, v)?;
    let out = pretty(&serde_json::to_value(&rep).expect("reports serialize"));
    if let Some(path) = &v.report {
        std::fs::write(path, &out).map_err(internal)?;
    }
    Ok((out, if rep.all_passed() { 0 } else { 1 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        let mut full = vec!["difftop", "--no-cache"];
        full.extend_from_slice(args);
        match Cli::try_parse_from(&full) {
            Ok(cli) => match execute(&cli) {
                Ok((_, c)) => c,
                Err(e) => e.code,
            },
            Err(_) => 2,
        }
    }

    #[test]
    fn unstable_pair_is_a_usage_error() {
        assert_eq!(code(&["omega", "--g", "0", "--n", "2"]), 2);
        assert_eq!(code(&["omega", "--g", "0", "--n", "1"]), 2);
        assert_eq!(code(&["dy", "--kind", "R", "--hbar", "1", "--terms", "2"]), 2);
    }

    #[test]
    fn identities_suite_passes() {
        assert_eq!(code(&["verify", "identities", "--smax", "4", "--pmax", "4"]), 0);
    }
}
