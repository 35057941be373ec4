//! Protocol sessions and depth verification.
//!
//! Each setting resolves as flag, then `DPOQ_*` environment variable, then
//! config file, then built-in default.

use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use dpoq_core::tcf::TcfKey;
use dpoq_protocol::score::Report;
use dpoq_protocol::session::{self, Outcome, ProverKind, EXIT_PROTOCOL};
use dpoq_protocol::{Protocol, SessionConfig};
use dpoq_qsim::Engine;
use serde_json::json;

use crate::config::ConfigFile;
use crate::FamilyArg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Bcmvv,
    Kmcvy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransportArg {
    Local,
    Tcp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProverArg {
    Honest,
    Classical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Shortcut,
    Full,
}

const KEYS: &[&str] = &[
    "protocol",
    "tcf",
    "size",
    "rounds",
    "seed",
    "session-index",
    "threshold",
    "prover",
    "engine",
    "transport",
    "listen",
    "connect",
    "sessions",
    "timeout",
    "max-resamples",
    "report",
    "transcript",
];

#[derive(Args, Debug)]
pub struct RunArgs {
    /// `key = value` file supplying defaults for any flag below.
    #[arg(long, env = "DPOQ_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, env = "DPOQ_PROTOCOL")]
    protocol: Option<ProtocolArg>,
    #[arg(long, value_enum, env = "DPOQ_TCF")]
    tcf: Option<FamilyArg>,
    /// Prime bit length (rabin) or input width (toy).
    #[arg(long, env = "DPOQ_SIZE")]
    size: Option<usize>,
    #[arg(long, env = "DPOQ_ROUNDS")]
    rounds: Option<usize>,
    #[arg(long, env = "DPOQ_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "DPOQ_SESSION_INDEX")]
    session_index: Option<u64>,
    /// KMCVY acceptance threshold above the classical 3/4.
    #[arg(long, env = "DPOQ_THRESHOLD")]
    threshold: Option<f64>,
    #[arg(long, value_enum, env = "DPOQ_PROVER")]
    prover: Option<ProverArg>,
    #[arg(long, value_enum, env = "DPOQ_ENGINE")]
    engine: Option<EngineArg>,
    #[arg(long, value_enum, env = "DPOQ_TRANSPORT")]
    transport: Option<TransportArg>,
    /// Serve as verifier on this address.
    #[arg(long, env = "DPOQ_LISTEN", conflicts_with = "connect")]
    listen: Option<String>,
    /// Connect as prover to this address.
    #[arg(long, env = "DPOQ_CONNECT")]
    connect: Option<String>,
    /// Sessions to accept when listening.
    #[arg(long, env = "DPOQ_SESSIONS")]
    sessions: Option<usize>,
    /// Per-message timeout in seconds.
    #[arg(long, env = "DPOQ_TIMEOUT")]
    timeout: Option<f64>,
    #[arg(long, env = "DPOQ_MAX_RESAMPLES")]
    max_resamples: Option<usize>,
    /// Write the verdict report as JSON.
    #[arg(long, env = "DPOQ_REPORT")]
    report: Option<PathBuf>,
    /// Write the transcript as JSON lines.
    #[arg(long, env = "DPOQ_TRANSCRIPT")]
    transcript: Option<PathBuf>,
    /// Include the key and trapdoor in the verifier's report.
    #[arg(long)]
    debug_secrets: bool,
}

fn value_enum<T: ValueEnum>(file: &ConfigFile, key: &str) -> Result<Option<T>> {
    file.get::<String>(key)?
        .map(|s| T::from_str(&s, true).map_err(|e| anyhow::anyhow!("config key `{key}`: {e}")))
        .transpose()
}

macro_rules! pick {
    ($flag:expr, $file:expr, $key:literal) => {
        match $flag {
            Some(v) => Some(v),
            None => $file.get($key)?,
        }
    };
}

macro_rules! pick_enum {
    ($flag:expr, $file:expr, $key:literal) => {
        match $flag {
            Some(v) => Some(v),
            None => value_enum(&$file, $key)?,
        }
    };
}

/// Settings after merging all sources.
#[derive(Debug)]
pub struct Resolved {
    pub config: SessionConfig,
    pub transport: TransportArg,
    pub listen: Option<String>,
    pub connect: Option<String>,
    pub sessions: usize,
    pub report: Option<PathBuf>,
    pub transcript: Option<PathBuf>,
}

pub fn resolve(args: &RunArgs) -> Result<Resolved> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p, KEYS)?,
        None => ConfigFile::default(),
    };
    let d = SessionConfig::default();
    let protocol = match pick_enum!(args.protocol, file, "protocol") {
        Some(ProtocolArg::Kmcvy) => Protocol::Kmcvy,
        Some(ProtocolArg::Bcmvv) => Protocol::Bcmvv,
        None => d.protocol,
    };
    let family = pick_enum!(args.tcf, file, "tcf").map(Into::into).unwrap_or(d.family);
    let prover = match pick_enum!(args.prover, file, "prover") {
        Some(ProverArg::Classical) => ProverKind::Classical,
        Some(ProverArg::Honest) => ProverKind::Honest,
        None => d.prover,
    };
    let engine = match pick_enum!(args.engine, file, "engine") {
        Some(EngineArg::Full) => Engine::Full,
        Some(EngineArg::Shortcut) => Engine::Shortcut,
        None => d.engine,
    };
    let timeout = match pick!(args.timeout, file, "timeout") {
        Some(s) if s > 0.0 && s.is_finite() => Duration::from_secs_f64(s),
        Some(s) => bail!("timeout must be a positive number of seconds, got {s}"),
        None => d.timeout,
    };
    let config = SessionConfig {
        protocol,
        family,
        size: pick!(args.size, file, "size").unwrap_or(d.size),
        rounds: pick!(args.rounds, file, "rounds").unwrap_or(d.rounds),
        threshold: pick!(args.threshold, file, "threshold").unwrap_or(d.threshold),
        seed: pick!(args.seed, file, "seed").unwrap_or(d.seed),
        session_index: pick!(args.session_index, file, "session-index").unwrap_or(d.session_index),
        prover,
        engine,
        timeout,
        max_resamples: pick!(args.max_resamples, file, "max-resamples").unwrap_or(d.max_resamples),
    };
    let listen: Option<String> = pick!(args.listen.clone(), file, "listen");
    let connect: Option<String> = pick!(args.connect.clone(), file, "connect");
    let transport = pick_enum!(args.transport, file, "transport").unwrap_or(if listen.is_some() || connect.is_some() {
        TransportArg::Tcp
    } else {
        TransportArg::Local
    });
    match (transport, &listen, &connect) {
        (TransportArg::Tcp, Some(_), Some(_)) => bail!("--listen and --connect are mutually exclusive"),
        (TransportArg::Tcp, None, None) => bail!("tcp transport needs --listen or --connect"),
        (TransportArg::Local, l, c) if l.is_some() || c.is_some() => {
            bail!("--listen/--connect require --transport tcp")
        }
        _ => {}
    }
    let sessions = pick!(args.sessions, file, "sessions").unwrap_or(1);
    if sessions == 0 {
        bail!("sessions must be at least 1");
    }
    Ok(Resolved {
        config,
        transport,
        listen,
        connect,
        sessions,
        report: pick!(args.report.clone(), file, "report"),
        transcript: pick!(args.transcript.clone(), file, "transcript"),
    })
}

fn report_json(report: &Report, secrets: Option<&SessionConfig>) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(report)?;
    if let Some(cfg) = secrets {
        let (key, trapdoor) = TcfKey::gen(cfg.family, cfg.size, &mut cfg.seeds().key_rng())?;
        v["debug_secrets"] = json!({ "key": key, "trapdoor": trapdoor });
    }
    Ok(v)
}

fn summary(report: &Report) -> String {
    format!(
        "{} {:?}: rounds {}, p_pre {:.4}, p_2 {:.4}, gap {:.4} [{:.4}, {:.4}], degenerate {:.3}, depth {} / {} interleavings",
        report.protocol,
        report.verdict,
        report.rounds,
        report.p_pre,
        report.p_eq_or_bell,
        report.gap,
        report.ci_low,
        report.ci_high,
        report.degenerate_rate,
        report.depth,
        report.interleavings
    )
    .to_lowercase()
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes the requested artifacts and prints one line per session.
fn finish(r: &Resolved, outcomes: &[(Outcome, SessionConfig)], secrets: bool) -> Result<i32> {
    let mut reports = Vec::new();
    let mut transcript = String::new();
    let mut code = 0;
    for (o, cfg) in outcomes {
        code = code.max(o.exit_code());
        transcript.push_str(&o.transcript.to_jsonl());
        match &o.result {
            Ok(rep) => {
                crate::emit(&format!("session {}: {}", cfg.session_id(), summary(rep)))?;
                reports.push(report_json(rep, secrets.then_some(cfg))?);
            }
            Err(e) => {
                eprintln!("session {}: protocol error: {e}", cfg.session_id());
                reports.push(json!({ "session": cfg.session_id(), "error": e.to_string() }));
            }
        }
    }
    if let Some(p) = &r.report {
        let v = if reports.len() == 1 { reports.remove(0) } else { json!(reports) };
        write(p, &serde_json::to_string_pretty(&v)?)?;
    }
    if let Some(p) = &r.transcript {
        write(p, &transcript)?;
    }
    Ok(code)
}

fn execute(args: &RunArgs) -> Result<i32> {
    let r = resolve(args)?;
    r.config.validate()?;
    let outcomes: Vec<(Outcome, SessionConfig)> = match (r.transport, &r.listen, &r.connect) {
        (TransportArg::Local, _, _) => vec![(session::run_local(&r.config), r.config.clone())],
        (TransportArg::Tcp, Some(addr), _) => {
            let listener = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            session::serve(&r.config, &listener, r.sessions)?
                .into_iter()
                .enumerate()
                .map(|(k, o)| {
                    let mut cfg = r.config.clone();
                    cfg.session_index += k as u64;
                    (o, cfg)
                })
                .collect()
        }
        (TransportArg::Tcp, None, Some(addr)) => {
            let o = session::connect(&r.config, addr);
            return finish(&r, &[(o, r.config.clone())], false);
        }
        (TransportArg::Tcp, None, None) => unreachable!("resolve rejects this"),
    };
    finish(&r, &outcomes, args.debug_secrets)
}

pub fn run(args: RunArgs) -> Result<ExitCode> {
    let code = execute(&args).unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_PROTOCOL
    });
    Ok(ExitCode::from(code as u8))
}

#[derive(Args)]
pub struct VerifyDepthArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Rabin, env = "DPOQ_TCF")]
    tcf: FamilyArg,
    #[arg(long, default_value_t = 3, env = "DPOQ_SIZE")]
    size: usize,
    #[arg(long, default_value_t = 20, env = "DPOQ_ROUNDS")]
    rounds: usize,
    #[arg(long, default_value_t = 0, env = "DPOQ_SEED")]
    seed: u64,
}

/// Expected (depth, interleavings) of an honest round.
pub const EXPECTED: [(&str, usize, usize); 3] = [("bcmvv", 14, 3), ("kmcvy", 18, 4), ("ghz", 5, 1)];

pub fn verify_depth(args: VerifyDepthArgs) -> Result<ExitCode> {
    let mut ok = true;
    crate::emit(&format!("{:<8} {:>6} {:>14} {:>8}", "path", "depth", "interleavings", "status"))?;
    for (name, depth, inter) in EXPECTED {
        let got = match name {
            "ghz" => {
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(args.seed);
                dpoq_qsim::ghz::prepare_ghz(8, &mut rng)?.2.totals()
            }
            _ => {
                let cfg = SessionConfig {
                    protocol: name.parse()?,
                    family: args.tcf.into(),
                    size: args.size,
                    rounds: args.rounds,
                    seed: args.seed,
                    ..SessionConfig::default()
                };
                let rep = session::run_local(&cfg).result?;
                (rep.depth, rep.interleavings)
            }
        };
        let pass = got == (depth, inter);
        ok &= pass;
        crate::emit(&format!(
            "{name:<8} {:>6} {:>14} {:>8}",
            got.0,
            got.1,
            if pass { "ok".to_string() } else { format!("want {depth}/{inter}") }
        ))?;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
