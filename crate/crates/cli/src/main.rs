//! `ppcd-stab`: stability analysis of planar PPCD models and weighted
//! Markov chains.
//!
//! Subcommands: `analyze` (verdicts with witnesses and timings),
//! `quotient` (export the facet quotient as chain JSON), `simulate`
//! (seeded concrete traces, conservation checks, Monte-Carlo averages),
//! and `bench` (generate and analyze the experiment families).
//!
//! Exit codes for `analyze`: 0 both stable, 10 absolute fails, 20 only
//! almost-sure fails, 30 both fail, 2 for any parse, validation, or
//! hypothesis error. All randomness flows through explicit `--seed`
//! arguments (ChaCha12 throughout); no command reads ambient entropy.

mod report;

use clap::{Parser, Subcommand};
use ppcd_core::generators::{gen_experiment, ExperimentConfig, GENERATOR_VERSION};
use ppcd_core::ppcd::{PpcdFile, Termination};
use ppcd_core::wdtmc::{ChainError, Verdict, Wdtmc, WdtmcFile, SAMPLER_RNG};
use ppcd_core::{Ppcd, Vec2Q};
use report::{effective_log, exit_code, human_verdict, verdict_json, SCHEMA};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "ppcd-stab",
    version,
    about = "Exact stability analysis of planar PPCD models via weighted Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide absolute and almost-sure stability of a model file
    /// (ppcd or wdtmc JSON, auto-detected by top-level key)
    Analyze {
        path: PathBuf,
        /// emit the machine-readable report instead of the table
        #[arg(long)]
        json: bool,
    },
    /// Print the facet-quotient chain of a ppcd model as wdtmc JSON
    Quotient { path: PathBuf },
    /// Simulate seeded concrete executions of a ppcd model
    Simulate {
        path: PathBuf,
        /// number of continuous-plus-discrete steps per trial
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// replay each trace on the quotient and compare exact weights
        #[arg(long)]
        check_conservation: bool,
        /// report the sampled average step log-weight against the exact target
        #[arg(long)]
        average: bool,
        #[arg(long)]
        json: bool,
    },
    /// Generate an experiment model, analyze it, and print the table row
    Bench {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        experiment: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        locs_per_region: usize,
        /// write the generated model JSON (and a .manifest.json sibling) here
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<i32, String> {
    match command {
        Command::Analyze { path, json } => cmd_analyze(&path, json),
        Command::Quotient { path } => cmd_quotient(&path),
        Command::Simulate {
            path,
            steps,
            seed,
            trials,
            check_conservation,
            average,
            json,
        } => cmd_simulate(
            &path,
            steps,
            seed,
            trials,
            check_conservation,
            average,
            json,
        ),
        Command::Bench {
            experiment,
            seed,
            locs_per_region,
            emit,
            json,
        } => cmd_bench(experiment, seed, locs_per_region, emit.as_deref(), json),
    }
}

enum ModelKind {
    Ppcd(Ppcd),
    Chain(Wdtmc),
}

fn read_input(path: &Path) -> Result<(Vec<u8>, String), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let digest = hex_digest(&bytes);
    Ok((bytes, digest))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Parses a model file, detecting the kind by its top-level key.
fn parse_model(bytes: &[u8]) -> Result<ModelKind, String> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| format!("invalid JSON: {e}"))?;
    if value.get("locations").is_some() {
        let file: PpcdFile =
            serde_json::from_value(value).map_err(|e| format!("invalid ppcd model: {e}"))?;
        let model = file.into_model().map_err(|e| e.to_string())?;
        let report = model.validate();
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        if !report.is_ok() {
            return Err(report
                .defects
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("; "));
        }
        Ok(ModelKind::Ppcd(model))
    } else if value.get("states").is_some() {
        let file: WdtmcFile =
            serde_json::from_value(value).map_err(|e| format!("invalid wdtmc model: {e}"))?;
        let chain = file.into_chain().map_err(|e| e.to_string())?;
        let defects = chain.validate();
        if !defects.is_empty() {
            return Err(defects
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("; "));
        }
        Ok(ModelKind::Chain(chain))
    } else {
        Err(
            "unrecognized model: expected top-level \"locations\" (ppcd) or \"states\" (wdtmc)"
                .into(),
        )
    }
}

struct ChainChecks {
    absolute: Verdict,
    almost_sure: Result<Verdict, ChainError>,
    absolute_s: f64,
    almost_sure_s: f64,
}

fn run_checks(chain: &Wdtmc) -> ChainChecks {
    let t = Instant::now();
    let absolute = chain.check_absolute();
    let absolute_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let almost_sure = chain.check_almost_sure();
    let almost_sure_s = t.elapsed().as_secs_f64();
    ChainChecks {
        absolute,
        almost_sure,
        absolute_s,
        almost_sure_s,
    }
}

fn cmd_analyze(path: &Path, json: bool) -> Result<i32, String> {
    let (bytes, digest) = read_input(path)?;
    let (kind, chain, quotient_info, build_s) = match parse_model(&bytes)? {
        ModelKind::Ppcd(model) => {
            let t = Instant::now();
            let quotient = model.build_quotient().map_err(|e| e.to_string())?;
            let build_s = t.elapsed().as_secs_f64();
            let info = json!({
                "states": quotient.chain.num_states(),
                "edges": quotient.chain.edges().len(),
            });
            ("ppcd", quotient.chain, Some(info), build_s)
        }
        ModelKind::Chain(chain) => ("wdtmc", chain, None, 0.0),
    };
    let checks = run_checks(&chain);

    let almost_sure_json = match &checks.almost_sure {
        Ok(v) => verdict_json(&chain, v),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let effective = checks.almost_sure.as_ref().ok().and_then(effective_log);
    let doc = json!({
        "schema": SCHEMA,
        "command": "analyze",
        "input": path.display().to_string(),
        "input_sha256": digest,
        "model_kind": kind,
        "quotient": quotient_info,
        "absolute": verdict_json(&chain, &checks.absolute),
        "almost_sure": almost_sure_json,
        "effective_weight_log": effective,
        "timings": {
            "build_s": build_s,
            "absolute_s": checks.absolute_s,
            "almost_sure_s": checks.almost_sure_s,
        },
    });

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("serializable")
        );
    } else {
        println!(
            "model: {} ({kind}) sha256 {}",
            path.display(),
            &digest[..12]
        );
        if let Some(info) = doc["quotient"].as_object() {
            println!(
                "quotient: {} states, {} edges (built in {:.4} s)",
                info["states"], info["edges"], build_s
            );
        }
        println!("absolute:    {}", human_verdict(&chain, &checks.absolute));
        match &checks.almost_sure {
            Ok(v) => println!("almost-sure: {}", human_verdict(&chain, v)),
            Err(e) => println!("almost-sure: error: {e}"),
        }
        println!(
            "timings: absolute {:.4} s, almost-sure {:.4} s",
            checks.absolute_s, checks.almost_sure_s
        );
    }

    match checks.almost_sure {
        Ok(v) => Ok(exit_code(checks.absolute.decision, v.decision)),
        Err(_) => Ok(2),
    }
}

fn cmd_quotient(path: &Path) -> Result<i32, String> {
    let (bytes, _) = read_input(path)?;
    let ModelKind::Ppcd(model) = parse_model(&bytes)? else {
        return Err("quotient requires a ppcd model".into());
    };
    let quotient = model.build_quotient().map_err(|e| e.to_string())?;
    println!("{}", quotient.chain.to_json_string());
    Ok(0)
}

fn cmd_simulate(
    path: &Path,
    steps: usize,
    seed: u64,
    trials: usize,
    check_conservation: bool,
    average: bool,
    json: bool,
) -> Result<i32, String> {
    if steps == 0 {
        return Err("--steps must be at least 1".into());
    }
    if trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    let (bytes, digest) = read_input(path)?;
    let ModelKind::Ppcd(model) = parse_model(&bytes)? else {
        return Err("simulate requires a ppcd model".into());
    };
    let quotient = if check_conservation || average {
        Some(model.build_quotient().map_err(|e| e.to_string())?)
    } else {
        None
    };

    let (li, tag) = model.initial();
    let start: Vec2Q = model.locations()[li].facet_ray(tag).dir();
    let mut trial_docs = Vec::with_capacity(trials);
    let mut passes = 0usize;
    let mut all_logs: Vec<f64> = Vec::new();
    let mut human_lines = Vec::with_capacity(trials);

    for t in 0..trials {
        let trial_seed = seed.wrapping_add(t as u64);
        let trace = model
            .simulate_concrete(&start, steps, trial_seed)
            .map_err(|e| e.to_string())?;
        let conservation = match &quotient {
            Some(q) if check_conservation => {
                let indices: Vec<usize> = trace
                    .steps
                    .iter()
                    .map(|s| {
                        q.chain
                            .state_index(&format!("{}@{}", s.location, s.tag))
                            .expect("visited states are quotient states")
                    })
                    .collect();
                let replayed = q
                    .chain
                    .path_weight(&ppcd_core::PathFin::new(indices))
                    .map_err(|e| e.to_string())?;
                let ok = replayed == trace.total_scale();
                if ok {
                    passes += 1;
                }
                Some(ok)
            }
            _ => None,
        };
        for s in &trace.step_scales {
            all_logs.push(s.log_f64());
        }
        let termination = match trace.termination {
            Termination::Completed => "completed".to_string(),
            Termination::Diverged => "diverged".to_string(),
            Termination::Stuck(r) => format!("stuck: {r}"),
        };
        let final_log_norm = trace
            .steps
            .last()
            .map(|s| s.point.inf_norm().ln_f64())
            .unwrap_or(0.0);
        human_lines.push(format!(
            "trial {t} (seed {trial_seed}): {termination}, {} steps, final log-norm {final_log_norm:.6}{}",
            trace.step_scales.len(),
            match conservation {
                Some(true) => ", conservation: pass",
                Some(false) => ", conservation: FAIL",
                None => "",
            }
        ));
        trial_docs.push(json!({
            "seed": trial_seed,
            "termination": termination,
            "trace": trace.steps.iter().map(|s| json!({
                "location": s.location,
                "facet": s.tag.to_string(),
                "point": s.point,
                "log_norm": s.point.inf_norm().ln_f64(),
            })).collect::<Vec<_>>(),
            "scales": trace.step_scales,
            "conservation": conservation.map(|ok| if ok { "pass" } else { "fail" }),
        }));
    }

    let average_doc = if average {
        let q = quotient.as_ref().expect("built above");
        let rho = q
            .chain
            .stationary_distribution()
            .map_err(|e| format!("--average needs a stationary distribution: {e}"))?;
        let ew = q.chain.effective_weight(&rho).map_err(|e| e.to_string())?;
        let mean = all_logs.iter().sum::<f64>() / all_logs.len() as f64;
        let se = batch_means_stderr(&all_logs);
        Some(json!({
            "partial_average": mean,
            "target": ew.float_log,
            "std_error": se,
            "within_3se": (mean - ew.float_log).abs() <= 3.0 * se,
        }))
    } else {
        None
    };

    let doc = json!({
        "schema": SCHEMA,
        "command": "simulate",
        "input": path.display().to_string(),
        "input_sha256": digest,
        "rng": SAMPLER_RNG,
        "seed": seed,
        "steps": steps,
        "trials": trial_docs,
        "conservation": if check_conservation {
            json!({ "passes": passes, "trials": trials })
        } else {
            Value::Null
        },
        "average": average_doc,
    });

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("serializable")
        );
    } else {
        for line in &human_lines {
            println!("{line}");
        }
        if check_conservation {
            println!("conservation: {passes}/{trials} trials match exactly");
        }
        if let Some(avg) = doc["average"].as_object() {
            println!(
                "average step log-weight: {:.6} (target {:.6}, std error {:.6})",
                avg["partial_average"].as_f64().unwrap(),
                avg["target"].as_f64().unwrap(),
                avg["std_error"].as_f64().unwrap(),
            );
        }
        println!("(use --json for full exact traces)");
    }

    if check_conservation && passes != trials {
        return Ok(1);
    }
    Ok(0)
}

/// Standard error of the mean of a correlated sequence via batch means
/// (20 batches).
fn batch_means_stderr(values: &[f64]) -> f64 {
    let batches = 20.min(values.len().max(1));
    let per = (values.len() / batches).max(1);
    let means: Vec<f64> = values
        .chunks(per)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        / (means.len().saturating_sub(1).max(1)) as f64;
    (var / means.len() as f64).sqrt()
}

fn cmd_bench(
    experiment: u8,
    seed: u64,
    locs_per_region: usize,
    emit: Option<&Path>,
    json: bool,
) -> Result<i32, String> {
    let cfg = ExperimentConfig {
        experiment,
        locs_per_region,
        coeff_min: 1,
        coeff_max: 5,
        seed,
    };
    let model = gen_experiment(&cfg);
    let model_json = model.to_json_string();
    if let Some(path) = emit {
        std::fs::write(path, &model_json)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        let manifest = json!({
            "schema": SCHEMA,
            "kind": "experiment",
            "generator_version": GENERATOR_VERSION,
            "rng": SAMPLER_RNG,
            "config": cfg,
            "model_sha256": hex_digest(model_json.as_bytes()),
        });
        let manifest_path = path.with_extension("manifest.json");
        std::fs::write(
            &manifest_path,
            serde_json::to_string_pretty(&manifest).expect("serializable"),
        )
        .map_err(|e| format!("cannot write {}: {e}", manifest_path.display()))?;
    }

    let t = Instant::now();
    let quotient = model.build_quotient().map_err(|e| e.to_string())?;
    let build_s = t.elapsed().as_secs_f64();
    let checks = run_checks(&quotient.chain);
    let yes = |d: ppcd_core::Decision| match d {
        ppcd_core::Decision::Convergent => "Yes",
        ppcd_core::Decision::NotConvergent => "No",
    };
    let as_str = yes(checks.absolute.decision);
    let (ass_str, almost_sure_json) = match &checks.almost_sure {
        Ok(v) => (yes(v.decision), verdict_json(&quotient.chain, v)),
        Err(e) => ("Err", json!({ "error": e.to_string() })),
    };
    let locs = model.locations().len();
    let row = format!(
        "{experiment}  {locs}  {as_str}  {ass_str}  {build_s:.3}  {:.3}  {:.3}",
        checks.absolute_s, checks.almost_sure_s
    );

    if json {
        let doc = json!({
            "schema": SCHEMA,
            "command": "bench",
            "config": cfg,
            "generator_version": GENERATOR_VERSION,
            "rng": SAMPLER_RNG,
            "locations": locs,
            "quotient": {
                "states": quotient.chain.num_states(),
                "edges": quotient.chain.edges().len(),
            },
            "absolute": verdict_json(&quotient.chain, &checks.absolute),
            "almost_sure": almost_sure_json,
            "effective_weight_log":
                checks.almost_sure.as_ref().ok().and_then(effective_log),
            "timings": {
                "build_s": build_s,
                "absolute_s": checks.absolute_s,
                "almost_sure_s": checks.almost_sure_s,
            },
            "table_row": row,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("serializable")
        );
    } else {
        println!("N  Locs  AS  ASS  T_conv  T_abs  T_as");
        println!("{row}");
    }
    Ok(0)
}
