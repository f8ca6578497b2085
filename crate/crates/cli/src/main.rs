use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use biunitary::ade::{dynkin, ghj_module, ocneanu_connection, Manifest, ModuleData};
use biunitary::alpha::{build_w2, build_w3, build_w4, check_conj, iybe_residual, split_graded};
use biunitary::catops::{compose, decompose, fusion_closure};
use biunitary::flatness::{flat_part, is_flat};
use biunitary::graphs::pf_data;
use biunitary::strings::extract_w4_oracle;
use biunitary::su2k::{build_w1, quantum_data};
use biunitary::{BipartiteGraph, Chirality, Connection};

#[derive(Parser)]
#[command(name = "biunitary", version, about = "Bi-unitary connections, α-induction and flatness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Seed for randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Output directory (or a `.json` file for single-document commands).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Perron–Frobenius data of a bipartite graph.
    Pf {
        #[arg(long)]
        graph: PathBuf,
        /// Vertex id normalized to weight 1.
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Bi-unitarity residuals of a connection.
    Verify {
        #[arg(long)]
        conn: PathBuf,
    },
    /// Vertical composition (`up` on top of `down`).
    Compose {
        #[arg(long)]
        up: PathBuf,
        #[arg(long)]
        down: PathBuf,
    },
    /// Decomposition into irreducibles with multiplicities.
    Decompose {
        #[arg(long)]
        conn: PathBuf,
    },
    /// Fusion table of the system generated by the given connections.
    FusionTable {
        #[arg(long, num_args = 1.., required = true)]
        gens: Vec<PathBuf>,
        #[arg(long)]
        identity: PathBuf,
        #[arg(long, default_value_t = 64)]
        cap: usize,
    },
    /// Flatness sweep over all sizes up to `--max M N`.
    Flatness {
        #[arg(long)]
        conn: PathBuf,
        #[arg(long, num_args = 2, value_names = ["M", "N"], default_values_t = [4, 4])]
        max: Vec<usize>,
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Flat part and principal graph.
    FlatPart {
        #[arg(long)]
        conn: PathBuf,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// A-D-E diagram data.
    Ade {
        #[command(subcommand)]
        cmd: AdeCmd,
    },
    /// SU(2)_k data.
    Su2k {
        #[command(subcommand)]
        cmd: Su2kCmd,
    },
    /// Module (sector) data for a diagram.
    Ghj {
        #[command(subcommand)]
        cmd: GhjCmd,
    },
    /// α-induction connections.
    Alpha {
        #[command(subcommand)]
        cmd: AlphaCmd,
    },
    /// Independent reconstruction of W4.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
}

#[derive(Subcommand)]
enum AdeCmd {
    /// The connection on a Dynkin diagram.
    Build {
        #[arg(long)]
        diagram: String,
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        chirality: String,
    },
}

#[derive(Subcommand)]
enum Su2kCmd {
    /// Quantum 6j/R data, or W1(λ, μ) when both labels are given.
    Gen {
        #[arg(long)]
        k: usize,
        #[arg(long, requires = "mu")]
        lambda: Option<usize>,
        #[arg(long, requires = "lambda")]
        mu: Option<usize>,
    },
}

#[derive(Subcommand)]
enum GhjCmd {
    /// Module manifest and the generating connection W2(1).
    Solve {
        #[arg(long)]
        diagram: String,
    },
}

#[derive(Args)]
struct ModuleArgs {
    /// Module manifest (from `ghj solve`).
    #[arg(long)]
    module: PathBuf,
}

#[derive(Subcommand)]
enum AlphaCmd {
    /// W2, W3 or W4 for one choice of labels.
    Induce {
        #[command(flatten)]
        m: ModuleArgs,
        #[arg(long)]
        lambda: usize,
        #[arg(long, default_value_t = 1)]
        mu: usize,
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        chirality: String,
        /// Which connection: w2, w3 or w4.
        #[arg(long, default_value = "w4")]
        which: String,
    },
    /// Bi-unitarity, IYBE and conjugation residuals over λ, μ ≤ max.
    Sweep {
        #[command(flatten)]
        m: ModuleArgs,
        #[arg(long, default_value_t = 2)]
        max_label: usize,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Compares the reconstructed W4 with the direct one.
    Compare {
        #[command(flatten)]
        m: ModuleArgs,
        #[arg(long, default_value_t = 1)]
        lambda: usize,
        #[arg(long, default_value_t = 1)]
        mu: usize,
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        chirality: String,
    },
}

/// What a command produced: named documents, a summary and a verdict.
struct Outcome {
    docs: Vec<(String, String)>,
    summary: String,
    pass: bool,
}

impl Outcome {
    fn ok(name: &str, doc: String, summary: String) -> Self {
        Outcome { docs: vec![(name.into(), doc)], summary, pass: true }
    }
}

fn read(p: &Path) -> anyhow::Result<String> {
    fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
}

fn load_conn(p: &Path) -> anyhow::Result<Connection> {
    Connection::from_json(&read(p)?).with_context(|| format!("invalid connection {}", p.display()))
}

fn load_module(p: &Path, tol: f64) -> anyhow::Result<ModuleData> {
    let man: Manifest = serde_json::from_str(&read(p)?).with_context(|| format!("invalid manifest {}", p.display()))?;
    let m = ghj_module(&dynkin(&man.diagram)?, tol.max(1e-9))?;
    if m.k != man.k {
        bail!("manifest level {} disagrees with diagram {} (level {})", man.k, man.diagram, m.k);
    }
    Ok(m)
}

fn chirality(s: &str) -> anyhow::Result<Chirality> {
    match s {
        "+" | "plus" => Ok(Chirality::Plus),
        "-" | "minus" => Ok(Chirality::Minus),
        _ => bail!("chirality must be + or -, got {s}"),
    }
}

/// Lightest V0 vertex, ties broken by list order.
fn default_basepoint(w: &Connection) -> String {
    let ws = &w.shape.weights[0];
    let i = (0..ws.len()).fold(0, |b, i| if ws[i] < ws[b] - 1e-12 { i } else { b });
    w.shape.v(0)[i].clone()
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let tol = cli.tol;
    match &cli.cmd {
        Cmd::Pf { graph, basepoint } => {
            let g: BipartiteGraph = serde_json::from_str(&read(graph)?).context("invalid graph")?;
            let bp = match basepoint {
                None => None,
                Some(id) => Some(
                    g.even_index(id)
                        .map(|i| (true, i))
                        .or_else(|| g.odd_index(id).map(|i| (false, i)))
                        .ok_or_else(|| anyhow!("unknown basepoint {id}"))?,
                ),
            };
            let pf = pf_data(&g, tol, bp)?;
            let s = format!("beta = {}", pf.beta);
            Ok(Outcome::ok("pf.json", serde_json::to_string_pretty(&pf)?, s))
        }
        Cmd::Verify { conn } => {
            let w = load_conn(conn)?;
            let rep = w.verify_biunitarity(tol);
            let s = format!(
                "bi-unitarity {}: unitarity {:e}, crossing {:e}",
                if rep.pass { "pass" } else { "FAIL" },
                rep.unitarity_residual,
                rep.crossing_residual
            );
            Ok(Outcome { docs: vec![("verify.json".into(), serde_json::to_string_pretty(&rep)?)], summary: s, pass: rep.pass })
        }
        Cmd::Compose { up, down } => {
            let w = compose(&load_conn(up)?, &load_conn(down)?)?;
            let s = format!("composite with {} cells", w.n_cells());
            Ok(Outcome::ok("composite.json", w.to_json(), s))
        }
        Cmd::Decompose { conn } => {
            let parts = decompose(&load_conn(conn)?, cli.seed, tol)?;
            let mut docs = Vec::new();
            let mut index = Vec::new();
            for (i, (p, mult)) in parts.iter().enumerate() {
                let name = format!("part{i}.json");
                index.push(json!({"file": name, "multiplicity": mult, "cells": p.n_cells()}));
                docs.push((name, p.to_json()));
            }
            let mults: Vec<usize> = parts.iter().map(|p| p.1).collect();
            docs.insert(0, ("decomposition.json".into(), pretty(&json!(index))));
            Ok(Outcome { docs, summary: format!("{} irreducible(s), multiplicities {mults:?}", parts.len()), pass: true })
        }
        Cmd::FusionTable { gens, identity, cap } => {
            let gs = gens.iter().map(|p| load_conn(p)).collect::<anyhow::Result<Vec<_>>>()?;
            let sys = fusion_closure(&gs, &load_conn(identity)?, *cap, tol)?;
            let t = sys.table;
            let s = format!("{} objects", t.labels.len());
            Ok(Outcome { docs: vec![("fusion.json".into(), t.to_json()), ("fusion.dot".into(), t.to_dot())], summary: s, pass: true })
        }
        Cmd::Flatness { conn, max, basepoint } => {
            let w = load_conn(conn)?;
            let bp = basepoint.clone().unwrap_or_else(|| default_basepoint(&w));
            let rep = is_flat(&w, &bp, (max[0], max[1]), tol.max(1e-8))?;
            let s = match &rep.witness {
                None => format!("flat up to ({}, {}), max defect {:e}", max[0], max[1], rep.max_defect()),
                Some(wt) => format!("violated at size {:?}, |Z - 1| = {:e}", wt.size, rep.max_defect()),
            };
            let pass = rep.is_flat();
            Ok(Outcome { docs: vec![("flatness.json".into(), rep.to_json())], summary: s, pass })
        }
        Cmd::FlatPart { conn, depth, basepoint } => {
            let w = load_conn(conn)?;
            let bp = basepoint.clone().unwrap_or_else(|| default_basepoint(&w));
            let fp = flat_part(&w, &bp, *depth, tol)?;
            let g = &fp.principal_graph;
            let s = format!(
                "principal graph: {} + {} vertices, {} edges{}",
                g.even.len(),
                g.odd.len(),
                g.n_edges(),
                if fp.stabilized { "" } else { " (not stabilized)" }
            );
            Ok(Outcome {
                docs: vec![("flat_part.json".into(), fp.to_json()), ("principal.dot".into(), g.to_dot("principal"))],
                summary: s,
                pass: true,
            })
        }
        Cmd::Ade { cmd: AdeCmd::Build { diagram, chirality: ch } } => {
            let d = dynkin(diagram)?;
            let w = ocneanu_connection(&d, chirality(ch)?)?;
            let s = format!("{} ({} cells)", d.name, w.n_cells());
            Ok(Outcome::ok("connection.json", w.to_json(), s))
        }
        Cmd::Su2k { cmd: Su2kCmd::Gen { k, lambda, mu } } => {
            let data = quantum_data(*k, tol.max(1e-12))?;
            match (lambda, mu) {
                (Some(l), Some(m)) => {
                    let w = build_w1(&data, *l, *m)?;
                    Ok(Outcome::ok("w1.json", w.to_json(), format!("W1({l},{m}) at level {k}")))
                }
                _ => Ok(Outcome::ok("su2k.json", data.to_json(), format!("SU(2)_{k}: {} labels", k + 1))),
            }
        }
        Cmd::Ghj { cmd: GhjCmd::Solve { diagram } } => {
            let m = ghj_module(&dynkin(diagram)?, tol.max(1e-9))?;
            let man = m.manifest();
            let s = format!("{} at level {}, theta {:?}, local: {}", man.diagram, man.k, man.theta, man.local);
            Ok(Outcome {
                docs: vec![("module.json".into(), serde_json::to_string_pretty(&man)?), ("w2.json".into(), m.w2.to_json())],
                summary: s,
                pass: true,
            })
        }
        Cmd::Alpha { cmd: AlphaCmd::Induce { m, lambda, mu, chirality: ch, which } } => {
            let md = load_module(&m.module, tol)?;
            let ch = chirality(ch)?;
            let w = match which.as_str() {
                "w2" => build_w2(&md, *mu)?,
                "w3" => build_w3(&md, *lambda, ch)?,
                "w4" => build_w4(&md, *lambda, *mu, ch)?,
                _ => bail!("--which must be w2, w3 or w4"),
            };
            let rep = w.verify_biunitarity(tol);
            let s = format!("{which} on {}: {} cells, bi-unitary: {}", md.diagram.name, w.n_cells(), rep.pass);
            Ok(Outcome { docs: vec![("conn.json".into(), w.to_json())], summary: s, pass: rep.pass })
        }
        Cmd::Alpha { cmd: AlphaCmd::Sweep { m, max_label } } => {
            let md = load_module(&m.module, tol)?;
            let mut rows = Vec::new();
            let mut pass = true;
            for lambda in 1..=(*max_label).min(md.k) {
                for mu in 1..=(*max_label).min(md.k) {
                    for ch in [Chirality::Plus, Chirality::Minus] {
                        let w4 = build_w4(&md, lambda, mu, ch)?;
                        let rep = w4.verify_biunitarity(tol);
                        let iybe = iybe_residual(&md, lambda, mu, ch)?;
                        let conj = check_conj(&md, lambda, mu)?;
                        let graded = split_graded(&w4)?.len();
                        pass &= rep.pass && iybe < tol && conj < tol;
                        rows.push(json!({
                            "lambda": lambda, "mu": mu, "chirality": ch.symbol(),
                            "unitarity": rep.unitarity_residual, "crossing": rep.crossing_residual,
                            "iybe": iybe, "conj": conj, "graded_components": graded,
                        }));
                    }
                }
            }
            let s = format!("{} sweep over {} entries: {}", md.diagram.name, rows.len(), if pass { "pass" } else { "FAIL" });
            Ok(Outcome { docs: vec![("sweep.json".into(), pretty(&json!(rows)))], summary: s, pass })
        }
        Cmd::Oracle { cmd: OracleCmd::Compare { m, lambda, mu, chirality: ch } } => {
            let md = load_module(&m.module, tol)?;
            let ch = chirality(ch)?;
            let o = extract_w4_oracle(&md, *lambda, *mu, ch)?;
            let direct = build_w4(&md, *lambda, *mu, ch)?;
            let eq = biunitary::catops::equivalent(&o.connection, &direct, tol)?;
            let residual = eq.as_ref().map(|e| e.residual);
            let pass = residual.is_some() && o.containment_residual < tol && o.uncovered == 0;
            let doc = json!({
                "containment_residual": o.containment_residual,
                "consistency_residual": o.consistency_residual,
                "uncovered_cells": o.uncovered,
                "equivalent": residual.is_some(),
                "equivalence_residual": residual,
            });
            let s = format!(
                "oracle vs W4 on {}: containment {:e}, {}",
                md.diagram.name,
                o.containment_residual,
                match residual {
                    Some(r) => format!("equivalent (residual {r:e})"),
                    None => "NOT equivalent".into(),
                }
            );
            Ok(Outcome { docs: vec![("oracle.json".into(), pretty(&doc)), ("oracle_conn.json".into(), o.connection.to_json())], summary: s, pass })
        }
    }
}

/// Writes via a temporary sibling and a rename.
fn write_atomic(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("tmp~");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, o: &Outcome) -> anyhow::Result<()> {
    match out {
        None => println!("{}", o.docs[0].1),
        Some(p) if p.extension().is_some_and(|e| e == "json") => write_atomic(p, &o.docs[0].1)?,
        Some(dir) => {
            for (name, text) in &o.docs {
                write_atomic(&dir.join(name), text)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|o| emit(&cli.out, &o).map(|_| o));
    match result {
        Ok(o) => {
            eprintln!("{}", o.summary);
            if o.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
