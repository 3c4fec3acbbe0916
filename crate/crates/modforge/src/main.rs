//! `modforge` command-line interface.
//!
//! Exit status: 0 on success, 1 when an input fails to load or validate,
//! 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use modforge::bench::bench_generation;
use modforge::json::{parse_assembly, parse_module_set, parse_task};
use modforge::search::{parallel_search, ResultLine, Roles};
use modforge::trajectory::write_trajectory_csv;
use modforge::xml::write_xml;
use modforge_core::search::{count_assemblies, SearchOptions};
use modforge_core::task::EvalOptions;
use modforge_core::urdf::generate_urdf;
use modforge_core::ModuleSet;

#[derive(Parser)]
#[command(name = "modforge", version, about = "Modular robot assembly, URDF export and composition search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModulesArg {
    /// Module-set JSON document.
    #[arg(long)]
    modules: PathBuf,
    /// Directory mesh paths are resolved against; meshes must exist when given.
    #[arg(long)]
    assets: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a module set, and optionally an assembly and a task.
    Validate {
        #[command(flatten)]
        modules: ModulesArg,
        #[arg(long)]
        assembly: Option<PathBuf>,
        #[arg(long)]
        task: Option<PathBuf>,
    },
    /// Write the URDF of an assembly.
    ExportUrdf {
        #[command(flatten)]
        modules: ModulesArg,
        #[arg(long)]
        assembly: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Robot name; defaults to the output file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Number of serial chains with up to `dof` joints.
    Count {
        #[arg(long, required_unless_present = "modules", value_parser = clap::value_parser!(u64).range(1..))]
        joints: Option<u64>,
        #[arg(long, requires = "joints")]
        links: Option<u64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        dof: u64,
        /// Take joint and link counts from a module set instead.
        #[arg(long, conflicts_with_all = ["joints", "links"])]
        modules: Option<PathBuf>,
        #[arg(long)]
        include_single_joint: bool,
    },
    /// Brute-force search for serial chains solving a task, best first.
    Search {
        #[command(flatten)]
        modules: ModulesArg,
        #[arg(long)]
        task: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_dof: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; all cores by default.
        #[arg(long)]
        jobs: Option<usize>,
        /// Stop at the first feasible chain of the smallest feasible size.
        #[arg(long)]
        early_stop: bool,
        #[arg(long)]
        include_single_joint: bool,
        /// Base module id when the set has several.
        #[arg(long)]
        base: Option<String>,
        /// End-effector module id when the set has several.
        #[arg(long)]
        eef: Option<String>,
        /// Write the best chain's trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Time model generation and URDF serialization on random chains.
    Bench {
        #[command(flatten)]
        modules: ModulesArg,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        dof: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_set(m: &ModulesArg) -> Result<Arc<ModuleSet>> {
    let set = parse_module_set(&read(&m.modules)?, m.assets.as_deref()).with_context(|| format!("invalid module set {}", m.modules.display()))?;
    Ok(Arc::new(set))
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Validate { modules, assembly, task } => {
            let set = load_set(&modules)?;
            println!("OK, {} modules", set.len());
            if let Some(p) = assembly {
                let a = parse_assembly(&read(&p)?, Arc::clone(&set)).with_context(|| format!("invalid assembly {}", p.display()))?;
                println!("OK, assembly of {} modules, {} dof", a.module_count(), a.degrees_of_freedom());
            }
            if let Some(p) = task {
                let t = parse_task(&read(&p)?).with_context(|| format!("invalid task {}", p.display()))?;
                println!("OK, task with {} obstacles, {} goals", t.obstacles.len(), t.goals.len());
            }
        }
        Command::ExportUrdf { modules, assembly, out, name } => {
            let set = load_set(&modules)?;
            let a = parse_assembly(&read(&assembly)?, set).with_context(|| format!("invalid assembly {}", assembly.display()))?;
            let name = name.unwrap_or_else(|| out.file_stem().map_or("robot".into(), |s| s.to_string_lossy().into_owned()));
            let doc = generate_urdf(&a, &name)?;
            fs::write(&out, write_xml(&doc)).with_context(|| format!("cannot write {}", out.display()))?;
            println!("{}", out.display());
        }
        Command::Count { joints, links, dof, modules, include_single_joint } => {
            let n = match modules {
                Some(path) => {
                    let set = load_set(&ModulesArg { modules: path, assets: None })?;
                    let roles = Roles::classify(&set, None, None)?;
                    roles.spec(set, dof as usize, include_single_joint)?.count()?
                }
                None => {
                    let (nj, nl) = (joints.expect("required by clap"), links.unwrap_or(0));
                    let single = if include_single_joint { nj } else { 0 };
                    count_assemblies(nj, nl, dof) + single
                }
            };
            println!("{n}");
        }
        Command::Search { modules, task, max_dof, seed, jobs, early_stop, include_single_joint, base, eef, trajectory } => {
            let set = load_set(&modules)?;
            let t = parse_task(&read(&task)?).with_context(|| format!("invalid task {}", task.display()))?;
            let roles = Roles::classify(&set, base.as_deref(), eef.as_deref())?;
            let spec = roles.spec(set, max_dof, include_single_joint)?;
            log::info!("searching {} candidate chains", spec.index_space());
            let opts = SearchOptions { eval: EvalOptions { rng_seed: seed, ..EvalOptions::default() }, early_stop };
            let results = parallel_search(&spec, &t, &opts, jobs)?;
            for (i, r) in results.iter().enumerate() {
                println!("{}", ResultLine::new(i, r).to_json());
            }
            if let Some(path) = trajectory {
                let Some(traj) = results.first().and_then(|r| r.outcome.trajectory.as_ref()) else {
                    bail!("no feasible chain, no trajectory written");
                };
                let f = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
                write_trajectory_csv(traj, f)?;
            }
            if results.is_empty() {
                eprintln!("no feasible chain found");
            }
        }
        Command::Bench { modules, n, dof, seed } => {
            let set = load_set(&modules)?;
            let spec = Roles::classify(&set, None, None)?.spec(set, dof, false)?;
            let r = bench_generation(&spec, dof, n, seed)?;
            println!(
                "{} assemblies, {} dof: mean {:.3} ms, p50 {:.3} ms, p95 {:.3} ms, max {:.3} ms",
                r.samples, r.dof, r.mean_ms, r.p50_ms, r.p95_ms, r.max_ms
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
