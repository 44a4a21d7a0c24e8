//! Command-line surface: generate, enumerate, verify, classify.
//!
//! Exit codes: 0 on success (complete result), 2 when a resource limit left
//! a partial result, 1 on any error.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use facets::dd::{ad_enumerate, double_description, Limits, RunStatus};
use facets::generators::{
    bell_polytope, cut_polytope, verify_scenario_counts, BellScenario, MultipartiteGraph,
};
use facets::io::{
    load_class_file, load_polytope, read_log, save_class_file, save_polytope, ClassFileMeta,
    ClassFileRecord, ClassLog, LogHeader,
};
use facets::model::Inequality;
use facets::sampler::{as_enumerate, classify, ClassRecord, SamplerConfig};
use facets::symmetry::{OrbitSize, PermGroup};
use facets::{Error, Result};

#[derive(Parser)]
#[command(name = "facets", about = "Exact facet-class enumeration for symmetric 0/1 polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a polytope family member and write its polytope file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Enumerate facet classes of a polytope file.
    Enumerate(EnumerateArgs),
    /// Re-check every record of a class file against its polytope.
    Verify {
        class_file: PathBuf,
        polytope_file: PathBuf,
        /// How many records to cross-check pairwise for equivalence.
        #[arg(long, default_value_t = 30)]
        sample: usize,
    },
    /// Reduce an inequality list to facet classes.
    Classify {
        inequality_file: PathBuf,
        polytope_file: PathBuf,
        /// Compute orbit sizes up to this cap.
        #[arg(long)]
        orbits: Option<u64>,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Bell polytope: inputs and outputs per party.
    Bell {
        ma: usize,
        mb: usize,
        na: usize,
        nb: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cut polytope of a complete multipartite graph, e.g. `1,1,3,3` or `8`.
    Cut {
        parts: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EnumerateArgs {
    polytope_file: PathBuf,
    /// as (adjacency sampling), ad (adjacency decomposition), dd (double description)
    #[arg(long, default_value = "as")]
    method: String,
    #[arg(long, default_value_t = 20)]
    cutoff: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Visits per class with fresh descent seeds.
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    #[arg(long)]
    max_classes: Option<usize>,
    #[arg(long)]
    max_seconds: Option<u64>,
    #[arg(long)]
    max_mem_mb: Option<usize>,
    /// Replay the run log before continuing.
    #[arg(long)]
    resume: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compute orbit sizes up to this cap for the class file.
    #[arg(long)]
    orbits: Option<u64>,
    /// Suppress periodic progress lines on stderr.
    #[arg(long)]
    quiet: bool,
}

pub fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { kind } => cmd_generate(kind),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Verify {
            class_file,
            polytope_file,
            sample,
        } => cmd_verify(&class_file, &polytope_file, sample),
        Command::Classify {
            inequality_file,
            polytope_file,
            orbits,
        } => cmd_classify(&inequality_file, &polytope_file, orbits),
    }
}

fn cmd_generate(kind: GenerateKind) -> Result<u8> {
    let (polytope, group, expected_n, expected_d, out) = match kind {
        GenerateKind::Bell { ma, mb, na, nb, out } => {
            let s = BellScenario::new(ma, mb, na, nb)?;
            let (p, g) = bell_polytope(&s)?;
            (p, g, s.vertex_count(), s.dimension(), out)
        }
        GenerateKind::Cut { parts, out } => {
            let sizes: Vec<usize> = parts
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidInput(format!("bad part size '{t}'")))
                })
                .collect::<Result<_>>()?;
            let g = MultipartiteGraph::new(sizes)?;
            let (p, grp) = cut_polytope(&g)?;
            (p, grp, g.vertex_count(), g.edge_count(), out)
        }
    };
    let report = verify_scenario_counts(&polytope, &group, expected_n, expected_d)?;
    let path = out.unwrap_or_else(|| PathBuf::from(format!("{}.poly", report.name)));
    save_polytope(&path, &polytope, &group)?;
    println!(
        "{}: {} vertices, dimension {}, {} symmetry generators -> {}",
        report.name,
        report.vertex_count,
        report.ambient_dim,
        report.generator_count,
        path.display()
    );
    Ok(0)
}

fn records_to_file(
    records: &[ClassRecord],
    group: &Arc<PermGroup>,
    orbits: Option<u64>,
) -> Vec<ClassFileRecord> {
    records
        .iter()
        .map(|r| ClassFileRecord {
            ineq: r.support.clone(),
            tight_size: r.tight.len(),
            orbit_size: orbits.and_then(|cap| match group.orbit_size(&r.tight, cap) {
                OrbitSize::Exact(n) => Some(n),
                OrbitSize::ExceedsCap => None,
            }),
        })
        .collect()
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<u8> {
    let (polytope, group) = load_polytope(&args.polytope_file)?;
    let out = args.out.clone().unwrap_or_else(|| {
        let mut p = args.polytope_file.clone();
        p.set_extension("classes");
        p
    });
    let limits = Limits {
        max_classes: args.max_classes,
        max_seconds: args.max_seconds,
        max_mem_bytes: args.max_mem_mb.map(|m| m * 1024 * 1024),
    };
    if (args.method == "as" || args.method == "ad") && group.is_trivial() {
        return Err(Error::InvalidInput(format!(
            "method '{}' needs a nonempty symmetry block",
            args.method
        )));
    }

    let (records, status, rotations) = match args.method.as_str() {
        "as" => {
            let log_path = log_path_for(&out);
            let header = LogHeader {
                polytope: polytope.name().to_string(),
                method: "as".into(),
                cutoff: args.cutoff,
                seed: args.seed,
            };
            let (resume, log) = if args.resume {
                let state = read_log(&log_path, &header)?;
                (Some(state), ClassLog::append(&log_path)?)
            } else {
                (None, ClassLog::create(&log_path, &header)?)
            };
            let cfg = SamplerConfig {
                cutoff: args.cutoff,
                workers: args.workers,
                seed: args.seed,
                repeats: args.repeats,
                limits,
                progress: !args.quiet,
            };
            let result = as_enumerate(&polytope, &group, &cfg, resume, Some(Box::new(log)))?;
            (result.classes, result.status, result.rotations)
        }
        "ad" => {
            if args.resume {
                return Err(Error::InvalidInput(
                    "--resume is only supported with --method as".into(),
                ));
            }
            let (classes, status) = ad_enumerate(&polytope, &group, args.cutoff, &limits)?;
            let records = classes
                .into_iter()
                .map(|c| ClassRecord {
                    key: c.key,
                    support: c.representative.support().clone(),
                    tight: c.representative.tight().to_vec(),
                })
                .collect();
            (records, status, 0)
        }
        "dd" => {
            if args.resume {
                return Err(Error::InvalidInput(
                    "--resume is only supported with --method as".into(),
                ));
            }
            let facets = double_description(&polytope)?;
            println!("{}: {} facets", polytope.name(), facets.len());
            let supports: Vec<Inequality> =
                facets.iter().map(|f| f.support().clone()).collect();
            let report = classify(&supports, &polytope, &group)?;
            let records = report
                .classes
                .into_iter()
                .map(|(rec, _)| rec)
                .collect::<Vec<_>>();
            (records, RunStatus::Complete, 0)
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected as, ad or dd)"
            )))
        }
    };

    let meta = ClassFileMeta {
        polytope: polytope.name().to_string(),
        ambient_dim: polytope.ambient_dim(),
        method: args.method.clone(),
        cutoff: args.cutoff,
        seed: args.seed,
        status: status.clone(),
    };
    let file_records = records_to_file(&records, &group, args.orbits);
    save_class_file(&out, &meta, &file_records)?;
    match &status {
        RunStatus::Complete => {
            println!(
                "{}: {} classes (complete, {} rotations) -> {}",
                polytope.name(),
                records.len(),
                rotations,
                out.display()
            );
            Ok(0)
        }
        RunStatus::Stopped(reason) => {
            println!(
                "{}: {} classes (stopped: {reason}) -> {}",
                polytope.name(),
                records.len(),
                out.display()
            );
            Ok(2)
        }
    }
}

fn log_path_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".log");
    PathBuf::from(s)
}

fn cmd_verify(class_file: &Path, polytope_file: &Path, sample: usize) -> Result<u8> {
    let (polytope, group) = load_polytope(polytope_file)?;
    let (meta, records) = load_class_file(class_file)?;
    if meta.polytope != polytope.name() {
        println!(
            "FAIL: class file is for '{}', polytope file is '{}'",
            meta.polytope,
            polytope.name()
        );
        return Ok(1);
    }
    if meta.ambient_dim != polytope.ambient_dim() {
        println!("FAIL: ambient dimension mismatch");
        return Ok(1);
    }
    let mut failures = 0usize;
    let mut tights: Vec<Vec<usize>> = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let ts = polytope.tight_set(&r.ineq);
        if !ts.valid {
            println!("FAIL: record {i} is violated by some vertex");
            failures += 1;
            tights.push(Vec::new());
            continue;
        }
        if ts.indices.len() != r.tight_size {
            println!(
                "FAIL: record {i} tight size {} != recorded {}",
                ts.indices.len(),
                r.tight_size
            );
            failures += 1;
        }
        if polytope.rank_of(&ts.indices) != polytope.intrinsic_dim() {
            println!("FAIL: record {i} is not a facet (rank deficient tight set)");
            failures += 1;
        }
        tights.push(ts.indices);
    }
    // Pairwise inequivalence on a deterministic sample of records.
    let step = (records.len() / sample.max(1)).max(1);
    let sampled: Vec<usize> = (0..records.len()).step_by(step).collect();
    let mut keys = Vec::with_capacity(sampled.len());
    for &i in &sampled {
        if tights[i].is_empty() {
            continue;
        }
        keys.push((i, group.canonical_set(&tights[i])?));
    }
    for a in 0..keys.len() {
        for b in a + 1..keys.len() {
            if keys[a].1 == keys[b].1 {
                println!(
                    "FAIL: records {} and {} are equivalent (duplicate class)",
                    keys[a].0, keys[b].0
                );
                failures += 1;
            }
        }
    }
    if failures == 0 {
        println!(
            "OK: {} records verified against {}",
            records.len(),
            polytope.name()
        );
        Ok(0)
    } else {
        println!("{failures} failures");
        Ok(1)
    }
}

fn cmd_classify(inequality_file: &Path, polytope_file: &Path, orbits: Option<u64>) -> Result<u8> {
    let (polytope, group) = load_polytope(polytope_file)?;
    let text = std::fs::read_to_string(inequality_file)?;
    let inequalities = facets::io::parse_inequalities(&text, polytope.ambient_dim())?;
    let report = classify(&inequalities, &polytope, &group)?;
    println!(
        "{}: {} inputs -> {} classes, {} non-facets, {} invalid",
        polytope.name(),
        inequalities.len(),
        report.classes.len(),
        report.non_facets.len(),
        report.invalid.len()
    );
    for (k, (rec, members)) in report.classes.iter().enumerate() {
        let orbit = orbits
            .map(|cap| match group.orbit_size(&rec.tight, cap) {
                OrbitSize::Exact(n) => n.to_string(),
                OrbitSize::ExceedsCap => format!(">{cap}"),
            })
            .unwrap_or_else(|| "-".into());
        println!(
            "class {k}: {} members, tight {}, orbit {orbit}",
            members.len(),
            rec.tight.len()
        );
    }
    for i in &report.non_facets {
        println!("non-facet: input {i}");
    }
    for i in &report.invalid {
        println!("invalid: input {i}");
    }
    Ok(0)
}
