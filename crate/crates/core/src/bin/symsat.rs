use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use symsat::archive::{AuditKind, AuditOptions, Format, RunArchive, RunManifest};
use symsat::construct::{NestedFamily, TargetPath};
use symsat::irregular::{has_zero_spread, perturbation_witness, Observable};
use symsat::separation::estimate_entropy_word_count;
use symsat::shift::SystemFile;
use symsat::{Error, MarkovMeasure, ShiftSystem};

#[derive(Parser)]
#[command(name = "symsat", version, about = "Constructs and audits generic points of saturated sets on subshifts of finite type")]
struct Cli {
    /// Seed for the construction (overrides the manifest).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of bands (overrides the manifest).
    #[arg(long, global = true)]
    bands: Option<usize>,
    /// Stream length in symbols (overrides the manifest).
    #[arg(long, global = true)]
    horizon: Option<u64>,
    /// Archive directory.
    #[arg(long, global = true, default_value = "run")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Csv)]
    format: Fmt,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Bernoulli(1/2) on the full 2-shift.
    Bernoulli,
    /// Parry measure of the golden mean shift inside the full 2-shift.
    Golden,
    /// A period-2 level inside a mixing ambient.
    PeriodTwo,
    /// Irregular points for x_0 on the full 2-shift.
    Irregular,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Tracking,
    Transitivity,
    Certificate,
    Birkhoff,
    Classify,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a preset family, target and manifest into the output directory.
    Define { preset: Preset },
    /// Check system, family, measure, target, observable or manifest files.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run a manifest into an archive.
    Construct {
        manifest: PathBuf,
        /// Stop after this band, leaving the archive resumable.
        #[arg(long)]
        stop_after_band: Option<usize>,
    },
    /// Continue a partial archive.
    Resume {
        archive: Option<PathBuf>,
        #[arg(long)]
        stop_after_band: Option<usize>,
    },
    /// Audit an archive from its stored stream.
    Audit {
        which: Which,
        archive: Option<PathBuf>,
        /// Word length of the transitivity audit.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Cluster radius of the classification.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        /// Base position where Birkhoff extremes start counting.
        #[arg(long)]
        burn_in: Option<u64>,
        /// Sampled pairs for the certificate audit.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
    },
    /// Entropy of a system (word counts against the Parry value) or of
    /// the vertices of a measure file.
    Entropy {
        file: PathBuf,
        #[arg(short, default_value_t = 32)]
        n: usize,
    },
    /// Describe an archive or a definition file.
    Info { path: Option<PathBuf> },
}

/// 0 pass, 1 audit failure, 2 input error, 3 budget exhausted.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget(_) | Error::Construction { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> symsat::Result<u8> {
    match &cli.cmd {
        Cmd::Define { preset } => define(cli, *preset),
        Cmd::Validate { files } => {
            let mut code = 0;
            for f in files {
                match describe(f) {
                    Ok(lines) => {
                        println!("ok {}", f.display());
                        for l in lines {
                            println!("  {l}");
                        }
                    }
                    Err(e) => {
                        println!("error {}: {e}", f.display());
                        code = 2;
                    }
                }
            }
            Ok(code)
        }
        Cmd::Construct { manifest, stop_after_band } => {
            let mut m = RunManifest::load(manifest)?;
            override_manifest(cli, &mut m);
            let dir = manifest.parent().unwrap_or(Path::new("."));
            let a = RunArchive::create(&cli.out_dir, &m, dir)?;
            let st = a.run(*stop_after_band)?;
            print_status(&a, &st);
            Ok(0)
        }
        Cmd::Resume { archive, stop_after_band } => {
            let a = RunArchive::open(archive.as_deref().unwrap_or(&cli.out_dir))?;
            let st = a.run(*stop_after_band)?;
            print_status(&a, &st);
            Ok(0)
        }
        Cmd::Audit { which, archive, depth, tolerance, burn_in, pairs } => {
            let a = RunArchive::open(archive.as_deref().unwrap_or(&cli.out_dir))?;
            let opts = AuditOptions {
                format: match cli.format {
                    Fmt::Csv => Format::Csv,
                    Fmt::Json => Format::Json,
                },
                depth: *depth,
                burn_in: *burn_in,
                tolerance: *tolerance,
                pairs: *pairs,
            };
            let kinds: Vec<AuditKind> = match which {
                Which::Tracking => vec![AuditKind::Tracking],
                Which::Transitivity => vec![AuditKind::Transitivity],
                Which::Certificate => vec![AuditKind::Certificate],
                Which::Birkhoff => vec![AuditKind::Birkhoff],
                Which::Classify => vec![AuditKind::Classify],
                Which::All => AuditKind::ALL.to_vec(),
            };
            let mut code = 0;
            for k in kinds {
                if k == AuditKind::Birkhoff && a.manifest.observable.is_none() {
                    continue;
                }
                let out = a.audit(k, &opts)?;
                println!("{}", out.summary);
                for f in &out.files {
                    println!("  wrote {}", f.display());
                }
                if !out.pass {
                    code = 1;
                }
            }
            Ok(code)
        }
        Cmd::Entropy { file, n } => entropy(file, *n),
        Cmd::Info { path } => {
            let p = path.as_deref().unwrap_or(&cli.out_dir);
            if p.is_dir() {
                archive_info(cli, p)
            } else {
                for l in describe(p)? {
                    println!("{l}");
                }
                Ok(0)
            }
        }
    }
}

fn override_manifest(cli: &Cli, m: &mut RunManifest) {
    if let Some(s) = cli.seed {
        m.seed = s;
    }
    if let Some(b) = cli.bands {
        m.bands = b;
    }
    if let Some(h) = cli.horizon {
        m.horizon = h;
    }
}

fn print_status(a: &RunArchive, st: &symsat::archive::Status) {
    let state = if st.complete { "complete".to_string() } else { format!("resumable at band {}", st.bands_done) };
    println!(
        "{}: {} of {} bands, {} symbols (horizon {}), seed {}, {state}",
        a.dir.display(),
        st.bands_done,
        st.bands,
        st.length,
        st.horizon,
        st.seed
    );
}

fn write_json(path: &Path, v: &Value) -> symsat::Result<()> {
    symsat::archive::write_atomic(path, serde_json::to_string_pretty(v)?.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn define(cli: &Cli, preset: Preset) -> symsat::Result<u8> {
    let dir = &cli.out_dir;
    std::fs::create_dir_all(dir)?;
    let full = ShiftSystem::full_shift(2)?;
    let (family, target, observable, extra) = match preset {
        Preset::Bernoulli => (
            NestedFamily::single(full),
            Some(json!({ "type": "bernoulli", "p": [0.5, 0.5], "level": 1 })),
            None,
            json!({ "eta": 0.3 }),
        ),
        Preset::Golden => (
            NestedFamily::golden_in_full(),
            Some(TargetPath::parry(&ShiftSystem::golden_mean(), 1)?.to_json()),
            None,
            json!({ "eta": 0.3 }),
        ),
        Preset::PeriodTwo => {
            let f = NestedFamily::period_two();
            let t = TargetPath::parry(f.level(1), 1)?.to_json();
            (f, Some(t), None, json!({ "eta": 0.3, "u": "2" }))
        }
        Preset::Irregular => (
            NestedFamily::single(full),
            None,
            Some(Observable::coordinate(2)),
            json!({ "eta": 0.42, "variant": "a", "level": 1 }),
        ),
    };
    write_json(&dir.join("family.json"), &serde_json::to_value(family.to_file())?)?;
    let mut m = json!({
        "family": "family.json",
        "bands": cli.bands.unwrap_or(3),
        "horizon": cli.horizon.unwrap_or(1_000_000),
        "seed": cli.seed.unwrap_or(1),
        "mode": "direct",
    });
    if let Some(t) = target {
        write_json(&dir.join("target.json"), &t)?;
        m["target"] = json!("target.json");
    }
    if let Some(o) = observable {
        write_json(&dir.join("observable.json"), &serde_json::to_value(o)?)?;
        m["observable"] = json!("observable.json");
    }
    for (k, v) in extra.as_object().unwrap() {
        m[k] = v.clone();
    }
    write_json(&dir.join("manifest.json"), &m)?;
    Ok(0)
}

fn read_json(path: &Path) -> symsat::Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })
}

fn system_lines(s: &ShiftSystem) -> symsat::Result<Vec<String>> {
    let mut out =
        vec![format!("system {:?}: alphabet {}, {} symbols used", s.label(), s.alphabet_size(), s.used_symbols().len())];
    if !s.is_transitive() {
        out.push("not irreducible".into());
        return Ok(out);
    }
    let p = s.period()?;
    out.push(match s.primitivity_index()? {
        Some(i) => format!("irreducible, mixing (primitivity index {i})"),
        None => format!("irreducible, period {p}"),
    });
    out.push(format!("topological entropy {:.6}", MarkovMeasure::parry(s)?.entropy()));
    Ok(out)
}

/// Diagnostics for any definition file, chosen by its keys.
fn describe(path: &Path) -> symsat::Result<Vec<String>> {
    let v = read_json(path)?;
    let parse = |e: Error| Error::Parse { path: path.display().to_string(), msg: e.to_string() };
    let has = |k: &str| v.get(k).is_some();
    if has("levels") {
        let f: symsat::construct::FamilyFile = serde_json::from_value(v.clone())?;
        let fam = NestedFamily::from_file(f).map_err(parse)?;
        let mut out = vec![format!("family {:?}: {} levels, nesting ok", fam.label(), fam.len())];
        for (i, l) in fam.levels().iter().enumerate() {
            out.extend(system_lines(l)?.into_iter().map(|s| format!("level {}: {s}", i + 1)));
        }
        out.push(format!("levels agree with the ambient on words up to length {}", fam.density_depth()));
        Ok(out)
    } else if has("transitions") {
        let f: SystemFile = serde_json::from_value(v.clone())?;
        system_lines(&ShiftSystem::try_from(f).map_err(parse)?)
    } else if has("family") && has("eta") {
        let m = RunManifest::load(path)?;
        let (fam, target, obs) = m.resolve(path.parent().unwrap_or(Path::new("."))).map_err(parse)?;
        let mut out = vec![format!(
            "manifest: family {:?}, {} target vertices, eta {}, {} bands, horizon {}, seed {}",
            fam.label(),
            target.vertices().len(),
            m.eta,
            m.bands,
            m.horizon,
            m.seed
        )];
        if let Some(o) = obs {
            out.push(format!("observable with window {}", o.window));
        }
        Ok(out)
    } else if has("table") || matches!(v.get("type").and_then(Value::as_str), Some("coordinate" | "constant")) {
        let o = Observable::from_json(&v).map_err(parse)?;
        let (lo, hi) = o.range();
        let full = ShiftSystem::full_shift(o.alphabet_size)?;
        let mut out = vec![format!("observable: window {}, values in [{lo}, {hi}]", o.window)];
        if has_zero_spread(&o, &full) {
            out.push("zero spread on the full shift".into());
            if let Some((i, s)) = perturbation_witness(&o, &full, 1e-3) {
                out.push(format!("perturbing entry {i} by 0.001 gives spread {s:.3e}"));
            }
        }
        Ok(out)
    } else {
        let t = TargetPath::from_json(&v).map_err(parse)?;
        let mut out = vec![format!("target: {} vertices, inf entropy {:.6}", t.vertices().len(), t.inf_entropy())];
        for (i, x) in t.vertices().iter().enumerate() {
            out.push(format!("vertex {i}: {} components, entropy {:.6}", x.components().len(), x.entropy()));
        }
        Ok(out)
    }
}

fn entropy(file: &Path, n: usize) -> symsat::Result<u8> {
    let v = read_json(file)?;
    let systems: Vec<(String, ShiftSystem)> = if v.get("levels").is_some() {
        let f: symsat::construct::FamilyFile = serde_json::from_value(v)?;
        let fam = NestedFamily::from_file(f)?;
        let mut out: Vec<_> =
            fam.levels().iter().enumerate().map(|(i, s)| (format!("level {} ({})", i + 1, s.label()), s.clone())).collect();
        if fam.ambient() != fam.level(fam.len()) {
            out.push((format!("ambient ({})", fam.ambient().label()), fam.ambient().clone()));
        }
        out
    } else if v.get("transitions").is_some() {
        let s = ShiftSystem::try_from(serde_json::from_value::<SystemFile>(v)?)?;
        vec![(s.label().to_string(), s)]
    } else {
        let t = TargetPath::from_json(&v)?;
        for (i, x) in t.vertices().iter().enumerate() {
            println!("vertex {i}: entropy {:.6}", x.entropy());
        }
        Vec::new()
    };
    for (name, s) in systems {
        let est = estimate_entropy_word_count(&s, n)?;
        let exact = MarkovMeasure::parry(&s)?.entropy();
        println!("{name}: word count, n = {n}: {:.6}; Parry {exact:.6}; gap {:.6}", est.value, est.value - exact);
    }
    Ok(0)
}

fn archive_info(cli: &Cli, dir: &Path) -> symsat::Result<u8> {
    let a = RunArchive::open(dir)?;
    let c = a.construction()?;
    let s = c.schedule();
    if matches!(cli.format, Fmt::Json) {
        println!("{}", serde_json::to_string_pretty(&json!({ "manifest": a.manifest, "status": a.status()?, "schedule": s }))?);
        return Ok(0);
    }
    println!("family {:?}, route period {}, H* {:.6}, eta {}", c.family.label(), c.route.period(), s.h_star, s.eta);
    match a.status()? {
        Some(st) => print_status(&a, &st),
        None => println!("not constructed yet"),
    }
    println!("band,m,zeta,t,glue_level,K,n,N,ln|Gamma|,end");
    for p in &s.plans[..s.bands] {
        println!(
            "{},{},{:.5},{},{},{},{},{},{:.2},{}",
            p.band,
            p.m,
            p.zeta(),
            p.t,
            p.glue_level,
            p.k_gap,
            p.n,
            p.reps,
            p.gamma_log_count,
            s.band_end(p.band)
        );
    }
    let bad: Vec<_> = s.check_inequalities().into_iter().filter(|i| !i.holds).collect();
    if bad.is_empty() {
        println!("schedule inequalities hold");
    } else {
        for i in bad {
            println!("inequality {} fails at band {}: {} vs {}", i.name, i.band, i.lhs, i.rhs);
        }
    }
    Ok(0)
}
