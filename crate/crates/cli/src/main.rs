use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use templar::backends::{Backend, BackendSpec, Builtin, FaultSet, RunError};
use templar::bundled;
use templar::difftest::{campaign, diff_test, run_checksum, CampaignResult, DiffOptions, Verdict};
use templar::extract::{extract_template, ExtractionConfig};
use templar::gen::{generate, run_template, static_generate, GenConfig, Optimizations};
use templar::lang::{parse, print, Ident, Program};
use templar::template::{Template, DEFAULT_STEP_BUDGET};

const DEFAULT_SEED: u64 = 0xA77ACC;

#[derive(Parser)]
#[command(name = "templar", version, about = "Template-based fuzzing for a small goto language")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate programs from a template.
    Gen(GenArgs),
    /// Run a concrete program and print its checksum.
    Run(RunArgs),
    /// Compare one program across backends.
    Difftest(DifftestArgs),
    /// Generate from several templates and compare every program.
    Campaign(CampaignArgs),
    /// Turn a concrete program into a template.
    Extract(ExtractArgs),
    /// List the bundled templates.
    Templates,
}

#[derive(Args, Clone)]
struct GenOpts {
    /// Seed for hole choices: a number, 0x-prefixed hex, or `random`.
    #[arg(long, env = "TEMPLAR_SEED")]
    seed: Option<String>,
    #[arg(long, default_value_t = GenConfig::default().max_iterations)]
    max_iterations: u64,
    /// Comma-separated: none, early-stop, hot-fill, eager-prune, all.
    #[arg(long, default_value = "all", value_parser = parse_opts)]
    opt: Optimizations,
    /// Per-program generation timeout in seconds.
    #[arg(long, default_value_t = 10)]
    timeout: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl GenOpts {
    fn config(&self, n: usize) -> Result<GenConfig> {
        let jobs = self.jobs.max(1);
        Ok(GenConfig {
            n,
            seed: resolve_seed(self.seed.as_deref())?,
            max_iterations: self.max_iterations,
            optimizations: self.opt,
            per_program_timeout: std::time::Duration::from_secs(self.timeout),
            jobs,
            ..GenConfig::default()
        })
    }
}

#[derive(Args)]
struct GenArgs {
    /// Template file, or `bundled:<name>`.
    #[arg(short, long)]
    template: String,
    #[arg(short = 'n', long = "count", default_value_t = GenConfig::default().n)]
    count: usize,
    #[command(flatten)]
    gen: GenOpts,
    /// Fill every hole up front instead of by execution.
    #[arg(long = "static")]
    static_fill: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    program: PathBuf,
    #[arg(long, default_value = "ref")]
    backend: BackendSpec,
    #[arg(long, default_value_t = 100)]
    iters: u64,
    #[arg(long, value_parser = parse_faults, default_value = "")]
    inject: FaultSet,
    /// Accept a program that still has holes; reaching one exits with 3.
    #[arg(long)]
    allow_holes: bool,
}

#[derive(Args)]
struct BackendOpts {
    #[arg(long, value_delimiter = ',', default_values_t = default_backends())]
    backends: Vec<BackendSpec>,
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    #[arg(long, value_parser = parse_faults, default_value = "")]
    inject: FaultSet,
    /// Reference reruns before a mismatch counts as a divergence.
    #[arg(long, default_value_t = 1)]
    rechecks: u32,
}

fn default_backends() -> Vec<BackendSpec> {
    vec![BackendSpec::Ref, BackendSpec::Vm, BackendSpec::Tiered { threshold: 100, level: 1 }]
}

impl BackendOpts {
    fn builtins(&self) -> Vec<Builtin> {
        self.backends.iter().map(|s| Builtin::with_faults(*s, self.inject)).collect()
    }

    fn diff(&self) -> DiffOptions {
        DiffOptions { rechecks: self.rechecks, ..DiffOptions::new(self.iters) }
    }
}

#[derive(Args)]
struct DifftestArgs {
    /// A concrete program file.
    #[arg(short, long, conflicts_with_all = ["template", "index"])]
    program: Option<PathBuf>,
    /// Template to regenerate the program from, with `--index`.
    #[arg(short, long, requires = "index")]
    template: Option<String>,
    #[arg(long)]
    index: Option<u64>,
    #[command(flatten)]
    gen: GenOpts,
    #[command(flatten)]
    backends: BackendOpts,
}

#[derive(Args)]
struct CampaignArgs {
    /// Template files or `bundled:<name>`; all bundled templates if omitted.
    #[arg(short, long)]
    template: Vec<String>,
    #[arg(short = 'n', long = "count", default_value_t = 50)]
    count: usize,
    #[command(flatten)]
    gen: GenOpts,
    #[command(flatten)]
    backends: BackendOpts,
    /// Directory for manifest.json, reports.jsonl and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rerun the campaign recorded in a manifest; other flags are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    input: PathBuf,
    /// Declared variables whose initial values become holes.
    #[arg(long, value_delimiter = ',')]
    inputs: Vec<String>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Output path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything needed to rerun a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CampaignManifest {
    templates: Vec<String>,
    gen: GenConfig,
    backends: Vec<String>,
    iters: u64,
    rechecks: u32,
    faults: String,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct GenManifest<'a> {
    template: &'a str,
    config: &'a GenConfig,
    static_fill: bool,
    stop: String,
    attempts: u64,
    programs: Vec<GenEntry>,
}

#[derive(Serialize)]
struct GenEntry {
    index: u64,
    file: String,
    holes_filled: usize,
}

fn parse_opts(s: &str) -> Result<Optimizations, String> {
    let mut o = Optimizations::NONE;
    for part in s.split(',').map(str::trim) {
        match part {
            "none" => {}
            "all" => o = Optimizations::ALL,
            "early-stop" => o.early_stop = true,
            "hot-fill" => o.hot_fill = true,
            "eager-prune" => o.eager_prune = true,
            other => return Err(format!("unknown optimization `{other}`")),
        }
    }
    Ok(o)
}

fn parse_faults(s: &str) -> Result<FaultSet, String> {
    if s.trim().is_empty() {
        return Ok(FaultSet::EMPTY);
    }
    s.parse().map_err(|e| format!("{e}"))
}

fn resolve_seed(arg: Option<&str>) -> Result<u64> {
    match arg.map(str::trim) {
        None => Ok(DEFAULT_SEED),
        Some("random") => {
            let s = rand::thread_rng().gen();
            eprintln!("seed: {s}");
            Ok(s)
        }
        Some(s) => {
            let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => s.parse(),
            };
            parsed.with_context(|| format!("bad seed `{s}`"))
        }
    }
}

fn load_template(arg: &str) -> Result<(String, Template)> {
    if arg.starts_with("bundled:") {
        let b = bundled::get(arg).ok_or_else(|| anyhow!("no bundled template `{arg}`"))?;
        return Ok((b.id(), b.template()?));
    }
    let src = fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
    let t = Template::parse(&src).with_context(|| format!("in {arg}"))?;
    Ok((arg.to_string(), t))
}

fn load_program(path: &Path) -> Result<Program> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&src).with_context(|| format!("in {}", path.display()))
}

/// Writes via a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().ok_or_else(|| anyhow!("bad output path {}", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(contents)?;
    f.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// The error chain on one line. Library errors already embed their cause
/// in their message, so causes that repeat earlier text are skipped.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let s = cause.to_string();
        if !out.contains(&s) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&s);
        }
    }
    out
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn set_jobs(jobs: usize) {
    if jobs > 0 && std::env::var_os("RAYON_NUM_THREADS").is_none() {
        std::env::set_var("RAYON_NUM_THREADS", jobs.to_string());
    }
}

fn cmd_gen(a: GenArgs) -> Result<ExitCode> {
    let (id, t) = load_template(&a.template)?;
    let cfg = a.gen.config(a.count)?;
    let corpus = if a.static_fill { static_generate(&t, &cfg) } else { generate(&t, &cfg) }?;
    let mut entries = Vec::new();
    for g in &corpus.programs {
        let file = format!("gen-{}.tj", g.index);
        write_atomic(&a.out.join(&file), g.text.as_bytes())?;
        entries.push(GenEntry { index: g.index, file, holes_filled: g.fills.len() });
    }
    let manifest = GenManifest {
        template: &id,
        config: &cfg,
        static_fill: a.static_fill,
        stop: format!("{:?}", corpus.stop),
        attempts: corpus.attempts,
        programs: entries,
    };
    write_atomic(&a.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    if let Some(w) = corpus.warning() {
        eprintln!("warning: {w}");
    }
    eprintln!("wrote {} program(s) to {}", corpus.programs.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(a: RunArgs) -> Result<ExitCode> {
    let p = load_program(&a.program)?;
    if p.has_holes() && !a.allow_holes {
        bail!("{} still contains holes; pass --allow-holes to run it anyway", a.program.display());
    }
    let b = Builtin::with_faults(a.backend, a.inject);
    match run_checksum(&b, &p, a.iters, DEFAULT_STEP_BUDGET) {
        Ok(sum) => {
            println!("{sum}");
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ RunError::UnfilledHole { .. }) => {
            eprintln!("crash on {}: {e}", b.name());
            Ok(ExitCode::from(3))
        }
        Err(e) => {
            eprintln!("crash on {}: {e}", b.name());
            Ok(ExitCode::FAILURE)
        }
    }
}

fn cmd_difftest(a: DifftestArgs) -> Result<ExitCode> {
    set_jobs(a.gen.jobs);
    let program = match (&a.program, &a.template, a.index) {
        (Some(path), _, _) => load_program(path)?,
        (None, Some(t), Some(g)) => {
            let (_, t) = load_template(t)?;
            run_template(&t, g, &a.gen.config(1)?)?.program
        }
        _ => bail!("give either --program or --template with --index"),
    };
    let builtins = a.backends.builtins();
    let dyns: Vec<&dyn Backend> = builtins.iter().map(|b| b as &dyn Backend).collect();
    let v = diff_test(&program, &dyns, a.backends.diff());
    println!("{}", serde_json::to_string(&v)?);
    Ok(if matches!(v, Verdict::Agree { .. }) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn campaign_manifest(a: &CampaignArgs) -> Result<CampaignManifest> {
    if let Some(path) = &a.manifest {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return serde_json::from_str(&text).with_context(|| format!("in {}", path.display()));
    }
    let templates = if a.template.is_empty() { bundled::TEMPLATES.iter().map(|b| b.id()).collect() } else { a.template.clone() };
    Ok(CampaignManifest {
        templates,
        gen: a.gen.config(a.count)?,
        backends: a.backends.backends.iter().map(|b| b.to_string()).collect(),
        iters: a.backends.iters,
        rechecks: a.backends.rechecks,
        faults: a.backends.inject.to_string(),
        out: a.out.clone(),
    })
}

fn run_campaign(m: &CampaignManifest) -> Result<CampaignResult> {
    let templates = m.templates.iter().map(|t| load_template(t)).collect::<Result<Vec<_>>>()?;
    let faults = parse_faults(&m.faults).map_err(|e| anyhow!(e))?;
    let specs = m.backends.iter().map(|s| s.parse::<BackendSpec>()).collect::<Result<Vec<_>, _>>()?;
    let builtins: Vec<Builtin> = specs.into_iter().map(|s| Builtin::with_faults(s, faults)).collect();
    let dyns: Vec<&dyn Backend> = builtins.iter().map(|b| b as &dyn Backend).collect();
    let opt = DiffOptions { rechecks: m.rechecks, ..DiffOptions::new(m.iters) };
    Ok(campaign(&templates, &m.gen, &dyns, opt))
}

fn cmd_campaign(a: CampaignArgs) -> Result<ExitCode> {
    let m = campaign_manifest(&a)?;
    set_jobs(m.gen.jobs);
    let result = match run_campaign(&m) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            return Ok(ExitCode::from(2));
        }
    };
    let lines: String = result.reports.iter().map(|r| r.to_json_line() + "\n").collect();
    emit(&lines);
    let summary = serde_json::to_string_pretty(&result.summary)?;
    eprintln!("{summary}");
    if let Some(dir) = &m.out {
        write_atomic(&dir.join("manifest.json"), serde_json::to_string_pretty(&m)?.as_bytes())?;
        write_atomic(&dir.join("reports.jsonl"), lines.as_bytes())?;
        write_atomic(&dir.join("summary.json"), summary.as_bytes())?;
    }
    Ok(ExitCode::from(result.exit_code() as u8))
}

fn cmd_extract(a: ExtractArgs) -> Result<ExitCode> {
    let p = load_program(&a.input)?;
    let cfg = ExtractionConfig { input_vars: a.inputs.iter().map(|s| Ident::new(s.trim())).collect(), max_hole_depth: a.max_depth };
    let x = extract_template(&p, &cfg)?;
    let text = print(x.template.program());
    match &a.out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => emit(&text),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Difftest(a) => cmd_difftest(a),
        Cmd::Campaign(a) => cmd_campaign(a),
        Cmd::Extract(a) => cmd_extract(a),
        Cmd::Templates => {
            emit(&bundled::TEMPLATES.iter().map(|b| b.id() + "\n").collect::<String>());
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {}", describe(&e));
        ExitCode::from(2)
    })
}
