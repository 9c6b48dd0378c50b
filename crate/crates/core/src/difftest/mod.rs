//! Differential testing of generated programs across backends.

use crate::backends::{Backend, FaultSet, RunError};
use crate::exec::{self, ExecError, HoleEval, RExpr, Site};
use crate::gen::{generate, GenConfig};
use crate::lang::{Ident, Program};
use crate::template::{HoleFillMap, Template, DEFAULT_STEP_BUDGET};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::time::Instant;

pub const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Running total of per-iteration hashes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Checksum(pub u64);

impl fmt::Display for Checksum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl Serialize for Checksum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// FNV-1a over `name 0x00 value_le` for each variable in order.
pub fn checksum_iteration(names: &[Ident], mem: &[i64]) -> u64 {
    let mut h = FNV_OFFSET;
    let mut eat = |b: u8| h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    for (name, v) in names.iter().zip(mem) {
        name.as_str().bytes().for_each(&mut eat);
        eat(0);
        v.to_le_bytes().into_iter().for_each(&mut eat);
    }
    h
}

pub fn fold_checksum(running: Checksum, h: u64) -> Checksum {
    Checksum(running.0.wrapping_mul(FNV_PRIME) ^ h)
}

/// Runs `p` on one backend and folds the per-iteration hashes.
pub fn run_checksum(b: &dyn Backend, p: &Program, iters: u64, budget: u64) -> Result<Checksum, RunError> {
    let names = p.var_names();
    let mut sum = Checksum::default();
    b.execute(p, iters, budget, &mut |m| sum = fold_checksum(sum, checksum_iteration(&names, m)))?;
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Agree { checksum: Checksum },
    Divergence { reference: String, reference_checksum: Checksum, other: String, other_checksum: Checksum },
    Crash { backend: String, error: String },
    NondetDiscard { backend: String },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Agree { .. } => "agree",
            Verdict::Divergence { .. } => "divergence",
            Verdict::Crash { .. } => "crash",
            Verdict::NondetDiscard { .. } => "nondet_discard",
        }
    }

    pub fn is_agree(&self) -> bool {
        matches!(self, Verdict::Agree { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiffOptions {
    pub iters: u64,
    pub budget: u64,
    /// Extra runs of the reference backend before a mismatch is reported.
    pub rechecks: u32,
}

impl DiffOptions {
    pub fn new(iters: u64) -> DiffOptions {
        DiffOptions { iters, budget: DEFAULT_STEP_BUDGET, rechecks: 1 }
    }
}

/// Compares checksums of `p` across `backends`. The reference is the
/// backend named `ref`, or the first one.
pub fn diff_test(p: &Program, backends: &[&dyn Backend], opt: DiffOptions) -> Verdict {
    let mut sums = Vec::with_capacity(backends.len());
    for b in backends {
        match run_checksum(*b, p, opt.iters, opt.budget) {
            Ok(s) => sums.push(s),
            Err(e) => return Verdict::Crash { backend: b.name(), error: e.to_string() },
        }
    }
    if sums.windows(2).all(|w| w[0] == w[1]) {
        return Verdict::Agree { checksum: sums[0] };
    }
    let r = backends.iter().position(|b| b.name() == "ref").unwrap_or(0);
    for _ in 0..opt.rechecks {
        match run_checksum(backends[r], p, opt.iters, opt.budget) {
            Ok(s) if s == sums[r] => {}
            Ok(_) => return Verdict::NondetDiscard { backend: backends[r].name() },
            Err(e) => return Verdict::Crash { backend: backends[r].name(), error: e.to_string() },
        }
    }
    let o = (0..backends.len()).find(|&i| sums[i] != sums[r]).expect("some backend disagrees");
    Verdict::Divergence {
        reference: backends[r].name(),
        reference_checksum: sums[r],
        other: backends[o].name(),
        other_checksum: sums[o],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reachability {
    pub reached: usize,
    pub filled: usize,
}

impl Reachability {
    /// Reached over filled; 1.0 when nothing was filled.
    pub fn fraction(&self) -> f64 {
        if self.filled == 0 {
            1.0
        } else {
            self.reached as f64 / self.filled as f64
        }
    }
}

struct Probe<'a> {
    sites: &'a [Site],
    fills: Vec<Option<RExpr>>,
    reached: Vec<bool>,
}

impl HoleEval for Probe<'_> {
    fn eval_hole(&mut self, site: u32, mem: &[i64]) -> Result<i64, ExecError> {
        match &self.fills[site as usize] {
            Some(e) => {
                self.reached[site as usize] = true;
                Ok(exec::eval_concrete(e, mem))
            }
            None => Err(ExecError::UnfilledHole(self.sites[site as usize].addr)),
        }
    }
}

/// Runs the program that `fills` produces from `t` for `iters` iterations
/// and counts which filled holes are evaluated.
pub fn measure_reachability(t: &Template, fills: &HoleFillMap, iters: u64, budget: u64) -> Result<Reachability, RunError> {
    let r = &t.resolved;
    let slots = t.slots();
    let mut probe = Probe {
        sites: &r.sites,
        fills: r.sites.iter().map(|s| fills.get(&s.addr).map(|e| slots.resolve(e))).collect(),
        reached: vec![false; r.sites.len()],
    };
    let err = |e: ExecError, iteration| match e {
        ExecError::UnfilledHole(addr) => RunError::UnfilledHole { addr, iteration },
        _ => RunError::StepBudget { iteration },
    };
    if iters > 0 {
        let mut mem = exec::init_memory(&r.inits, &mut probe).map_err(|e| err(e, 1))?;
        for i in 1..=iters {
            exec::run_once(&r.stmts, &mut mem, &mut probe, budget).map_err(|e| err(e, i))?;
        }
    }
    let filled = probe.fills.iter().filter(|f| f.is_some()).count();
    Ok(Reachability { reached: probe.reached.iter().filter(|r| **r).count(), filled })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BugReport {
    pub template: String,
    pub program_index: u64,
    pub seed: u64,
    pub backends: Vec<String>,
    pub verdict: Verdict,
    pub program: String,
    pub repro: String,
}

impl BugReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub templates: usize,
    pub programs: usize,
    pub agree: usize,
    pub divergence: usize,
    pub crash: usize,
    pub nondet_discard: usize,
    /// Templates that failed to generate, with the reason.
    pub errors: Vec<String>,
    pub gen_millis: u128,
    pub test_millis: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CampaignResult {
    pub reports: Vec<BugReport>,
    pub summary: Summary,
}

impl CampaignResult {
    /// 0 when everything agreed, 1 with reports, 2 on harness errors.
    pub fn exit_code(&self) -> i32 {
        if !self.summary.errors.is_empty() {
            2
        } else if !self.reports.is_empty() {
            1
        } else {
            0
        }
    }
}

/// Generates from every template and differential-tests each program.
/// Templates are named by id, which appears in reports and repro commands.
pub fn campaign(templates: &[(String, Template)], gen: &GenConfig, backends: &[&dyn Backend], opt: DiffOptions) -> CampaignResult {
    let mut summary = Summary { templates: templates.len(), ..Summary::default() };
    let mut reports = Vec::new();
    let names: Vec<String> = backends.iter().map(|b| b.name()).collect();
    let faults: FaultSet = backends.iter().flat_map(|b| b.faults().iter()).collect();
    for (id, t) in templates {
        let started = Instant::now();
        let corpus = generate(t, gen);
        summary.gen_millis += started.elapsed().as_millis();
        let corpus = match corpus {
            Ok(c) => c,
            Err(e) => {
                summary.errors.push(format!("{id}: {e}"));
                continue;
            }
        };
        let started = Instant::now();
        let verdicts: Vec<Verdict> = corpus.programs.par_iter().map(|g| diff_test(&g.program, backends, opt)).collect();
        summary.test_millis += started.elapsed().as_millis();
        for (g, v) in corpus.programs.iter().zip(verdicts) {
            summary.programs += 1;
            match v {
                Verdict::Agree { .. } => {
                    summary.agree += 1;
                    continue;
                }
                Verdict::Divergence { .. } => summary.divergence += 1,
                Verdict::Crash { .. } => summary.crash += 1,
                Verdict::NondetDiscard { .. } => summary.nondet_discard += 1,
            }
            reports.push(BugReport {
                template: id.clone(),
                program_index: g.index,
                seed: gen.seed,
                backends: names.clone(),
                verdict: v,
                program: g.text.clone(),
                repro: repro_command(id, g.index, gen, &names, faults, opt),
            });
        }
    }
    CampaignResult { reports, summary }
}

fn repro_command(template: &str, index: u64, gen: &GenConfig, backends: &[String], faults: FaultSet, opt: DiffOptions) -> String {
    let mut cmd = format!(
        "templar difftest -t {template} --index {index} --seed {} --max-iterations {} --backends {} --iters {}",
        gen.seed,
        gen.max_iterations,
        backends.join(","),
        opt.iters
    );
    if !faults.is_empty() {
        cmd.push_str(&format!(" --inject {faults}"));
    }
    cmd
}
