//! Execution-based generation: run a template repeatedly, collect the holes
//! it fills, and substitute them into a fresh copy.

mod prune;

pub use prune::{is_definitely_false, remove_dead_code, truth, Falsity, Truth};

use crate::exec::{ExecError, RExpr, RStmt};
use crate::lang::{print, visit_holes_mut, Program};
use crate::template::{fill, ChoiceStream, Executor, FillError, StreamKey, Template, DEFAULT_STEP_BUDGET};
pub use crate::template::HoleFillMap;
use prune::Pruner;
use rayon::prelude::*;
use std::collections::{HashSet, BTreeSet};
use std::time::{Duration, Instant};

/// Which generation-time optimizations are enabled. None of them changes
/// the generated programs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Optimizations {
    pub early_stop: bool,
    pub hot_fill: bool,
    pub eager_prune: bool,
}

impl Optimizations {
    pub const NONE: Optimizations = Optimizations { early_stop: false, hot_fill: false, eager_prune: false };
    pub const ALL: Optimizations = Optimizations { early_stop: true, hot_fill: true, eager_prune: true };

    /// All eight subsets, in bit order (early stop is bit 0).
    pub fn subsets() -> impl Iterator<Item = Optimizations> {
        (0u8..8).map(|b| Optimizations { early_stop: b & 1 != 0, hot_fill: b & 2 != 0, eager_prune: b & 4 != 0 })
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub seed: u64,
    pub max_iterations: u64,
    pub optimizations: Optimizations,
    pub per_program_timeout: Duration,
    pub overall_timeout: Duration,
    /// Steps allowed per entry execution.
    pub step_budget: u64,
    /// Consecutive duplicate programs tolerated before giving up.
    pub stall_limit: u64,
    /// Program indices run concurrently; 1 runs sequentially.
    pub jobs: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n: 1000,
            seed: 0xA77ACC,
            max_iterations: 100_000,
            optimizations: Optimizations::ALL,
            per_program_timeout: Duration::from_secs(10),
            overall_timeout: Duration::from_secs(600),
            step_budget: DEFAULT_STEP_BUDGET,
            stall_limit: 10_000,
            jobs: 1,
        }
    }
}

impl GenConfig {
    /// Small preset for tests and CI.
    pub fn desk() -> GenConfig {
        GenConfig { n: 50, max_iterations: 2000, ..GenConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("program {program}: {error}")]
    Exec { program: u64, error: ExecError },
    #[error("program {program}: hole {addr} could not be filled: {error}")]
    Fill { program: u64, addr: crate::lang::HoleAddr, error: FillError },
    #[error("program {program}: timed out after {iterations} iterations")]
    Timeout { program: u64, iterations: u64 },
    #[error("no program generated: {0}")]
    Empty(StopReason),
}

/// Values of all declared variables, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState(pub Vec<i64>);

pub fn capture_global_state(ex: &Executor<'_>) -> GlobalState {
    GlobalState(ex.memory().to_vec())
}

pub fn count_holes(t: &Template) -> usize {
    t.hole_count()
}

/// Returns true when `state` was seen before; otherwise records it.
pub fn early_stop(state: GlobalState, seen: &mut HashSet<GlobalState>) -> bool {
    !seen.insert(state)
}

/// Substitutes every filled hole of `t`. Unfilled holes stay in place.
pub fn apply_filled_holes(t: &Template, h: &HoleFillMap) -> Program {
    let mut p = t.program().clone();
    visit_holes_mut(&mut p, |addr, e| {
        if let Some(c) = h.get(&addr) {
            *e = c.clone();
        }
    });
    p
}

/// Rewrites every filled hole of the executor's working copy into concrete
/// code. Addresses of the remaining holes are unaffected.
pub fn hot_fill(ex: &mut Executor<'_>, h: &HoleFillMap) {
    let sites = ex.sites();
    let mut resolved: Vec<Option<RExpr>> = vec![None; sites.len()];
    for (i, s) in sites.iter().enumerate() {
        if let Some(e) = h.get(&s.addr) {
            resolved[i] = Some(ex.slots().resolve(e));
        }
    }
    fn rewrite(e: &mut RExpr, resolved: &[Option<RExpr>]) {
        match e {
            RExpr::Hole(site) => {
                if let Some(c) = &resolved[*site as usize] {
                    *e = c.clone();
                }
            }
            RExpr::Bin(_, l, r) => {
                rewrite(l, resolved);
                rewrite(r, resolved);
            }
            _ => {}
        }
    }
    for s in ex.q.iter_mut() {
        match s {
            RStmt::Assign(_, e) | RStmt::If(e, _) => rewrite(e, &resolved),
            _ => {}
        }
    }
}

/// Result of one template run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub program: Program,
    pub fills: HoleFillMap,
    /// Entry executions performed before the loop ended.
    pub iterations: u64,
}

/// Executes the template up to `max_iterations` times for one program index.
pub fn run_template(t: &Template, program: u64, cfg: &GenConfig) -> Result<RunOutcome, GenError> {
    let started = Instant::now();
    let opt = cfg.optimizations;
    let total = count_holes(t);
    let mut ex = Executor::new(t, cfg.seed, program, cfg.step_budget);
    let mut h = HoleFillMap::new();
    let mut seen = HashSet::new();
    let mut pruner = opt.eager_prune.then(|| Pruner::new(t));
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        if iterations % 64 == 0 && iterations > 0 && started.elapsed() > cfg.per_program_timeout {
            return Err(GenError::Timeout { program, iterations });
        }
        let fresh = ex.exec_entry().map_err(|error| GenError::Exec { program, error })?;
        iterations += 1;
        let before = h.len();
        for (addr, e) in fresh {
            h.entry(addr).or_insert(e);
        }
        if h.len() == total {
            break;
        }
        if opt.early_stop && early_stop(capture_global_state(&ex), &mut seen) {
            break;
        }
        if h.len() > before {
            if opt.hot_fill {
                hot_fill(&mut ex, &h);
            }
            if let Some(p) = pruner.as_mut() {
                prune::remove_dead_code_with(p, &mut ex, &h);
            }
        }
    }
    Ok(RunOutcome { program: apply_filled_holes(t, &h), fills: h, iterations })
}

/// Why generation ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StopReason {
    Complete,
    /// The template has no holes, so every index yields the same program.
    Exhausted,
    /// `stall_limit` consecutive indices produced only duplicates.
    Stalled,
    Timeout,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Complete => "requested count reached",
            StopReason::Exhausted => "template has no holes",
            StopReason::Stalled => "too many consecutive duplicates",
            StopReason::Timeout => "overall timeout expired",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    /// Program index the streams were keyed with.
    pub index: u64,
    pub program: Program,
    /// Canonical printed form.
    pub text: String,
    pub fills: HoleFillMap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub programs: Vec<Generated>,
    pub stop: StopReason,
    /// Program indices tried, duplicates included.
    pub attempts: u64,
}

impl Corpus {
    /// Short diagnostic when fewer programs than requested were produced.
    pub fn warning(&self) -> Option<String> {
        (self.stop != StopReason::Complete)
            .then(|| format!("{} program(s) after {} attempts: {}", self.programs.len(), self.attempts, self.stop))
    }
}

/// Generates up to `cfg.n` distinct programs by execution.
pub fn generate(t: &Template, cfg: &GenConfig) -> Result<Corpus, GenError> {
    collect(t, cfg, |g| run_template(t, g, cfg).map(|r| (r.program, r.fills)))
}

/// Fills every hole up front without running the template.
pub fn static_generate(t: &Template, cfg: &GenConfig) -> Result<Corpus, GenError> {
    collect(t, cfg, |g| {
        let mut h = HoleFillMap::new();
        for addr in t.hole_addresses() {
            let mut stream = ChoiceStream::new(StreamKey { seed: cfg.seed, program: g, addr });
            let node = t.hole(addr).expect("address from template");
            let e = fill(node, &mut stream, t.identifiers()).map_err(|error| GenError::Fill { program: g, addr, error })?;
            h.insert(addr, e);
        }
        Ok((apply_filled_holes(t, &h), h))
    })
}

fn collect<F>(t: &Template, cfg: &GenConfig, one: F) -> Result<Corpus, GenError>
where
    F: Fn(u64) -> Result<(Program, HoleFillMap), GenError> + Sync,
{
    let started = Instant::now();
    let jobs = cfg.jobs.max(1) as u64;
    let mut seen = BTreeSet::new();
    let mut programs = Vec::new();
    let mut next = 1u64;
    let mut stall = 0u64;
    let stop = loop {
        if programs.len() >= cfg.n {
            break StopReason::Complete;
        }
        if started.elapsed() > cfg.overall_timeout {
            break StopReason::Timeout;
        }
        if t.hole_count() == 0 && !programs.is_empty() {
            break StopReason::Exhausted;
        }
        if stall >= cfg.stall_limit {
            break StopReason::Stalled;
        }
        let batch: Vec<u64> = (next..next + jobs).collect();
        next += jobs;
        let results: Vec<_> = if jobs == 1 {
            batch.iter().map(|&g| one(g)).collect()
        } else {
            batch.par_iter().map(|&g| one(g)).collect()
        };
        for (g, r) in batch.into_iter().zip(results) {
            if programs.len() >= cfg.n {
                break;
            }
            let (program, fills) = r?;
            let text = print(&program);
            if seen.insert(text.clone()) {
                stall = 0;
                programs.push(Generated { index: g, program, text, fills });
            } else {
                stall += 1;
            }
        }
    };
    if programs.is_empty() {
        return Err(GenError::Empty(stop));
    }
    Ok(Corpus { programs, stop, attempts: next - 1 })
}
