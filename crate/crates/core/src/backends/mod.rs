//! Execution backends for concrete programs.
//!
//! Every backend runs the statement list from the top once per iteration,
//! with variable values persisting across iterations, and reports the
//! memory after each iteration to an observer.

pub mod bytecode;
mod opt;

pub use bytecode::{compile_bytecode, Bytecode, Op};
pub use opt::{optimize, Fault, FaultSet, OptLevel, UnknownFault};

use crate::exec::{self, ExecError, NoHoles};
use crate::lang::{HoleAddr, Program};
use bytecode::Abort;
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_TIER_THRESHOLD: u64 = 1000;

/// Snapshots of all variables after each iteration, in declaration order.
pub type Trace = Vec<Vec<i64>>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("step budget exhausted in iteration {iteration}")]
    StepBudget { iteration: u64 },
    #[error("unfilled hole {addr} reached in iteration {iteration}")]
    UnfilledHole { addr: HoleAddr, iteration: u64 },
}

pub trait Backend: Send + Sync {
    fn name(&self) -> String;

    /// Runs `p` for `iters` iterations. `budget` bounds the work done in one
    /// iteration.
    fn execute(&self, p: &Program, iters: u64, budget: u64, observe: &mut dyn FnMut(&[i64])) -> Result<(), RunError>;

    /// Faults injected into this backend, for reproduction commands.
    fn faults(&self) -> FaultSet {
        FaultSet::EMPTY
    }

    fn trace(&self, p: &Program, iters: u64, budget: u64) -> Result<Trace, RunError> {
        let mut t = Vec::new();
        self.execute(p, iters, budget, &mut |m| t.push(m.to_vec()))?;
        Ok(t)
    }
}

fn exec_err(e: ExecError, iteration: u64) -> RunError {
    match e {
        ExecError::UnfilledHole(addr) => RunError::UnfilledHole { addr, iteration },
        _ => RunError::StepBudget { iteration },
    }
}

fn abort_err(a: Abort, iteration: u64) -> RunError {
    match a {
        Abort::Budget => RunError::StepBudget { iteration },
        Abort::Hole(addr) => RunError::UnfilledHole { addr, iteration },
    }
}

/// Tree-walking interpreter over the resolved program.
pub fn interpret_run(p: &Program, iters: u64, budget: u64, observe: &mut dyn FnMut(&[i64])) -> Result<(), RunError> {
    if iters == 0 {
        return Ok(());
    }
    let r = exec::resolve(p);
    let mut h = NoHoles(&r.sites);
    let mut mem = exec::init_memory(&r.inits, &mut h).map_err(|e| exec_err(e, 1))?;
    for i in 1..=iters {
        exec::run_once(&r.stmts, &mut mem, &mut h, budget).map_err(|e| exec_err(e, i))?;
        observe(&mem);
    }
    Ok(())
}

fn init_vm(b: &Bytecode, stack: &mut Vec<i64>, budget: u64) -> Result<Vec<i64>, RunError> {
    let mut mem = vec![0; b.names.len()];
    bytecode::run_code(&b.init, &b.consts, &mut mem, stack, budget).map_err(|a| abort_err(a, 1))?;
    Ok(mem)
}

pub fn vm_run(b: &Bytecode, iters: u64, budget: u64, observe: &mut dyn FnMut(&[i64])) -> Result<(), RunError> {
    if iters == 0 {
        return Ok(());
    }
    let mut stack = Vec::new();
    let mut mem = init_vm(b, &mut stack, budget)?;
    for i in 1..=iters {
        bytecode::run_code(&b.code, &b.consts, &mut mem, &mut stack, budget).map_err(|a| abort_err(a, i))?;
        observe(&mem);
    }
    Ok(())
}

/// Invocation counting for the tiered backend.
#[derive(Clone, Debug)]
pub struct TierState {
    pub invocation_count: u64,
    pub threshold: u64,
    pub compiled: Option<Bytecode>,
}

impl TierState {
    pub fn new(threshold: u64) -> TierState {
        TierState { invocation_count: 0, threshold: threshold.max(1), compiled: None }
    }

    /// Counts one invocation and returns the code to run for it.
    pub fn enter<'a>(&'a mut self, base: &'a Bytecode, faults: FaultSet, level: OptLevel) -> &'a Bytecode {
        self.invocation_count += 1;
        if self.invocation_count >= self.threshold && self.compiled.is_none() {
            self.compiled = Some(optimize(base, faults, level));
        }
        self.compiled.as_ref().unwrap_or(base)
    }
}

/// Runs unoptimized bytecode until the `threshold`-th invocation, and the
/// optimized body from then on.
pub fn tiered_run(
    p: &Program,
    iters: u64,
    threshold: u64,
    level: OptLevel,
    faults: FaultSet,
    budget: u64,
    observe: &mut dyn FnMut(&[i64]),
) -> Result<(), RunError> {
    if iters == 0 {
        return Ok(());
    }
    let base = compile_bytecode(p);
    let mut tier = TierState::new(threshold);
    let mut stack = Vec::new();
    let mut mem = init_vm(&base, &mut stack, budget)?;
    for i in 1..=iters {
        let code = tier.enter(&base, faults, level);
        bytecode::run_code(&code.code, &code.consts, &mut mem, &mut stack, budget).map_err(|a| abort_err(a, i))?;
        observe(&mem);
    }
    Ok(())
}

/// A backend configuration, as written on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BackendSpec {
    Ref,
    Vm,
    Tiered { threshold: u64, level: OptLevel },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("bad backend `{0}`: expected ref, vm or tiered:<threshold>:<optlevel>")]
pub struct BadBackend(pub String);

impl FromStr for BackendSpec {
    type Err = BadBackend;

    fn from_str(s: &str) -> Result<BackendSpec, BadBackend> {
        let bad = || BadBackend(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["ref"] => Ok(BackendSpec::Ref),
            ["vm"] => Ok(BackendSpec::Vm),
            ["tiered"] => Ok(BackendSpec::Tiered { threshold: DEFAULT_TIER_THRESHOLD, level: 1 }),
            ["tiered", t, l] => {
                let threshold: u64 = t.parse().map_err(|_| bad())?;
                let level: OptLevel = l.parse().map_err(|_| bad())?;
                if threshold == 0 || level > 1 {
                    return Err(bad());
                }
                Ok(BackendSpec::Tiered { threshold, level })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Ref => f.write_str("ref"),
            BackendSpec::Vm => f.write_str("vm"),
            BackendSpec::Tiered { threshold, level } => write!(f, "tiered:{threshold}:{level}"),
        }
    }
}

/// A built-in backend: a spec plus the faults injected into its optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Builtin {
    pub spec: BackendSpec,
    pub faults: FaultSet,
}

impl Builtin {
    pub fn new(spec: BackendSpec) -> Builtin {
        Builtin { spec, faults: FaultSet::EMPTY }
    }

    pub fn with_faults(spec: BackendSpec, faults: FaultSet) -> Builtin {
        Builtin { spec, faults }
    }
}

impl Backend for Builtin {
    fn name(&self) -> String {
        self.spec.to_string()
    }

    fn faults(&self) -> FaultSet {
        self.faults
    }

    fn execute(&self, p: &Program, iters: u64, budget: u64, observe: &mut dyn FnMut(&[i64])) -> Result<(), RunError> {
        match self.spec {
            BackendSpec::Ref => interpret_run(p, iters, budget, observe),
            BackendSpec::Vm => vm_run(&compile_bytecode(p), iters, budget, observe),
            BackendSpec::Tiered { threshold, level } => tiered_run(p, iters, threshold, level, self.faults, budget, observe),
        }
    }
}
