//! Holes, seeded choice streams, and the template executor.
//!
//! A template is a program whose expressions may contain hole roots. When
//! execution first reaches a hole root it is filled from a choice stream
//! keyed by `(seed, program index, hole address)`, rewritten to the chosen
//! concrete expression for the rest of that execution, and recorded in the
//! returned fill map.

mod fill;
mod stream;

pub use fill::{fill, FillError, Identifiers};
pub use stream::{ChoiceStream, StreamKey};

use crate::exec::{self, ExecError, HoleEval, RExpr, RStmt, Resolved, Site, Slots};
use crate::lang::{self, Expr, HoleAddr, HoleNode, LangError, Program, SiteLoc};
use std::collections::BTreeMap;

/// Filled holes of one generation run: hole address to chosen expression.
pub type HoleFillMap = BTreeMap<HoleAddr, Expr>;

/// Default step budget for one template execution.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// A validated template, with its hole sites resolved once.
#[derive(Clone, Debug)]
pub struct Template {
    program: Program,
    pub(crate) resolved: Resolved,
    identifiers: Identifiers,
}

impl Template {
    pub fn new(program: Program) -> Result<Template, LangError> {
        lang::validate(&program)?;
        let resolved = exec::resolve(&program);
        let identifiers = Identifiers::new(program.var_names());
        Ok(Template { program, resolved, identifiers })
    }

    pub fn parse(src: &str) -> Result<Template, LangError> {
        Template::new(lang::parse(src)?)
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn identifiers(&self) -> &Identifiers {
        &self.identifiers
    }

    pub fn hole_count(&self) -> usize {
        self.resolved.sites.len()
    }

    pub fn hole_addresses(&self) -> Vec<HoleAddr> {
        self.resolved.sites.iter().map(|s| s.addr).collect()
    }

    pub fn hole(&self, addr: HoleAddr) -> Option<&HoleNode> {
        self.site_index(addr).map(|i| &self.resolved.sites[i].node)
    }

    pub fn hole_location(&self, addr: HoleAddr) -> Option<SiteLoc> {
        self.site_index(addr).map(|i| self.resolved.sites[i].loc)
    }

    pub(crate) fn site_index(&self, addr: HoleAddr) -> Option<usize> {
        self.resolved.sites.binary_search_by_key(&addr, |s| s.addr).ok()
    }

    pub(crate) fn slots(&self) -> Slots {
        Slots::new(&self.resolved.names)
    }
}

/// Runs a template's entry repeatedly against persistent memory, filling
/// holes as they are reached.
///
/// The statement list `q` is a private working copy: generation-time
/// optimizations may rewrite it, but the template itself never changes.
pub struct Executor<'t> {
    template: &'t Template,
    seed: u64,
    program: u64,
    budget: u64,
    slots: Slots,
    pub(crate) q: Vec<RStmt>,
    mem: Vec<i64>,
    initialized: bool,
    run_fills: Vec<Option<RExpr>>,
    touched: Vec<u32>,
}

impl<'t> Executor<'t> {
    /// Memory starts from the template's declared initial state.
    pub fn new(template: &'t Template, seed: u64, program: u64, budget: u64) -> Executor<'t> {
        Executor {
            template,
            seed,
            program,
            budget,
            slots: template.slots(),
            q: template.resolved.stmts.clone(),
            mem: template.program.initial_values(),
            initialized: false,
            run_fills: vec![None; template.hole_count()],
            touched: Vec::new(),
        }
    }

    pub fn template(&self) -> &'t Template {
        self.template
    }

    pub fn memory(&self) -> &[i64] {
        &self.mem
    }

    /// One execution of the entry. Declaration initializers run on the first
    /// call only. Returns the holes filled during this execution.
    pub fn exec_entry(&mut self) -> Result<HoleFillMap, ExecError> {
        let mut filled = HoleFillMap::new();
        let mut filler = Filler {
            sites: &self.template.resolved.sites,
            idents: &self.template.identifiers,
            slots: &self.slots,
            seed: self.seed,
            program: self.program,
            run_fills: &mut self.run_fills,
            touched: &mut self.touched,
            filled: &mut filled,
        };
        let result = (|| {
            if !self.initialized {
                self.mem = exec::init_memory(&self.template.resolved.inits, &mut filler)?;
                self.initialized = true;
            }
            exec::run_once(&self.q, &mut self.mem, &mut filler, self.budget)
        })();
        for site in self.touched.drain(..) {
            self.run_fills[site as usize] = None;
        }
        result.map(|_| filled)
    }

    pub(crate) fn slots(&self) -> &Slots {
        &self.slots
    }

    pub(crate) fn sites(&self) -> &'t [Site] {
        &self.template.resolved.sites
    }
}

struct Filler<'a> {
    sites: &'a [Site],
    idents: &'a Identifiers,
    slots: &'a Slots,
    seed: u64,
    program: u64,
    run_fills: &'a mut Vec<Option<RExpr>>,
    touched: &'a mut Vec<u32>,
    filled: &'a mut HoleFillMap,
}

impl HoleEval for Filler<'_> {
    fn eval_hole(&mut self, site: u32, mem: &[i64]) -> Result<i64, ExecError> {
        if let Some(e) = &self.run_fills[site as usize] {
            return Ok(exec::eval_concrete(e, mem));
        }
        let s = &self.sites[site as usize];
        let mut stream = ChoiceStream::new(StreamKey { seed: self.seed, program: self.program, addr: s.addr });
        let expr = fill(&s.node, &mut stream, self.idents).map_err(|error| ExecError::Fill { addr: s.addr, error })?;
        let resolved = self.slots.resolve(&expr);
        let v = exec::eval_concrete(&resolved, mem);
        self.run_fills[site as usize] = Some(resolved);
        self.touched.push(site);
        self.filled.insert(s.addr, expr);
        Ok(v)
    }
}

/// Runs the template's entry exactly once from its initial state.
pub fn exec_entry(t: &Template, seed: u64, program: u64, budget: u64) -> Result<(Vec<i64>, HoleFillMap), ExecError> {
    let mut ex = Executor::new(t, seed, program, budget);
    let filled = ex.exec_entry()?;
    Ok((ex.mem, filled))
}
