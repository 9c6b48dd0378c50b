//! Slot-resolved program form shared by the interpreter, the template
//! executor and the reachability probe.

use crate::lang::{hole_addresses, BinOp, Expr, HoleAddr, HoleNode, Ident, Program, SiteLoc, Stmt};
use crate::template::FillError;
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("step budget of {0} exhausted")]
    StepBudget(u64),
    #[error("unfilled hole {0} reached")]
    UnfilledHole(HoleAddr),
    #[error("hole {addr} could not be filled: {error}")]
    Fill { addr: HoleAddr, error: FillError },
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum RExpr {
    Num(i64),
    Var(u32),
    Bin(BinOp, Box<RExpr>, Box<RExpr>),
    /// Index into the site table.
    Hole(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum RStmt {
    Assign(u32, RExpr),
    /// Jump target is a statement position.
    If(RExpr, u32),
    Goto(u32),
    Halt,
    Nop,
}

#[derive(Clone, Debug)]
pub(crate) struct Site {
    pub addr: HoleAddr,
    pub loc: SiteLoc,
    pub node: HoleNode,
}

#[derive(Clone, Debug)]
pub(crate) struct Resolved {
    pub names: Vec<Ident>,
    pub inits: Vec<RExpr>,
    pub stmts: Vec<RStmt>,
    pub sites: Vec<Site>,
}

pub(crate) struct Slots(HashMap<Ident, u32>);

impl Slots {
    pub fn new(names: &[Ident]) -> Slots {
        Slots(names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect())
    }

    /// Resolves a hole-free expression.
    pub fn resolve(&self, e: &Expr) -> RExpr {
        match e {
            Expr::Num(n) => RExpr::Num(*n),
            Expr::Var(id) => RExpr::Var(self.0[id]),
            Expr::Bin(op, l, r) => RExpr::Bin(*op, Box::new(self.resolve(l)), Box::new(self.resolve(r))),
            Expr::Hole(_) => panic!("resolve called on an expression with holes"),
        }
    }

    fn resolve_with_sites(&self, e: &Expr, loc: SiteLoc, addrs: &[HoleAddr], sites: &mut Vec<Site>) -> RExpr {
        match e {
            Expr::Num(n) => RExpr::Num(*n),
            Expr::Var(id) => RExpr::Var(self.0[id]),
            Expr::Bin(op, l, r) => {
                let l = self.resolve_with_sites(l, loc, addrs, sites);
                let r = self.resolve_with_sites(r, loc, addrs, sites);
                RExpr::Bin(*op, Box::new(l), Box::new(r))
            }
            Expr::Hole(node) => {
                let id = sites.len();
                sites.push(Site { addr: addrs[id], loc, node: (**node).clone() });
                RExpr::Hole(id as u32)
            }
        }
    }
}

/// Resolves a validated program. Sites are numbered in address order.
pub(crate) fn resolve(p: &Program) -> Resolved {
    let names = p.var_names();
    let slots = Slots::new(&names);
    let addrs = hole_addresses(p);
    let labels: HashMap<&Ident, u32> = p
        .stmts
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.label.as_ref().map(|l| (l, i as u32)))
        .collect();
    let mut sites = Vec::with_capacity(addrs.len());
    let stmts = p
        .stmts
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let loc = SiteLoc::Stmt(i);
            match &s.stmt {
                Stmt::Assign(id, e) => RStmt::Assign(slots.0[id], slots.resolve_with_sites(e, loc, &addrs, &mut sites)),
                Stmt::If(e, l) => RStmt::If(slots.resolve_with_sites(e, loc, &addrs, &mut sites), labels[l]),
                Stmt::Goto(l) => RStmt::Goto(labels[l]),
                Stmt::Halt => RStmt::Halt,
            }
        })
        .collect();
    let inits = p
        .decls
        .iter()
        .enumerate()
        .map(|(i, d)| slots.resolve_with_sites(&d.init, SiteLoc::Decl(i), &addrs, &mut sites))
        .collect();
    Resolved { names, inits, stmts, sites }
}

pub(crate) trait HoleEval {
    fn eval_hole(&mut self, site: u32, mem: &[i64]) -> Result<i64, ExecError>;
}

/// Treats every hole as unfilled.
pub(crate) struct NoHoles<'a>(pub &'a [Site]);

impl HoleEval for NoHoles<'_> {
    fn eval_hole(&mut self, site: u32, _mem: &[i64]) -> Result<i64, ExecError> {
        Err(ExecError::UnfilledHole(self.0[site as usize].addr))
    }
}

#[inline]
pub(crate) fn eval<H: HoleEval>(e: &RExpr, mem: &[i64], h: &mut H) -> Result<i64, ExecError> {
    match e {
        RExpr::Num(n) => Ok(*n),
        RExpr::Var(s) => Ok(mem[*s as usize]),
        RExpr::Bin(op, l, r) => {
            let lv = eval(l, mem, h)?;
            match op {
                BinOp::And if lv == 0 => Ok(0),
                BinOp::Or if lv != 0 => Ok(1),
                _ => Ok(op.apply(lv, eval(r, mem, h)?)),
            }
        }
        RExpr::Hole(site) => h.eval_hole(*site, mem),
    }
}

/// Evaluates an expression known to be hole-free.
pub(crate) fn eval_concrete(e: &RExpr, mem: &[i64]) -> i64 {
    struct Never;
    impl HoleEval for Never {
        fn eval_hole(&mut self, _: u32, _: &[i64]) -> Result<i64, ExecError> {
            unreachable!("concrete expression contains a hole")
        }
    }
    match eval(e, mem, &mut Never) {
        Ok(v) => v,
        Err(_) => unreachable!(),
    }
}

pub(crate) fn init_memory<H: HoleEval>(inits: &[RExpr], h: &mut H) -> Result<Vec<i64>, ExecError> {
    let mut mem = vec![0; inits.len()];
    for (i, e) in inits.iter().enumerate() {
        mem[i] = eval(e, &mem, h)?;
    }
    Ok(mem)
}

/// Runs the statement list once from position 0. Falling off the end halts.
/// Returns the number of statements executed.
pub(crate) fn run_once<H: HoleEval>(stmts: &[RStmt], mem: &mut [i64], h: &mut H, budget: u64) -> Result<u64, ExecError> {
    let mut pc = 0usize;
    let mut steps = 0u64;
    while pc < stmts.len() {
        if steps == budget {
            return Err(ExecError::StepBudget(budget));
        }
        steps += 1;
        match &stmts[pc] {
            RStmt::Assign(slot, e) => {
                mem[*slot as usize] = eval(e, mem, h)?;
                pc += 1;
            }
            RStmt::If(e, target) => {
                if eval(e, mem, h)? != 0 {
                    pc = *target as usize;
                } else {
                    pc += 1;
                }
            }
            RStmt::Goto(target) => pc = *target as usize,
            RStmt::Halt => break,
            RStmt::Nop => pc += 1,
        }
    }
    Ok(steps)
}
