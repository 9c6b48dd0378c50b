//! Reference small-step semantics over the indexed program.
//!
//! This machine works directly on the AST and a name-keyed memory. The
//! backends use faster resolved forms; this one is kept simple so it can
//! serve as their oracle.

use super::ast::*;
use super::index::{Index, Instr};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pc {
    At(usize),
    Halted,
}

/// Machine state: program counter and main memory. Instruction memory and
/// the label map live in the shared [`Index`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub pc: Pc,
    pub mem: BTreeMap<Ident, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("machine already halted")]
    Halted,
    #[error("pc {0} does not hold a statement")]
    BadPc(usize),
    #[error("read of unbound variable `{0}`")]
    Unbound(Ident),
    #[error("hole reached at index {0}")]
    Hole(usize),
}

impl Config {
    /// Start state: pc at the first statement, memory from the declarations.
    /// Hole initializers are not allowed here.
    pub fn initial(p: &Program, ix: &Index<'_>) -> Result<Config, StepError> {
        let mut mem = BTreeMap::new();
        for (d, at) in p.decls.iter().zip(&ix.init_addrs) {
            let v = eval(&d.init, &mem, *at)?;
            mem.insert(d.name.clone(), v);
        }
        let pc = ix.stmt_addrs.first().map_or(Pc::Halted, |a| Pc::At(*a));
        Ok(Config { pc, mem })
    }

    pub fn is_halted(&self) -> bool {
        self.pc == Pc::Halted
    }
}

fn eval(e: &Expr, mem: &BTreeMap<Ident, i64>, at: usize) -> Result<i64, StepError> {
    match e {
        Expr::Num(n) => Ok(*n),
        Expr::Var(id) => mem.get(id).copied().ok_or_else(|| StepError::Unbound(id.clone())),
        Expr::Bin(op, l, r) => {
            let lv = eval(l, mem, at + 1)?;
            match op {
                BinOp::And if lv == 0 => Ok(0),
                BinOp::Or if lv != 0 => Ok(1),
                _ => Ok(op.apply(lv, eval(r, mem, at + 1 + l.size())?)),
            }
        }
        Expr::Hole(_) => Err(StepError::Hole(at)),
    }
}

/// Performs one statement-level transition.
pub fn step(ix: &Index<'_>, c: Config) -> Result<Config, StepError> {
    let Pc::At(pc) = c.pc else {
        return Err(StepError::Halted);
    };
    let pos = ix.stmt_position(pc).ok_or(StepError::BadPc(pc))?;
    let Instr::Stmt(s) = ix.instrs[pc] else {
        return Err(StepError::BadPc(pc));
    };
    let next = ix.stmt_addrs.get(pos + 1).map_or(Pc::Halted, |a| Pc::At(*a));
    let jump = |l: &Ident| ix.labels.get(l).map(|a| Pc::At(*a)).ok_or(StepError::BadPc(pc));
    let Config { mut mem, .. } = c;
    let pc = match &s.stmt {
        Stmt::Assign(id, e) => {
            let v = eval(e, &mem, pc + 1)?;
            mem.insert(id.clone(), v);
            next
        }
        Stmt::If(e, l) => {
            if eval(e, &mem, pc + 1)? != 0 {
                jump(l)?
            } else {
                next
            }
        }
        Stmt::Goto(l) => jump(l)?,
        Stmt::Halt => Pc::Halted,
    };
    Ok(Config { pc, mem })
}

/// Steps until halt, at most `budget` transitions. Returns `None` when the
/// budget runs out first.
pub fn run_to_halt(ix: &Index<'_>, mut c: Config, budget: u64) -> Result<Option<Config>, StepError> {
    for _ in 0..budget {
        if c.is_halted() {
            return Ok(Some(c));
        }
        c = step(ix, c)?;
    }
    Ok(c.is_halted().then_some(c))
}
