use super::ast::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Instruction-memory index of a hole's root node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HoleAddr(pub u32);

impl fmt::Display for HoleAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

/// An entry of instruction memory.
#[derive(Clone, Copy, Debug)]
pub enum Instr<'a> {
    Stmt(&'a LabeledStmt),
    Expr(&'a Expr),
}

/// The instruction memory `I` and label map `L` of a program.
///
/// Statements and their expression nodes are numbered by a pre-order walk
/// starting at 0. Declaration initializers are numbered after the last
/// statement, in declaration order. Hole internals are not numbered; a
/// hole root occupies a single index.
#[derive(Clone, Debug)]
pub struct Index<'a> {
    pub instrs: Vec<Instr<'a>>,
    pub labels: BTreeMap<Ident, usize>,
    /// Index of each statement, in source order.
    pub stmt_addrs: Vec<usize>,
    /// Index of each declaration initializer, in declaration order.
    pub init_addrs: Vec<usize>,
}

impl<'a> Index<'a> {
    /// Position in the statement list of the statement stored at `addr`.
    pub fn stmt_position(&self, addr: usize) -> Option<usize> {
        self.stmt_addrs.binary_search(&addr).ok()
    }
}

pub fn index(p: &Program) -> Index<'_> {
    fn push_expr<'a>(instrs: &mut Vec<Instr<'a>>, e: &'a Expr) {
        instrs.push(Instr::Expr(e));
        if let Expr::Bin(_, l, r) = e {
            push_expr(instrs, l);
            push_expr(instrs, r);
        }
    }
    let mut ix = Index {
        instrs: Vec::new(),
        labels: BTreeMap::new(),
        stmt_addrs: Vec::with_capacity(p.stmts.len()),
        init_addrs: Vec::with_capacity(p.decls.len()),
    };
    for s in &p.stmts {
        let at = ix.instrs.len();
        ix.stmt_addrs.push(at);
        if let Some(l) = &s.label {
            ix.labels.insert(l.clone(), at);
        }
        ix.instrs.push(Instr::Stmt(s));
        if let Some(e) = s.stmt.expr() {
            push_expr(&mut ix.instrs, e);
        }
    }
    for d in &p.decls {
        ix.init_addrs.push(ix.instrs.len());
        push_expr(&mut ix.instrs, &d.init);
    }
    ix
}

/// Where a hole root sits in the program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteLoc {
    /// Inside the expression of statement `n`.
    Stmt(usize),
    /// The initializer of declaration `n`.
    Decl(usize),
}

/// Calls `f` for every hole root in address order.
pub fn visit_holes<'a>(p: &'a Program, mut f: impl FnMut(HoleAddr, SiteLoc, &'a HoleNode)) {
    fn walk<'a>(
        e: &'a Expr,
        next: &mut u32,
        loc: SiteLoc,
        f: &mut impl FnMut(HoleAddr, SiteLoc, &'a HoleNode),
    ) {
        let at = *next;
        *next += 1;
        match e {
            Expr::Hole(node) => f(HoleAddr(at), loc, node),
            Expr::Bin(_, l, r) => {
                walk(l, next, loc, f);
                walk(r, next, loc, f);
            }
            Expr::Num(_) | Expr::Var(_) => {}
        }
    }
    let mut next = 0u32;
    for (i, s) in p.stmts.iter().enumerate() {
        next += 1;
        if let Some(e) = s.stmt.expr() {
            walk(e, &mut next, SiteLoc::Stmt(i), &mut f);
        }
    }
    for (i, d) in p.decls.iter().enumerate() {
        walk(&d.init, &mut next, SiteLoc::Decl(i), &mut f);
    }
}

/// Calls `f` with a mutable reference to every hole root, in address order.
/// Replacing the expression does not disturb the addresses of later holes.
pub fn visit_holes_mut(p: &mut Program, mut f: impl FnMut(HoleAddr, &mut Expr)) {
    fn walk(e: &mut Expr, next: &mut u32, f: &mut impl FnMut(HoleAddr, &mut Expr)) {
        let at = *next;
        *next += 1;
        match e {
            Expr::Hole(_) => f(HoleAddr(at), e),
            Expr::Bin(_, l, r) => {
                walk(l, next, f);
                walk(r, next, f);
            }
            Expr::Num(_) | Expr::Var(_) => {}
        }
    }
    let mut next = 0u32;
    for s in p.stmts.iter_mut() {
        next += 1;
        if let Some(e) = s.stmt.expr_mut() {
            walk(e, &mut next, &mut f);
        }
    }
    for d in p.decls.iter_mut() {
        walk(&mut d.init, &mut next, &mut f);
    }
}

/// Addresses of all hole roots, ascending.
pub fn hole_addresses(p: &Program) -> Vec<HoleAddr> {
    let mut out = Vec::new();
    visit_holes(p, |a, _, _| out.push(a));
    out
}
