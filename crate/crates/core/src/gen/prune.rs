//! Eager pruning: a sound check for conditions that can never hold, and the
//! working-copy rewrite that neutralizes code guarded by them.
//!
//! Arithmetic wraps, so `+` and `-` form the ring of integers modulo 2^64.
//! Each integer-valued subterm is normalized to a linear form over that
//! ring. Equality is decided exactly when the difference of two forms is
//! constant. Signed `<` does not respect the ring structure (`x + 1 < x`
//! holds at the maximum), so it is decided only for two constants or two
//! identical forms.

use super::HoleFillMap;
use crate::exec::RStmt;
use crate::lang::{BinOp, Expr, HoleAddr, Stmt};
use crate::template::{Executor, Template};
use std::collections::BTreeMap;

/// Three-valued truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn and(self, o: Truth) -> Truth {
        match (self, o) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    fn or(self, o: Truth) -> Truth {
        self.not().and(o.not()).not()
    }
}

/// Outcome of [`is_definitely_false`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Falsity {
    DefinitelyFalse,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Var(String),
    /// A non-arithmetic subterm, keyed by its printed form. Expressions are
    /// pure, so equal text means equal value.
    Opaque(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Linear {
    constant: u64,
    terms: BTreeMap<Atom, u64>,
}

impl Linear {
    fn constant(c: u64) -> Linear {
        Linear { constant: c, terms: BTreeMap::new() }
    }

    fn atom(a: Atom) -> Linear {
        Linear { constant: 0, terms: BTreeMap::from([(a, 1)]) }
    }

    fn combine(mut self, other: Linear, sign: u64) -> Linear {
        self.constant = self.constant.wrapping_add(other.constant.wrapping_mul(sign));
        for (a, c) in other.terms {
            let slot = self.terms.entry(a).or_insert(0);
            *slot = slot.wrapping_add(c.wrapping_mul(sign));
        }
        self.terms.retain(|_, c| *c != 0);
        self
    }

    fn as_constant(&self) -> Option<u64> {
        self.terms.is_empty().then_some(self.constant)
    }
}

fn linearize(e: &Expr) -> Linear {
    match e {
        Expr::Num(n) => Linear::constant(*n as u64),
        Expr::Var(id) => Linear::atom(Atom::Var(id.to_string())),
        Expr::Bin(BinOp::Add, l, r) => linearize(l).combine(linearize(r), 1),
        Expr::Bin(BinOp::Sub, l, r) => linearize(l).combine(linearize(r), u64::MAX),
        _ => match truth(e) {
            Truth::True => Linear::constant(1),
            Truth::False => Linear::constant(0),
            Truth::Unknown => Linear::atom(Atom::Opaque(e.to_string())),
        },
    }
}

/// Sound three-valued truth of a hole-free expression: `True`/`False` only
/// when every valuation of the variables agrees.
pub fn truth(e: &Expr) -> Truth {
    match e {
        Expr::Bin(BinOp::And, l, r) => truth(l).and(truth(r)),
        Expr::Bin(BinOp::Or, l, r) => truth(l).or(truth(r)),
        Expr::Bin(op @ (BinOp::Eq | BinOp::Ne), l, r) => {
            let diff = linearize(l).combine(linearize(r), u64::MAX);
            let eq = match diff.as_constant() {
                Some(0) => Truth::True,
                Some(_) => Truth::False,
                None => Truth::Unknown,
            };
            if *op == BinOp::Eq {
                eq
            } else {
                eq.not()
            }
        }
        Expr::Bin(BinOp::Lt, l, r) => {
            let (l, r) = (linearize(l), linearize(r));
            if l == r {
                return Truth::False;
            }
            match (l.as_constant(), r.as_constant()) {
                (Some(a), Some(b)) if (a as i64) < (b as i64) => Truth::True,
                (Some(_), Some(_)) => Truth::False,
                _ => Truth::Unknown,
            }
        }
        Expr::Hole(_) => Truth::Unknown,
        _ => match linearize(e).as_constant() {
            Some(0) => Truth::False,
            Some(_) => Truth::True,
            None => Truth::Unknown,
        },
    }
}

pub fn is_definitely_false(e: &Expr) -> Falsity {
    if truth(e) == Truth::False {
        Falsity::DefinitelyFalse
    } else {
        Falsity::Unknown
    }
}

/// Per-run state for [`remove_dead_code`]: the template's `if` conditions
/// and the fill-map size at the last pass.
pub(crate) struct Pruner {
    guards: Vec<Guard>,
    seen_fills: usize,
}

struct Guard {
    pos: usize,
    cond: Expr,
    holes: Vec<HoleAddr>,
    dead: bool,
}

impl Pruner {
    pub fn new(t: &Template) -> Pruner {
        let mut holes_by_stmt: BTreeMap<usize, Vec<HoleAddr>> = BTreeMap::new();
        crate::lang::visit_holes(t.program(), |addr, loc, _| {
            if let crate::lang::SiteLoc::Stmt(i) = loc {
                holes_by_stmt.entry(i).or_default().push(addr);
            }
        });
        let guards = t
            .program()
            .stmts
            .iter()
            .enumerate()
            .filter_map(|(pos, s)| match &s.stmt {
                Stmt::If(cond, _) => Some(Guard {
                    pos,
                    cond: cond.clone(),
                    holes: holes_by_stmt.remove(&pos).unwrap_or_default(),
                    dead: false,
                }),
                _ => None,
            })
            .collect();
        Pruner { guards, seen_fills: usize::MAX }
    }
}

/// Substitutes hole roots, in pre-order, with the next filled expression.
fn substitute(e: &Expr, fills: &mut impl Iterator<Item = Expr>) -> Expr {
    match e {
        Expr::Hole(_) => fills.next().expect("one fill per hole"),
        Expr::Bin(op, l, r) => {
            let l = substitute(l, fills);
            Expr::bin(*op, l, substitute(r, fills))
        }
        other => other.clone(),
    }
}

/// Neutralizes, in the working copy only, every `if` whose filled condition
/// is definitely false, together with statements that become unreachable
/// once those jumps are dropped. Statement positions never change.
pub fn remove_dead_code(ex: &mut Executor<'_>, h: &HoleFillMap) {
    let mut pruner = Pruner::new(ex.template());
    remove_dead_code_with(&mut pruner, ex, h);
}

pub(crate) fn remove_dead_code_with(pruner: &mut Pruner, ex: &mut Executor<'_>, h: &HoleFillMap) {
    if pruner.seen_fills == h.len() {
        return;
    }
    pruner.seen_fills = h.len();
    let mut changed = false;
    for g in pruner.guards.iter_mut().filter(|g| !g.dead) {
        if !g.holes.iter().all(|a| h.contains_key(a)) {
            continue;
        }
        let cond = substitute(&g.cond, &mut g.holes.iter().map(|a| h[a].clone()));
        if is_definitely_false(&cond) == Falsity::DefinitelyFalse {
            g.dead = true;
            changed = true;
        }
    }
    if !changed {
        return;
    }
    let stmts = &ex.template().program().stmts;
    let dead_guard: Vec<bool> = {
        let mut v = vec![false; stmts.len()];
        for g in pruner.guards.iter().filter(|g| g.dead) {
            v[g.pos] = true;
        }
        v
    };
    let label_pos: BTreeMap<_, _> = stmts
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.label.as_ref().map(|l| (l, i)))
        .collect();
    let mut live = vec![false; stmts.len()];
    let mut work = vec![0usize];
    while let Some(pos) = work.pop() {
        if pos >= stmts.len() || live[pos] {
            continue;
        }
        live[pos] = true;
        match &stmts[pos].stmt {
            Stmt::Assign(..) => work.push(pos + 1),
            Stmt::If(_, l) => {
                work.push(pos + 1);
                if !dead_guard[pos] {
                    work.push(label_pos[l]);
                }
            }
            Stmt::Goto(l) => work.push(label_pos[l]),
            Stmt::Halt => {}
        }
    }
    for (pos, q) in ex.q.iter_mut().enumerate() {
        if !live[pos] || dead_guard[pos] {
            *q = RStmt::Nop;
        }
    }
}
