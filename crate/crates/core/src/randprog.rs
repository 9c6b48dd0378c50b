//! Random hole-free programs that always terminate.
//!
//! Control flow is restricted to forward jumps plus counted loops of the
//! shape `c = 0; L: ...; c = c + 1; if (c < K) L;`. Loop counters are
//! written only by that scaffolding, so every backward edge is taken a
//! bounded number of times.

use crate::lang::{BinOp, Decl, Expr, Ident, LabeledStmt, Program, Stmt};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Debug)]
pub struct RandConfig {
    pub max_stmts: usize,
    pub max_vars: usize,
    pub max_depth: usize,
    pub max_loops: usize,
    pub max_trip: i64,
}

impl Default for RandConfig {
    fn default() -> Self {
        RandConfig { max_stmts: 30, max_vars: 4, max_depth: 3, max_loops: 2, max_trip: 5 }
    }
}

const EXTREMES: [i64; 6] = [i64::MAX, i64::MIN, i64::MAX - 1, i64::MIN + 1, 1 << 31, -(1 << 31)];

pub fn random_literal(rng: &mut impl Rng) -> i64 {
    match rng.gen_range(0..10) {
        0 => *EXTREMES.choose(rng).unwrap(),
        1 => rng.gen(),
        2 | 3 => rng.gen_range(-1000..=1000),
        _ => rng.gen_range(-3..=3),
    }
}

pub fn random_expr(rng: &mut impl Rng, vars: &[Ident], depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return if !vars.is_empty() && rng.gen_bool(0.6) {
            Expr::Var(vars.choose(rng).unwrap().clone())
        } else {
            Expr::Num(random_literal(rng))
        };
    }
    let op = *BinOp::ALL.choose(rng).unwrap();
    Expr::bin(op, random_expr(rng, vars, depth - 1), random_expr(rng, vars, depth - 1))
}

enum Item {
    Assign(usize, Expr),
    /// Forward conditional jump; the target is picked after layout.
    If(Expr),
    Goto,
    Halt,
    Loop(usize, i64, Vec<Item>),
}

struct Builder<'a, R> {
    rng: &'a mut R,
    cfg: &'a RandConfig,
    vars: usize,
    readable: Vec<Ident>,
    budget: usize,
    loops: usize,
}

impl<R: Rng> Builder<'_, R> {
    fn block(&mut self, nesting: usize) -> Vec<Item> {
        let mut items = Vec::new();
        let want = self.rng.gen_range(1..=self.budget.clamp(1, 8));
        for _ in 0..want {
            if self.budget == 0 {
                break;
            }
            let roll = self.rng.gen_range(0..100);
            let item = if roll < 12 && nesting < 2 && self.loops < self.cfg.max_loops && self.budget >= 4 {
                let counter = self.loops;
                self.loops += 1;
                self.budget -= 3;
                let trip = self.rng.gen_range(1..=self.cfg.max_trip);
                Item::Loop(counter, trip, self.block(nesting + 1))
            } else {
                self.budget -= 1;
                let e = random_expr(self.rng, &self.readable, self.cfg.max_depth);
                match roll {
                    12..=59 => Item::Assign(self.rng.gen_range(0..self.vars), e),
                    60..=84 => Item::If(e),
                    85..=94 => Item::Goto,
                    _ => Item::Halt,
                }
            };
            items.push(item);
        }
        items
    }
}

enum Flat {
    Stmt(Stmt),
    Forward(Option<Expr>),
    /// A loop's closing `if`. Jumping straight to it would skip the counter
    /// increment, so it is never a forward-jump target.
    BackEdge(Stmt),
}

fn flatten(items: Vec<Item>, out: &mut Vec<(Option<Ident>, Flat)>, counters: &[Ident], vars: &[Ident]) {
    for it in items {
        match it {
            Item::Assign(v, e) => out.push((None, Flat::Stmt(Stmt::Assign(vars[v].clone(), e)))),
            Item::If(e) => out.push((None, Flat::Forward(Some(e)))),
            Item::Goto => out.push((None, Flat::Forward(None))),
            Item::Halt => out.push((None, Flat::Stmt(Stmt::Halt))),
            Item::Loop(c, trip, body) => {
                let cv = counters[c].clone();
                let head = Ident::new(&format!("loop{c}"));
                out.push((None, Flat::Stmt(Stmt::Assign(cv.clone(), Expr::Num(0)))));
                let start = out.len();
                flatten(body, out, counters, vars);
                out.push((None, Flat::Stmt(Stmt::Assign(cv.clone(), Expr::bin(BinOp::Add, Expr::Var(cv.clone()), Expr::Num(1))))));
                out.push((None, Flat::BackEdge(Stmt::If(Expr::bin(BinOp::Lt, Expr::Var(cv), Expr::Num(trip)), head.clone()))));
                out[start].0 = Some(head);
            }
        }
    }
}

pub fn random_program(rng: &mut impl Rng, cfg: &RandConfig) -> Program {
    let nvars = rng.gen_range(1..=cfg.max_vars.max(1));
    let vars: Vec<Ident> = (0..nvars).map(|i| Ident::new(&format!("v{i}"))).collect();
    let counters: Vec<Ident> = (0..cfg.max_loops).map(|i| Ident::new(&format!("c{i}"))).collect();
    let mut readable = vars.clone();
    readable.extend(counters.iter().cloned());
    let mut b = Builder { rng, cfg, vars: nvars, readable, budget: cfg.max_stmts.max(1), loops: 0 };
    let mut items = b.block(0);
    while b.budget > 0 && b.rng.gen_bool(0.7) {
        let more = b.block(0);
        items.extend(more);
    }
    let used_loops = b.loops;
    let rng = b.rng;
    let mut flat = Vec::new();
    flatten(items, &mut flat, &counters, &vars);
    let n = flat.len();
    let mut targets = vec![None; n];
    let mut stmts: Vec<LabeledStmt> = Vec::with_capacity(n);
    let allowed: Vec<usize> = (0..n).filter(|&i| !matches!(flat[i].1, Flat::BackEdge(_))).collect();
    for i in 0..n {
        if let Flat::Forward(_) = flat[i].1 {
            let later = &allowed[allowed.partition_point(|&j| j <= i)..];
            targets[i] = later.choose(rng).copied();
        }
    }
    let mut labels: Vec<Option<Ident>> = flat.iter().map(|(l, _)| l.clone()).collect();
    for t in targets.iter().flatten() {
        if labels[*t].is_none() {
            labels[*t] = Some(Ident::new(&format!("l{t}")));
        }
    }
    for (i, (_, f)) in flat.into_iter().enumerate() {
        let stmt = match (f, targets[i]) {
            (Flat::Stmt(s) | Flat::BackEdge(s), _) => s,
            (Flat::Forward(Some(e)), Some(t)) => Stmt::If(e, labels[t].clone().unwrap()),
            (Flat::Forward(None), Some(t)) => Stmt::Goto(labels[t].clone().unwrap()),
            (Flat::Forward(_), None) => Stmt::Halt,
        };
        stmts.push(LabeledStmt { label: labels[i].clone(), stmt });
    }
    let mut decls: Vec<Decl> = vars.iter().map(|v| Decl { name: v.clone(), init: Expr::Num(random_literal(rng)) }).collect();
    decls.extend(counters[..used_loops].iter().map(|c| Decl { name: c.clone(), init: Expr::Num(0) }));
    // Expressions may mention counters of loops that were never built.
    let unused: Vec<Ident> = counters[used_loops..].to_vec();
    let mut p = Program { decls, stmts };
    if !unused.is_empty() {
        let fallback = vars[0].clone();
        for s in &mut p.stmts {
            if let Some(e) = s.stmt.expr_mut() {
                rename(e, &unused, &fallback);
            }
        }
    }
    p
}

fn rename(e: &mut Expr, from: &[Ident], to: &Ident) {
    match e {
        Expr::Var(v) if from.contains(v) => *v = to.clone(),
        Expr::Bin(_, l, r) => {
            rename(l, from, to);
            rename(r, from, to);
        }
        _ => {}
    }
}
