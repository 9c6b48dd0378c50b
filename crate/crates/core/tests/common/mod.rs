//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's own evaluator, filler or hasher.
#![allow(dead_code)]

use templar::lang::{BinOp, Expr, HoleNode, Ident, Program, Stmt};

/// Evaluates a concrete expression with 64-bit wrapping and short-circuit
/// logic. `env` maps variable names to values.
pub fn eval(e: &Expr, env: &dyn Fn(&str) -> i64) -> i64 {
    match e {
        Expr::Num(n) => *n,
        Expr::Var(v) => env(v.as_str()),
        Expr::Bin(op, l, r) => {
            let a = eval(l, env);
            match op {
                BinOp::And => (a != 0 && eval(r, env) != 0) as i64,
                BinOp::Or => (a != 0 || eval(r, env) != 0) as i64,
                _ => {
                    let b = eval(r, env);
                    match op {
                        BinOp::Add => a.wrapping_add(b),
                        BinOp::Sub => a.wrapping_sub(b),
                        BinOp::Lt => (a < b) as i64,
                        BinOp::Eq => (a == b) as i64,
                        BinOp::Ne => (a != b) as i64,
                        _ => unreachable!(),
                    }
                }
            }
        }
        Expr::Hole(_) => panic!("hole in concrete expression"),
    }
}

/// Number of expressions a hole node can produce, saturating.
pub fn candidate_count(n: &HoleNode, idents: usize) -> u128 {
    match n {
        HoleNode::IntVal { min, max } => (*max as i128 - *min as i128 + 1) as u128,
        HoleNode::IntId { names } => (if names.is_empty() { idents } else { names.len() }) as u128,
        HoleNode::Op { left, right, ops, .. } => {
            (ops.len() as u128).saturating_mul(candidate_count(left, idents)).saturating_mul(candidate_count(right, idents))
        }
        HoleNode::Alt(cs) => cs.iter().map(|c| candidate_count(c, idents)).fold(0u128, u128::saturating_add),
        HoleNode::Exp(_) => 1,
    }
}

/// Every expression the node can produce, as a set of printed forms.
pub fn enumerate(n: &HoleNode, idents: &[Ident]) -> Vec<Expr> {
    match n {
        HoleNode::IntVal { min, max } => (*min..=*max).map(Expr::Num).collect(),
        HoleNode::IntId { names } => {
            let pool = if names.is_empty() { idents } else { names };
            pool.iter().map(|v| Expr::Var(v.clone())).collect()
        }
        HoleNode::Op { left, right, ops, .. } => {
            let ls = enumerate(left, idents);
            let rs = enumerate(right, idents);
            let mut out = Vec::new();
            for op in ops {
                for l in &ls {
                    for r in &rs {
                        out.push(Expr::bin(*op, l.clone(), r.clone()));
                    }
                }
            }
            out
        }
        HoleNode::Alt(cs) => cs.iter().flat_map(|c| enumerate(c, idents)).collect(),
        HoleNode::Exp(e) => vec![e.clone()],
    }
}

/// True if `e` is one of the expressions `n` can produce.
pub fn admits(n: &HoleNode, e: &Expr, idents: &[Ident]) -> bool {
    match (n, e) {
        (HoleNode::IntVal { min, max }, Expr::Num(v)) => min <= v && v <= max,
        (HoleNode::IntId { names }, Expr::Var(v)) => {
            let pool = if names.is_empty() { idents } else { names };
            pool.contains(v)
        }
        (HoleNode::Op { left, right, ops, .. }, Expr::Bin(op, l, r)) => {
            ops.contains(op) && admits(left, l, idents) && admits(right, r, idents)
        }
        (HoleNode::Alt(cs), _) => cs.iter().any(|c| admits(c, e, idents)),
        (HoleNode::Exp(x), _) => x == e,
        _ => false,
    }
}

/// Declared variable names, sorted; the pool for an unrestricted `intId()`.
pub fn sorted_vars(p: &Program) -> Vec<Ident> {
    let mut v: Vec<Ident> = p.decls.iter().map(|d| d.name.clone()).collect();
    v.sort();
    v
}

/// Hole roots of `p` in address order, found by counting nodes: a
/// statement takes one slot, then each node of its expression in
/// pre-order. Initializers come after all statements.
pub fn hole_roots(p: &Program) -> Vec<(u32, HoleNode)> {
    fn walk(e: &Expr, next: &mut u32, out: &mut Vec<(u32, HoleNode)>) {
        let here = *next;
        *next += 1;
        match e {
            Expr::Hole(n) => out.push((here, (**n).clone())),
            Expr::Bin(_, l, r) => {
                walk(l, next, out);
                walk(r, next, out);
            }
            _ => {}
        }
    }
    let mut next = 0u32;
    let mut out = Vec::new();
    for s in &p.stmts {
        next += 1;
        match &s.stmt {
            Stmt::Assign(_, e) | Stmt::If(e, _) => walk(e, &mut next, &mut out),
            _ => {}
        }
    }
    for d in &p.decls {
        walk(&d.init, &mut next, &mut out);
    }
    out
}

pub fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h: u64 = 14695981039346656037;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(1099511628211);
    }
    h
}

/// Straightforward big-step run of a hole-free program for `iters`
/// iterations, returning the memory after each one.
pub fn naive_trace(p: &Program, iters: usize) -> Vec<Vec<i64>> {
    use std::collections::HashMap;
    let names: Vec<&str> = p.decls.iter().map(|d| d.name.as_str()).collect();
    let mut mem: HashMap<String, i64> = HashMap::new();
    for d in &p.decls {
        let v = eval(&d.init, &|n| mem_get(&mem, n));
        mem.insert(d.name.to_string(), v);
    }
    let labels: HashMap<&str, usize> =
        p.stmts.iter().enumerate().filter_map(|(i, s)| s.label.as_ref().map(|l| (l.as_str(), i))).collect();
    let mut out = Vec::new();
    for _ in 0..iters {
        let mut pc = 0;
        let mut fuel = 10_000_000u64;
        while pc < p.stmts.len() {
            fuel = fuel.checked_sub(1).expect("program does not halt");
            match &p.stmts[pc].stmt {
                Stmt::Assign(v, e) => {
                    let x = eval(e, &|n| mem_get(&mem, n));
                    mem.insert(v.to_string(), x);
                    pc += 1;
                }
                Stmt::If(e, l) => {
                    pc = if eval(e, &|n| mem_get(&mem, n)) != 0 { labels[l.as_str()] } else { pc + 1 };
                }
                Stmt::Goto(l) => pc = labels[l.as_str()],
                Stmt::Halt => break,
            }
        }
        out.push(names.iter().map(|n| mem[*n]).collect());
    }
    out
}

fn mem_get(m: &std::collections::HashMap<String, i64>, n: &str) -> i64 {
    *m.get(n).unwrap_or_else(|| panic!("unknown variable {n}"))
}
