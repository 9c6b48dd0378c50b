//! Turns a concrete program into a template by replacing each statement
//! expression with a hole that admits it.

use crate::lang::{Expr, HoleNode, Ident, LangError, OpClass, Program, Stmt, DEFAULT_INT_MAX, DEFAULT_INT_MIN};
use crate::template::{HoleFillMap, Template};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractionConfig {
    /// Declared variables whose initial values become `intVal()` holes.
    pub input_vars: Vec<Ident>,
    /// Maximum number of nested hole nodes on any path from a hole root.
    /// Deeper subexpressions are kept verbatim. `None` means unbounded.
    pub max_hole_depth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("input variable `{0}` is not declared")]
    UnknownInput(Ident),
    #[error("program already contains holes")]
    HasHoles,
    #[error("maximum hole depth must be at least 1")]
    ZeroDepth,
    #[error("extracted template is invalid: {0}")]
    Invalid(#[from] LangError),
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub template: Template,
    /// The source expression at each hole; filling with these gives back
    /// the source program.
    pub originals: HoleFillMap,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Int,
    Bool,
    Any,
}

fn kind(n: &HoleNode) -> Kind {
    match n {
        HoleNode::IntVal { .. } | HoleNode::IntId { .. } => Kind::Int,
        HoleNode::Op { class: OpClass::Arithmetic, .. } => Kind::Int,
        HoleNode::Op { .. } => Kind::Bool,
        HoleNode::Alt(_) | HoleNode::Exp(_) => Kind::Any,
    }
}

fn convert(e: &Expr, depth: usize, max: usize) -> HoleNode {
    if depth > max {
        return HoleNode::Exp(e.clone());
    }
    match e {
        Expr::Num(n) if (DEFAULT_INT_MIN..=DEFAULT_INT_MAX).contains(n) => HoleNode::int_val(),
        Expr::Num(_) => HoleNode::IntVal { min: i64::MIN, max: i64::MAX },
        Expr::Var(_) => HoleNode::int_id(),
        Expr::Bin(op, l, r) => {
            let class = op.class();
            let want = if class == OpClass::Logic { Kind::Bool } else { Kind::Int };
            let child = |c: &Expr| {
                let n = convert(c, depth + 1, max);
                if kind(&n) == want || kind(&n) == Kind::Any {
                    n
                } else {
                    HoleNode::Exp(c.clone())
                }
            };
            HoleNode::op(class, child(l), child(r))
        }
        Expr::Hole(_) => unreachable!("checked hole-free"),
    }
}

fn root(e: &Expr, max: usize) -> Expr {
    Expr::hole(convert(e, 1, max))
}

pub fn extract_template(p: &Program, cfg: &ExtractionConfig) -> Result<Extraction, ExtractError> {
    if p.has_holes() {
        return Err(ExtractError::HasHoles);
    }
    if let Some(v) = cfg.input_vars.iter().find(|v| !p.decls.iter().any(|d| &d.name == *v)) {
        return Err(ExtractError::UnknownInput(v.clone()));
    }
    let max = cfg.max_hole_depth.unwrap_or(usize::MAX);
    if max == 0 {
        return Err(ExtractError::ZeroDepth);
    }
    let mut out = p.clone();
    let mut originals = Vec::new();
    for s in &mut out.stmts {
        if let Some(e) = s.stmt.expr_mut() {
            originals.push(e.clone());
            *e = root(e, max);
        }
    }
    for d in &mut out.decls {
        if cfg.input_vars.contains(&d.name) {
            originals.push(d.init.clone());
            d.init = root(&d.init, max);
        }
    }
    let template = Template::new(out)?;
    let originals = template.hole_addresses().into_iter().zip(originals).collect();
    Ok(Extraction { template, originals })
}

/// Expression roots of `p` that `extract_template` converts.
pub fn expression_roots(p: &Program) -> usize {
    p.stmts.iter().filter(|s| matches!(s.stmt, Stmt::Assign(..) | Stmt::If(..))).count()
}
