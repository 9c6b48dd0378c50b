//! Canonical text form: declarations first, one statement per line,
//! single spaces, minimal parentheses.

use super::ast::*;
use std::fmt::{self, Write};

pub fn print(p: &Program) -> String {
    p.to_string()
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "var {} = {};", d.name, d.init)?;
        }
        for s in &self.stmts {
            writeln!(f, "{s};")?;
        }
        Ok(())
    }
}

impl fmt::Display for LabeledStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.label {
            write!(f, "{l}: ")?;
        }
        write!(f, "{}", self.stmt)
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Assign(id, e) => write!(f, "{id} = {e}"),
            Stmt::If(e, l) => write!(f, "if ({e}) {l}"),
            Stmt::Goto(l) => write!(f, "goto {l}"),
            Stmt::Halt => f.write_str("halt"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self, 0);
        f.write_str(&s)
    }
}

impl fmt::Display for HoleNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_hole(&mut s, self);
        f.write_str(&s)
    }
}

/// `min_prec` is the weakest operator that may appear unparenthesized here.
fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    match e {
        Expr::Num(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Var(id) => out.push_str(id.as_str()),
        Expr::Hole(node) => {
            write_hole(out, node);
            out.push_str(".eval()");
        }
        Expr::Bin(op, l, r) => {
            let p = op.precedence();
            let paren = p < min_prec;
            if paren {
                out.push('(');
            }
            write_expr(out, l, p);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, r, p + 1);
            if paren {
                out.push(')');
            }
        }
    }
}

fn write_hole(out: &mut String, node: &HoleNode) {
    match node {
        HoleNode::IntVal { min, max } => {
            if *min == DEFAULT_INT_MIN && *max == DEFAULT_INT_MAX {
                out.push_str("intVal()");
            } else {
                let _ = write!(out, "intVal({min}, {max})");
            }
        }
        HoleNode::IntId { names } => {
            out.push_str("intId(");
            for (i, n) in names.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(n.as_str());
            }
            out.push(')');
        }
        HoleNode::Op { class, left, right, ops } => {
            out.push_str(class.hole_name());
            out.push('(');
            write_hole(out, left);
            out.push_str(", ");
            write_hole(out, right);
            if ops.as_slice() != class.ops() {
                out.push_str("; ");
                for (i, op) in ops.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(op.symbol());
                }
            }
            out.push(')');
        }
        HoleNode::Alt(cands) => {
            out.push_str("alt(");
            for (i, c) in cands.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_hole(out, c);
            }
            out.push(')');
        }
        HoleNode::Exp(e) => write_expr(out, e, 0),
    }
}
