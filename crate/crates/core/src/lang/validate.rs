use super::ast::*;
use std::collections::HashSet;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("variable `{0}` is declared more than once")]
    DuplicateVar(Ident),
    #[error("label `{0}` is defined more than once")]
    DuplicateLabel(Ident),
    #[error("label `{0}` is not defined")]
    UndefinedLabel(Ident),
    #[error("variable `{0}` is not declared")]
    UndeclaredVar(Ident),
    #[error("intVal range is empty: {min} > {max}")]
    EmptyRange { min: i64, max: i64 },
    #[error("`{0}` hole has no operators")]
    NoOperators(&'static str),
    #[error("operator `{op}` is not valid in `{form}`")]
    ForeignOperator { op: &'static str, form: &'static str },
    #[error("`{form}` expects {expected} operands")]
    OperandKind { form: &'static str, expected: &'static str },
    #[error("alt candidates mix integer and boolean holes")]
    MixedAlt,
    #[error("alt needs at least one candidate")]
    EmptyAlt,
    #[error("`.eval()` appears inside another hole")]
    NestedEval,
    #[error("initializer of `{0}` must not read variables")]
    BadInitializer(Ident),
}

/// Value category of a hole node, used to type-check operator holes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Int,
    Bool,
    /// Concrete operands are plain C-style integers and fit anywhere.
    Any,
}

pub fn validate(p: &Program) -> Result<(), ValidationError> {
    let mut vars = HashSet::new();
    for d in &p.decls {
        if !vars.insert(d.name.clone()) {
            return Err(ValidationError::DuplicateVar(d.name.clone()));
        }
    }
    let mut labels = HashSet::new();
    for s in &p.stmts {
        if let Some(l) = &s.label {
            if !labels.insert(l.clone()) {
                return Err(ValidationError::DuplicateLabel(l.clone()));
            }
        }
    }
    for d in &p.decls {
        if d.init.reads_vars() {
            return Err(ValidationError::BadInitializer(d.name.clone()));
        }
        check_expr(&d.init, &vars, false)?;
    }
    for s in &p.stmts {
        match &s.stmt {
            Stmt::Assign(id, e) => {
                if !vars.contains(id) {
                    return Err(ValidationError::UndeclaredVar(id.clone()));
                }
                check_expr(e, &vars, false)?;
            }
            Stmt::If(e, l) => {
                check_expr(e, &vars, false)?;
                if !labels.contains(l) {
                    return Err(ValidationError::UndefinedLabel(l.clone()));
                }
            }
            Stmt::Goto(l) => {
                if !labels.contains(l) {
                    return Err(ValidationError::UndefinedLabel(l.clone()));
                }
            }
            Stmt::Halt => {}
        }
    }
    Ok(())
}

fn check_expr(e: &Expr, vars: &HashSet<Ident>, in_hole: bool) -> Result<(), ValidationError> {
    match e {
        Expr::Num(_) => Ok(()),
        Expr::Var(id) if vars.contains(id) => Ok(()),
        Expr::Var(id) => Err(ValidationError::UndeclaredVar(id.clone())),
        Expr::Bin(_, l, r) => {
            check_expr(l, vars, in_hole)?;
            check_expr(r, vars, in_hole)
        }
        Expr::Hole(_) if in_hole => Err(ValidationError::NestedEval),
        Expr::Hole(node) => check_hole(node, vars).map(|_| ()),
    }
}

fn check_hole(node: &HoleNode, vars: &HashSet<Ident>) -> Result<Kind, ValidationError> {
    match node {
        HoleNode::IntVal { min, max } => {
            if min > max {
                return Err(ValidationError::EmptyRange { min: *min, max: *max });
            }
            Ok(Kind::Int)
        }
        HoleNode::IntId { names } => {
            if let Some(missing) = names.iter().find(|n| !vars.contains(*n)) {
                return Err(ValidationError::UndeclaredVar(missing.clone()));
            }
            Ok(Kind::Int)
        }
        HoleNode::Op { class, left, right, ops } => {
            let form = class.hole_name();
            if ops.is_empty() {
                return Err(ValidationError::NoOperators(form));
            }
            if let Some(op) = ops.iter().find(|op| op.class() != *class) {
                return Err(ValidationError::ForeignOperator { op: op.symbol(), form });
            }
            let (want, expected, result) = match class {
                OpClass::Arithmetic => (Kind::Int, "integer", Kind::Int),
                OpClass::Relation => (Kind::Int, "integer", Kind::Bool),
                OpClass::Logic => (Kind::Bool, "boolean", Kind::Bool),
            };
            for child in [left, right] {
                let k = check_hole(child, vars)?;
                if k != want && k != Kind::Any {
                    return Err(ValidationError::OperandKind { form, expected });
                }
            }
            Ok(result)
        }
        HoleNode::Alt(cands) => {
            if cands.is_empty() {
                return Err(ValidationError::EmptyAlt);
            }
            let mut kind = Kind::Any;
            for c in cands {
                match (kind, check_hole(c, vars)?) {
                    (_, Kind::Any) => {}
                    (Kind::Any, k) => kind = k,
                    (a, b) if a == b => {}
                    _ => return Err(ValidationError::MixedAlt),
                }
            }
            Ok(kind)
        }
        HoleNode::Exp(e) => {
            check_expr(e, vars, true)?;
            Ok(Kind::Any)
        }
    }
}
