use super::stream::ChoiceStream;
use crate::lang::{Expr, HoleNode, Ident};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FillError {
    #[error("intId() has no variables to choose from")]
    NoIdentifiers,
}

/// The variable names visible to `intId()`, sorted so that draws do not
/// depend on how memory happens to be laid out.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Identifiers(Vec<Ident>);

impl Identifiers {
    pub fn new(mut names: Vec<Ident>) -> Identifiers {
        names.sort();
        names.dedup();
        Identifiers(names)
    }

    pub fn as_slice(&self) -> &[Ident] {
        &self.0
    }
}

/// Chooses a concrete expression for a hole.
///
/// Draws happen in pre-order: an operator node draws its operator, then
/// fills the left child, then the right; `alt` draws a candidate, then
/// fills it.
pub fn fill(node: &HoleNode, stream: &mut ChoiceStream, idents: &Identifiers) -> Result<Expr, FillError> {
    Ok(match node {
        HoleNode::IntVal { min, max } => Expr::Num(stream.int_in(*min, *max)),
        HoleNode::IntId { names } => {
            let pool = if names.is_empty() { idents.as_slice() } else { names.as_slice() };
            if pool.is_empty() {
                return Err(FillError::NoIdentifiers);
            }
            Expr::Var(pool[stream.index(pool.len())].clone())
        }
        HoleNode::Op { left, right, ops, .. } => {
            let op = ops[stream.index(ops.len())];
            let l = fill(left, stream, idents)?;
            let r = fill(right, stream, idents)?;
            Expr::bin(op, l, r)
        }
        HoleNode::Alt(cands) => {
            let pick = &cands[stream.index(cands.len())];
            fill(pick, stream, idents)?
        }
        HoleNode::Exp(e) => e.clone(),
    })
}
