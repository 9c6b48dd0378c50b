use std::fmt;
use std::sync::Arc;

/// An identifier naming a variable or a label.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(name: &str) -> Self {
        Ident(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Or,
    And,
    Eq,
    Ne,
    Lt,
}

/// Which family of operators a binary node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpClass {
    Arithmetic,
    Relation,
    Logic,
}

impl BinOp {
    pub const ALL: [BinOp; 7] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Or,
        BinOp::And,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
        }
    }

    pub fn class(self) -> OpClass {
        match self {
            BinOp::Add | BinOp::Sub => OpClass::Arithmetic,
            BinOp::Eq | BinOp::Ne | BinOp::Lt => OpClass::Relation,
            BinOp::And | BinOp::Or => OpClass::Logic,
        }
    }

    /// C binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt => 4,
            BinOp::Add | BinOp::Sub => 5,
        }
    }

    /// Applies the operator with wrapping 64-bit semantics. Does not
    /// short-circuit; callers that need that evaluate the left side first.
    pub fn apply(self, l: i64, r: i64) -> i64 {
        match self {
            BinOp::Add => l.wrapping_add(r),
            BinOp::Sub => l.wrapping_sub(r),
            BinOp::Or => ((l != 0) || (r != 0)) as i64,
            BinOp::And => ((l != 0) && (r != 0)) as i64,
            BinOp::Eq => (l == r) as i64,
            BinOp::Ne => (l != r) as i64,
            BinOp::Lt => (l < r) as i64,
        }
    }
}

impl OpClass {
    /// Every operator of the class, in canonical order.
    pub fn ops(self) -> &'static [BinOp] {
        match self {
            OpClass::Arithmetic => &[BinOp::Add, BinOp::Sub],
            OpClass::Relation => &[BinOp::Lt, BinOp::Eq, BinOp::Ne],
            OpClass::Logic => &[BinOp::And, BinOp::Or],
        }
    }

    pub fn hole_name(self) -> &'static str {
        match self {
            OpClass::Arithmetic => "arithmetic",
            OpClass::Relation => "relation",
            OpClass::Logic => "logic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(i64),
    Var(Ident),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// The root of a hole, written with a trailing `.eval()`.
    Hole(Box<HoleNode>),
}

impl Expr {
    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(Ident::new(name))
    }

    pub fn hole(node: HoleNode) -> Expr {
        Expr::Hole(Box::new(node))
    }

    pub fn has_holes(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Bin(_, l, r) => l.has_holes() || r.has_holes(),
            Expr::Hole(_) => true,
        }
    }

    /// Number of nodes in the tree; a hole root counts as one node.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Hole(_) => 1,
            Expr::Bin(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Evaluates a hole-free expression against a lookup function.
    pub fn eval_with<F>(&self, lookup: &F) -> Option<i64>
    where
        F: Fn(&Ident) -> Option<i64>,
    {
        match self {
            Expr::Num(n) => Some(*n),
            Expr::Var(id) => lookup(id),
            Expr::Bin(op, l, r) => {
                let lv = l.eval_with(lookup)?;
                match op {
                    BinOp::And if lv == 0 => Some(0),
                    BinOp::Or if lv != 0 => Some(1),
                    _ => Some(op.apply(lv, r.eval_with(lookup)?)),
                }
            }
            Expr::Hole(_) => None,
        }
    }
}

/// A node of an extended AST: a hole or one of its sub-nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HoleNode {
    IntVal { min: i64, max: i64 },
    IntId { names: Vec<Ident> },
    Op { class: OpClass, left: Box<HoleNode>, right: Box<HoleNode>, ops: Vec<BinOp> },
    Alt(Vec<HoleNode>),
    /// A concrete operand embedded in a hole.
    Exp(Expr),
}

pub const DEFAULT_INT_MIN: i64 = i32::MIN as i64;
pub const DEFAULT_INT_MAX: i64 = i32::MAX as i64;

impl HoleNode {
    pub fn int_val() -> HoleNode {
        HoleNode::IntVal { min: DEFAULT_INT_MIN, max: DEFAULT_INT_MAX }
    }

    pub fn int_id() -> HoleNode {
        HoleNode::IntId { names: Vec::new() }
    }

    /// Operator node with every operator of its class.
    pub fn op(class: OpClass, left: HoleNode, right: HoleNode) -> HoleNode {
        HoleNode::Op {
            class,
            left: Box::new(left),
            right: Box::new(right),
            ops: class.ops().to_vec(),
        }
    }

    pub fn arithmetic(left: HoleNode, right: HoleNode) -> HoleNode {
        HoleNode::op(OpClass::Arithmetic, left, right)
    }

    pub fn relation(left: HoleNode, right: HoleNode) -> HoleNode {
        HoleNode::op(OpClass::Relation, left, right)
    }

    pub fn logic(left: HoleNode, right: HoleNode) -> HoleNode {
        HoleNode::op(OpClass::Logic, left, right)
    }

    pub fn with_ops(self, new_ops: &[BinOp]) -> HoleNode {
        match self {
            HoleNode::Op { class, left, right, .. } => {
                HoleNode::Op { class, left, right, ops: new_ops.to_vec() }
            }
            other => other,
        }
    }

    /// True if the node (transitively) draws from the variable set.
    pub fn uses_identifiers(&self) -> bool {
        match self {
            HoleNode::IntVal { .. } => false,
            HoleNode::IntId { .. } => true,
            HoleNode::Op { left, right, .. } => left.uses_identifiers() || right.uses_identifiers(),
            HoleNode::Alt(c) => c.iter().any(HoleNode::uses_identifiers),
            HoleNode::Exp(e) => expr_mentions_vars(e),
        }
    }
}

fn expr_mentions_vars(e: &Expr) -> bool {
    match e {
        Expr::Num(_) | Expr::Hole(_) => false,
        Expr::Var(_) => true,
        Expr::Bin(_, l, r) => expr_mentions_vars(l) || expr_mentions_vars(r),
    }
}

impl Expr {
    /// True if evaluating the expression (or filling its holes) can read
    /// a variable.
    pub fn reads_vars(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(_) => true,
            Expr::Bin(_, l, r) => l.reads_vars() || r.reads_vars(),
            Expr::Hole(node) => node.uses_identifiers(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decl {
    pub name: Ident,
    /// A constant expression: it may contain holes but reads no variables.
    pub init: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Assign(Ident, Expr),
    If(Expr, Ident),
    Goto(Ident),
    Halt,
}

impl Stmt {
    pub fn expr(&self) -> Option<&Expr> {
        match self {
            Stmt::Assign(_, e) | Stmt::If(e, _) => Some(e),
            Stmt::Goto(_) | Stmt::Halt => None,
        }
    }

    pub fn expr_mut(&mut self) -> Option<&mut Expr> {
        match self {
            Stmt::Assign(_, e) | Stmt::If(e, _) => Some(e),
            Stmt::Goto(_) | Stmt::Halt => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledStmt {
    pub label: Option<Ident>,
    pub stmt: Stmt,
}

impl LabeledStmt {
    pub fn new(stmt: Stmt) -> Self {
        LabeledStmt { label: None, stmt }
    }

    pub fn labeled(label: &str, stmt: Stmt) -> Self {
        LabeledStmt { label: Some(Ident::new(label)), stmt }
    }
}

/// A core-language program. Expressions may contain holes; a program
/// without any is concrete, otherwise it is a template.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub stmts: Vec<LabeledStmt>,
}

impl Program {
    pub fn has_holes(&self) -> bool {
        self.decls.iter().any(|d| d.init.has_holes())
            || self.stmts.iter().any(|s| s.stmt.expr().is_some_and(Expr::has_holes))
    }

    pub fn var_names(&self) -> Vec<Ident> {
        self.decls.iter().map(|d| d.name.clone()).collect()
    }

    /// Declared initial values; initializers that contain holes read as zero.
    pub fn initial_values(&self) -> Vec<i64> {
        self.decls.iter().map(|d| d.init.eval_with(&|_| None).unwrap_or(0)).collect()
    }
}
