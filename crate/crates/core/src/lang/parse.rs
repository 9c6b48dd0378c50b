//! Recursive-descent parser for `.tj` sources.
//!
//! Expressions use C precedence (`||` < `&&` < `==`,`!=` < `<` < `+`,`-`),
//! all left-associative. Hole forms are calls such as
//! `relation(intId(), intVal(0, 9); <, ==).eval()`; the `.eval()` suffix is
//! required on the outermost call and forbidden on nested ones.

use super::ast::*;
use super::LangError;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 14] = ["||", "&&", "==", "!=", "=", ";", ":", "(", ")", ",", ".", "+", "-", "<"];

pub(crate) const HOLE_FORMS: [&str; 6] = ["intVal", "intId", "arithmetic", "relation", "logic", "alt"];
const KEYWORDS: [&str; 4] = ["var", "if", "goto", "halt"];

fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || HOLE_FORMS.contains(&name)
}

fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| SyntaxError { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: start_line,
                col: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<u64>()
                .map_err(|_| err(start_line, start_col, format!("integer literal `{text}` out of range")))?;
            out.push(Spanned { tok: Tok::Int(n), line: start_line, col: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Spanned { tok: Tok::Sym(sym), line: start_line, col: start_col });
            }
            None => return Err(err(line, col, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(SyntaxError { line: s.line, col: s.col, message: message.into() })
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<()> {
        if self.is_sym(sym) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{sym}`, found {}", self.peek()))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{w}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(Ident::new(&s))
            }
            Tok::Ident(s) => self.error(format!("`{s}` is reserved and cannot be used as a {what}")),
            t => self.error(format!("expected {what}, found {t}")),
        }
    }

    fn int_literal(&mut self) -> PResult<i64> {
        let negative = if self.is_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(n) => {
                let v = if negative {
                    if n > 1u64 << 63 {
                        return self.error("integer literal out of range");
                    }
                    (n as i64).wrapping_neg()
                } else {
                    if n > i64::MAX as u64 {
                        return self.error("integer literal out of range");
                    }
                    n as i64
                };
                self.bump();
                Ok(v)
            }
            t => self.error(format!("expected integer literal, found {t}")),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        while self.is_word("var") {
            self.bump();
            let name = self.ident("variable name")?;
            self.expect_sym("=")?;
            let init = self.expr(false)?;
            self.expect_sym(";")?;
            prog.decls.push(Decl { name, init });
        }
        while *self.peek() != Tok::Eof {
            if self.is_word("var") {
                return self.error("declarations must precede all statements");
            }
            prog.stmts.push(self.labeled_stmt()?);
        }
        if prog.stmts.is_empty() {
            return self.error("a program needs at least one statement");
        }
        Ok(prog)
    }

    fn labeled_stmt(&mut self) -> PResult<LabeledStmt> {
        let label = match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(_), Tok::Sym(":")) => {
                let l = self.ident("label")?;
                self.bump();
                Some(l)
            }
            _ => None,
        };
        let stmt = if self.is_word("if") {
            self.bump();
            self.expect_sym("(")?;
            let cond = self.expr(false)?;
            self.expect_sym(")")?;
            Stmt::If(cond, self.ident("label")?)
        } else if self.is_word("goto") {
            self.bump();
            Stmt::Goto(self.ident("label")?)
        } else if self.is_word("halt") {
            self.bump();
            Stmt::Halt
        } else {
            let target = self.ident("variable name")?;
            self.expect_sym("=")?;
            Stmt::Assign(target, self.expr(false)?)
        };
        self.expect_sym(";")?;
        Ok(LabeledStmt { label, stmt })
    }

    fn at_hole_form(&self) -> bool {
        matches!((self.peek(), self.peek_at(1)), (Tok::Ident(s), Tok::Sym("(")) if HOLE_FORMS.contains(&s.as_str()))
    }

    fn binop(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Sym(s) => BinOp::ALL.into_iter().find(|op| op.symbol() == *s),
            _ => None,
        }
    }

    /// `in_hole` is set while parsing a concrete operand inside a hole form.
    fn expr(&mut self, in_hole: bool) -> PResult<Expr> {
        self.expr_prec(1, in_hole)
    }

    fn expr_prec(&mut self, min_prec: u8, in_hole: bool) -> PResult<Expr> {
        let mut lhs = self.operand(in_hole)?;
        while let Some(op) = self.binop() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.expr_prec(op.precedence() + 1, in_hole)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn operand(&mut self, in_hole: bool) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(_) => Ok(Expr::Num(self.int_literal()?)),
            Tok::Sym("-") if matches!(self.peek_at(1), Tok::Int(_)) => Ok(Expr::Num(self.int_literal()?)),
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr(in_hole)?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(_) if self.at_hole_form() => {
                if in_hole {
                    return self.error("hole forms inside a hole must be direct arguments of the enclosing form");
                }
                self.hole_root()
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident("variable name")?)),
            t => self.error(format!("expected expression, found {t}")),
        }
    }

    fn hole_root(&mut self) -> PResult<Expr> {
        let node = self.hole_form()?;
        if !self.is_sym(".") {
            return self.error("the outermost hole form must end with `.eval()`");
        }
        self.bump();
        self.expect_word("eval")?;
        self.expect_sym("(")?;
        self.expect_sym(")")?;
        Ok(Expr::hole(node))
    }

    fn hole_form(&mut self) -> PResult<HoleNode> {
        let name = match self.bump() {
            Tok::Ident(s) => s,
            _ => unreachable!("checked by at_hole_form"),
        };
        self.expect_sym("(")?;
        let node = match name.as_str() {
            "intVal" => {
                if self.is_sym(")") {
                    HoleNode::int_val()
                } else {
                    let min = self.int_literal()?;
                    self.expect_sym(",")?;
                    let max = self.int_literal()?;
                    HoleNode::IntVal { min, max }
                }
            }
            "intId" => {
                let mut names = Vec::new();
                if !self.is_sym(")") {
                    names.push(self.ident("variable name")?);
                    while self.is_sym(",") {
                        self.bump();
                        names.push(self.ident("variable name")?);
                    }
                }
                HoleNode::IntId { names }
            }
            "alt" => {
                let mut cands = vec![self.hole_arg()?];
                while self.is_sym(",") {
                    self.bump();
                    cands.push(self.hole_arg()?);
                }
                HoleNode::Alt(cands)
            }
            other => {
                let class = match other {
                    "arithmetic" => OpClass::Arithmetic,
                    "relation" => OpClass::Relation,
                    _ => OpClass::Logic,
                };
                let left = self.hole_arg()?;
                self.expect_sym(",")?;
                let right = self.hole_arg()?;
                let mut ops = Vec::new();
                if self.is_sym(";") {
                    self.bump();
                    ops.push(self.op_in(class)?);
                    while self.is_sym(",") {
                        self.bump();
                        ops.push(self.op_in(class)?);
                    }
                }
                if ops.is_empty() {
                    ops = class.ops().to_vec();
                }
                HoleNode::Op { class, left: Box::new(left), right: Box::new(right), ops }
            }
        };
        self.expect_sym(")")?;
        Ok(node)
    }

    fn op_in(&mut self, class: OpClass) -> PResult<BinOp> {
        match self.binop() {
            Some(op) if op.class() == class => {
                self.bump();
                Ok(op)
            }
            Some(op) => self.error(format!("operator `{}` is not valid in `{}`", op.symbol(), class.hole_name())),
            None => self.error(format!("expected operator, found {}", self.peek())),
        }
    }

    fn hole_arg(&mut self) -> PResult<HoleNode> {
        if self.at_hole_form() {
            let node = self.hole_form()?;
            if self.is_sym(".") {
                return self.error("`.eval()` is only allowed on the outermost hole form");
            }
            if self.binop().is_some() {
                return self.error("a hole form argument cannot be combined with operators");
            }
            Ok(node)
        } else {
            Ok(HoleNode::Exp(self.expr(true)?))
        }
    }
}

pub(crate) fn parse_syntax(src: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    p.program()
}

/// Parses and validates a `.tj` source. The result may contain holes;
/// see [`Program::has_holes`].
pub fn parse(src: &str) -> Result<Program, LangError> {
    let prog = parse_syntax(src)?;
    super::validate(&prog)?;
    Ok(prog)
}

/// Parses a single expression, as written on the right of an assignment.
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let e = p.expr(false)?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after expression", p.peek()));
    }
    Ok(e)
}
