use crate::exec::{self, RExpr, RStmt, Resolved};
use crate::lang::{BinOp, HoleAddr, Ident, Program};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    /// Push `consts[i]`.
    Const(u32),
    Load(u32),
    Store(u32),
    Add,
    Sub,
    CmpLt,
    CmpEq,
    CmpNe,
    Jump(u32),
    JumpIfZero(u32),
    JumpIfNonZero(u32),
    Halt,
    /// An unfilled hole: executing it is a crash.
    Trap(HoleAddr),
}

impl Op {
    pub fn target(self) -> Option<u32> {
        match self {
            Op::Jump(t) | Op::JumpIfZero(t) | Op::JumpIfNonZero(t) => Some(t),
            _ => None,
        }
    }

    pub(crate) fn with_target(self, t: u32) -> Op {
        match self {
            Op::Jump(_) => Op::Jump(t),
            Op::JumpIfZero(_) => Op::JumpIfZero(t),
            Op::JumpIfNonZero(_) => Op::JumpIfNonZero(t),
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bytecode {
    pub code: Vec<Op>,
    /// Runs once before the first iteration and leaves the initial values
    /// in the variable slots.
    pub init: Vec<Op>,
    pub consts: Vec<i64>,
    /// Slot table: slot `i` holds `names[i]`.
    pub names: Vec<Ident>,
    /// Offset of each source statement in `code`.
    pub stmt_offsets: Vec<u32>,
}

impl Bytecode {
    pub(crate) fn constant(&mut self, v: i64) -> u32 {
        if let Some(i) = self.consts.iter().position(|&c| c == v) {
            return i as u32;
        }
        self.consts.push(v);
        (self.consts.len() - 1) as u32
    }
}

struct Lower<'a> {
    bc: Bytecode,
    resolved: &'a Resolved,
    pool: HashMap<i64, u32>,
}

impl Lower<'_> {
    fn constant(&mut self, v: i64) -> u32 {
        if let Some(&i) = self.pool.get(&v) {
            return i;
        }
        let i = self.bc.consts.len() as u32;
        self.bc.consts.push(v);
        self.pool.insert(v, i);
        i
    }

    fn expr(&mut self, e: &RExpr, out: &mut Vec<Op>) {
        match e {
            RExpr::Num(n) => {
                let c = self.constant(*n);
                out.push(Op::Const(c));
            }
            RExpr::Var(s) => out.push(Op::Load(*s)),
            RExpr::Hole(site) => out.push(Op::Trap(self.resolved.sites[*site as usize].addr)),
            RExpr::Bin(op @ (BinOp::And | BinOp::Or), l, r) => {
                // Both operands jump to `short` on the deciding value.
                let deciding = |t| if *op == BinOp::And { Op::JumpIfZero(t) } else { Op::JumpIfNonZero(t) };
                let (short_val, long_val) = if *op == BinOp::And { (0, 1) } else { (1, 0) };
                self.expr(l, out);
                let j1 = out.len();
                out.push(deciding(0));
                self.expr(r, out);
                let j2 = out.len();
                out.push(deciding(0));
                let c = self.constant(long_val);
                out.push(Op::Const(c));
                let jend = out.len();
                out.push(Op::Jump(0));
                let short = out.len() as u32;
                let c = self.constant(short_val);
                out.push(Op::Const(c));
                let end = out.len() as u32;
                out[j1] = out[j1].with_target(short);
                out[j2] = out[j2].with_target(short);
                out[jend] = Op::Jump(end);
            }
            RExpr::Bin(op, l, r) => {
                self.expr(l, out);
                self.expr(r, out);
                out.push(match op {
                    BinOp::Add => Op::Add,
                    BinOp::Sub => Op::Sub,
                    BinOp::Lt => Op::CmpLt,
                    BinOp::Eq => Op::CmpEq,
                    BinOp::Ne => Op::CmpNe,
                    BinOp::And | BinOp::Or => unreachable!(),
                });
            }
        }
    }
}

/// Lowers a program to stack bytecode. Holes become traps.
pub fn compile_bytecode(p: &Program) -> Bytecode {
    compile_resolved(&exec::resolve(p))
}

pub(crate) fn compile_resolved(r: &Resolved) -> Bytecode {
    let bc = Bytecode { code: vec![], init: vec![], consts: vec![], names: r.names.clone(), stmt_offsets: vec![] };
    let mut lw = Lower { bc, resolved: r, pool: HashMap::new() };
    let mut init = Vec::new();
    for (slot, e) in r.inits.iter().enumerate() {
        lw.expr(e, &mut init);
        init.push(Op::Store(slot as u32));
    }
    init.push(Op::Halt);
    let mut code = Vec::new();
    let mut patches = Vec::new();
    let mut offsets = Vec::with_capacity(r.stmts.len());
    for s in &r.stmts {
        offsets.push(code.len() as u32);
        match s {
            RStmt::Assign(slot, e) => {
                lw.expr(e, &mut code);
                code.push(Op::Store(*slot));
            }
            RStmt::If(e, target) => {
                lw.expr(e, &mut code);
                patches.push((code.len(), *target));
                code.push(Op::JumpIfNonZero(0));
            }
            RStmt::Goto(target) => {
                patches.push((code.len(), *target));
                code.push(Op::Jump(0));
            }
            RStmt::Halt => code.push(Op::Halt),
            RStmt::Nop => {}
        }
    }
    for (at, stmt) in patches {
        code[at] = code[at].with_target(offsets[stmt as usize]);
    }
    if !matches!(r.stmts.last(), Some(RStmt::Halt | RStmt::Goto(_))) {
        code.push(Op::Halt);
    }
    let mut bc = lw.bc;
    bc.code = code;
    bc.init = init;
    bc.stmt_offsets = offsets;
    bc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Abort {
    Budget,
    Hole(HoleAddr),
}

/// Runs `code` from offset 0 until `Halt` or the end of the code.
pub(crate) fn run_code(code: &[Op], consts: &[i64], mem: &mut [i64], stack: &mut Vec<i64>, budget: u64) -> Result<(), Abort> {
    stack.clear();
    let mut pc = 0usize;
    let mut steps = 0u64;
    macro_rules! pop {
        () => {
            stack.pop().expect("stack underflow")
        };
    }
    while pc < code.len() {
        if steps == budget {
            return Err(Abort::Budget);
        }
        steps += 1;
        let op = code[pc];
        pc += 1;
        match op {
            Op::Const(i) => stack.push(consts[i as usize]),
            Op::Load(s) => stack.push(mem[s as usize]),
            Op::Store(s) => mem[s as usize] = pop!(),
            Op::Add | Op::Sub | Op::CmpLt | Op::CmpEq | Op::CmpNe => {
                let r = pop!();
                let l = pop!();
                stack.push(match op {
                    Op::Add => l.wrapping_add(r),
                    Op::Sub => l.wrapping_sub(r),
                    Op::CmpLt => (l < r) as i64,
                    Op::CmpEq => (l == r) as i64,
                    _ => (l != r) as i64,
                });
            }
            Op::Jump(t) => pc = t as usize,
            Op::JumpIfZero(t) => {
                if pop!() == 0 {
                    pc = t as usize;
                }
            }
            Op::JumpIfNonZero(t) => {
                if pop!() != 0 {
                    pc = t as usize;
                }
            }
            Op::Halt => break,
            Op::Trap(a) => return Err(Abort::Hole(a)),
        }
    }
    Ok(())
}
