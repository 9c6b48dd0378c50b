//! Peephole optimizer for the bytecode tier, with optional deliberate bugs.

use super::bytecode::{Bytecode, Op};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fault {
    /// Folds `a < b` as `b < a`.
    FoldLtSwap,
    /// Folds `+` with saturating arithmetic.
    SatAddFold,
    /// Simplifies `x != x` to 1.
    NeqSelfTrue,
}

impl Fault {
    pub const ALL: [Fault; 3] = [Fault::FoldLtSwap, Fault::SatAddFold, Fault::NeqSelfTrue];

    pub fn name(self) -> &'static str {
        match self {
            Fault::FoldLtSwap => "FOLD_LT_SWAP",
            Fault::SatAddFold => "SAT_ADD_FOLD",
            Fault::NeqSelfTrue => "NEQ_SELF_TRUE",
        }
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown fault `{0}`")]
pub struct UnknownFault(pub String);

impl FromStr for Fault {
    type Err = UnknownFault;

    fn from_str(s: &str) -> Result<Fault, UnknownFault> {
        Fault::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s.trim())).ok_or_else(|| UnknownFault(s.to_string()))
    }
}

/// Set of injected faults. Empty in normal use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct FaultSet(u8);

impl FaultSet {
    pub const EMPTY: FaultSet = FaultSet(0);

    pub fn only(f: Fault) -> FaultSet {
        FaultSet(f.bit())
    }

    pub fn insert(&mut self, f: Fault) {
        self.0 |= f.bit();
    }

    pub fn contains(self, f: Fault) -> bool {
        self.0 & f.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Fault> {
        Fault::ALL.into_iter().filter(move |f| self.contains(*f))
    }
}

impl FromIterator<Fault> for FaultSet {
    fn from_iter<I: IntoIterator<Item = Fault>>(it: I) -> FaultSet {
        let mut s = FaultSet::EMPTY;
        for f in it {
            s.insert(f);
        }
        s
    }
}

impl FromStr for FaultSet {
    type Err = UnknownFault;

    /// Comma-separated fault names; the empty string is the empty set.
    fn from_str(s: &str) -> Result<FaultSet, UnknownFault> {
        s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for FaultSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(Fault::name).collect();
        f.write_str(&names.join(","))
    }
}

/// 0 folds constants only; 1 also simplifies algebra, constant guards and
/// unreachable code.
pub type OptLevel = u8;

fn fold(op: Op, a: i64, b: i64, faults: FaultSet) -> Option<i64> {
    Some(match op {
        Op::Add if faults.contains(Fault::SatAddFold) => a.saturating_add(b),
        Op::Add => a.wrapping_add(b),
        Op::Sub => a.wrapping_sub(b),
        Op::CmpLt if faults.contains(Fault::FoldLtSwap) => (b < a) as i64,
        Op::CmpLt => (a < b) as i64,
        Op::CmpEq => (a == b) as i64,
        Op::CmpNe => (a != b) as i64,
        _ => return None,
    })
}

fn jump_targets(code: &[Op]) -> Vec<bool> {
    let mut t = vec![false; code.len() + 1];
    for op in code {
        if let Some(x) = op.target() {
            t[x as usize] = true;
        }
    }
    t
}

/// Drops removed instructions and retargets jumps to the next survivor.
fn compact(code: Vec<Option<Op>>) -> Vec<Op> {
    let mut new_pos = Vec::with_capacity(code.len() + 1);
    let mut n = 0u32;
    for op in &code {
        new_pos.push(n);
        n += op.is_some() as u32;
    }
    new_pos.push(n);
    code.into_iter().flatten().map(|op| match op.target() {
        Some(t) => op.with_target(new_pos[t as usize]),
        None => op,
    }).collect()
}

fn rewrite_pass(b: &mut Bytecode, code: &[Op], faults: FaultSet, level: OptLevel) -> Option<Vec<Option<Op>>> {
    let targets = jump_targets(code);
    let mut out: Vec<Option<Op>> = code.iter().copied().map(Some).collect();
    let mut changed = false;
    let mut i = 0;
    while i < code.len() {
        let free = |k: usize| i + k < code.len() && !targets[i + k];
        if free(1) && free(2) {
            let repl = match (code[i], code[i + 1], code[i + 2]) {
                (Op::Const(a), Op::Const(c), op) => fold(op, b.consts[a as usize], b.consts[c as usize], faults).map(|v| Op::Const(b.constant(v))),
                (Op::Load(x), Op::Const(c), Op::Add | Op::Sub) if level >= 1 && b.consts[c as usize] == 0 => Some(Op::Load(x)),
                (Op::Const(c), Op::Load(x), Op::Add) if level >= 1 && b.consts[c as usize] == 0 => Some(Op::Load(x)),
                (Op::Load(x), Op::Load(y), op) if level >= 1 && x == y => match op {
                    Op::Sub | Op::CmpLt => Some(Op::Const(b.constant(0))),
                    Op::CmpEq => Some(Op::Const(b.constant(1))),
                    Op::CmpNe => Some(Op::Const(b.constant(faults.contains(Fault::NeqSelfTrue) as i64))),
                    _ => None,
                },
                _ => None,
            };
            if let Some(r) = repl {
                out[i] = Some(r);
                out[i + 1] = None;
                out[i + 2] = None;
                changed = true;
                i += 3;
                continue;
            }
        }
        if level >= 1 && free(1) {
            if let (Op::Const(c), Op::JumpIfZero(t) | Op::JumpIfNonZero(t)) = (code[i], code[i + 1]) {
                let taken = (b.consts[c as usize] == 0) == matches!(code[i + 1], Op::JumpIfZero(_));
                out[i] = taken.then_some(Op::Jump(t));
                out[i + 1] = None;
                changed = true;
                i += 2;
                continue;
            }
        }
        if level >= 1 && code[i] == Op::Jump(i as u32 + 1) {
            out[i] = None;
            changed = true;
        }
        i += 1;
    }
    if level >= 1 {
        let mut live = vec![false; code.len()];
        let mut work = vec![0usize];
        while let Some(pc) = work.pop() {
            if pc >= code.len() || live[pc] {
                continue;
            }
            live[pc] = true;
            match code[pc] {
                Op::Jump(t) => work.push(t as usize),
                Op::JumpIfZero(t) | Op::JumpIfNonZero(t) => {
                    work.push(t as usize);
                    work.push(pc + 1);
                }
                Op::Halt | Op::Trap(_) => {}
                _ => work.push(pc + 1),
            }
        }
        for (slot, l) in out.iter_mut().zip(live) {
            if !l && slot.is_some() {
                *slot = None;
                changed = true;
            }
        }
    }
    changed.then_some(out)
}

/// Optimizes the main code segment. With an empty fault set the result
/// behaves exactly like the input.
pub fn optimize(b: &Bytecode, faults: FaultSet, level: OptLevel) -> Bytecode {
    let mut out = b.clone();
    let mut code = b.code.clone();
    while let Some(next) = rewrite_pass(&mut out, &code, faults, level) {
        code = compact(next);
    }
    out.code = code;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::compile_bytecode;
    use crate::lang::parse;

    fn opt(src: &str, faults: FaultSet, level: OptLevel) -> Bytecode {
        optimize(&compile_bytecode(&parse(src).unwrap()), faults, level)
    }

    #[test]
    fn folds_constants() {
        let b = opt("var a = 0; a = 3 + 4; halt;", FaultSet::EMPTY, 0);
        assert_eq!(b.code.len(), 3);
        assert_eq!(b.code[0], Op::Const(b.consts.iter().position(|&c| c == 7).unwrap() as u32));
    }

    #[test]
    fn dead_branch_removed() {
        let b = opt("var a = 0; if (1 < 0) l; a = 1; l: halt;", FaultSet::EMPTY, 1);
        assert!(b.code.iter().all(|op| op.target().is_none()));
        let b = opt("var a = 0; if (0 < 1) l; a = 1; l: halt;", FaultSet::EMPTY, 1);
        assert_eq!(b.code, vec![Op::Halt]);
    }

    #[test]
    fn self_compare() {
        let src = "var x = 0; var y = 0; y = x != x; halt;";
        let good = opt(src, FaultSet::EMPTY, 1);
        assert_eq!(good.consts[match good.code[0] { Op::Const(c) => c as usize, _ => panic!() }], 0);
        let bad = opt(src, FaultSet::only(Fault::NeqSelfTrue), 1);
        assert_eq!(bad.consts[match bad.code[0] { Op::Const(c) => c as usize, _ => panic!() }], 1);
        assert_eq!(opt(src, FaultSet::only(Fault::NeqSelfTrue), 0).code.len(), 5);
    }

    #[test]
    fn jump_target_blocks_fusion() {
        // The join point of `&&` sits between the pushed 0 and the literal 3.
        let b = opt("var a = 1; var b = 1; var y = 0; y = (a && b) < 3; halt;", FaultSet::EMPTY, 1);
        let mut mem = vec![1, 1, 0];
        crate::backends::bytecode::run_code(&b.code, &b.consts, &mut mem, &mut vec![], 100).unwrap();
        assert_eq!(mem[2], 1);
    }

    #[test]
    fn fault_set_parsing() {
        let s: FaultSet = "FOLD_LT_SWAP, neq_self_true".parse().unwrap();
        assert!(s.contains(Fault::FoldLtSwap) && s.contains(Fault::NeqSelfTrue) && !s.contains(Fault::SatAddFold));
        assert_eq!(s.to_string(), "FOLD_LT_SWAP,NEQ_SELF_TRUE");
        assert_eq!("".parse::<FaultSet>().unwrap(), FaultSet::EMPTY);
        assert!("BOGUS".parse::<FaultSet>().is_err());
    }
}
