//! Hash-consed symbolic expressions over fixed-width bitvectors and booleans.
//!
//! Every distinct tree is interned exactly once per pool, so structural
//! equality and hashing of `ExprRef` are O(1). Widths are 1..=64 bits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub type ExprRef = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    Bv(u8),
}

impl Sort {
    pub fn width(&self) -> u8 {
        match self {
            Sort::Bool => 1,
            Sort::Bv(w) => *w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BvBin {
    Add,
    Sub,
    Mul,
    UDiv,
    URem,
    SDiv,
    SRem,
    And,
    Or,
    Xor,
    Shl,
    LShr,
    AShr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ult,
    Ule,
    Slt,
    Sle,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Var { name: String, width: u8 },
    Const { value: u64, width: u8 },
    /// Size in bytes of the object a pointer-like reference designates.
    /// Solved as a fresh 64-bit variable unless a binding conjunct pins it.
    ObjSize { key: String },
    BvBin(BvBin, ExprRef, ExprRef),
    BvNot(ExprRef),
    BvNeg(ExprRef),
    ZExt(ExprRef, u8),
    SExt(ExprRef, u8),
    Extract(ExprRef, u8, u8),
    Concat(ExprRef, ExprRef),
    Ite(ExprRef, ExprRef, ExprRef),
    BoolConst(bool),
    BoolNot(ExprRef),
    BoolAnd(ExprRef, ExprRef),
    BoolOr(ExprRef, ExprRef),
    Cmp(CmpOp, ExprRef, ExprRef),
}

#[derive(Default, Clone)]
pub struct ExprPool {
    nodes: Vec<Node>,
    sorts: Vec<Sort>,
    dedup: HashMap<Node, ExprRef>,
}

impl ExprPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, e: ExprRef) -> &Node {
        &self.nodes[e as usize]
    }

    pub fn sort(&self, e: ExprRef) -> Sort {
        self.sorts[e as usize]
    }

    pub fn width(&self, e: ExprRef) -> u8 {
        self.sort(e).width()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn intern(&mut self, node: Node, sort: Sort) -> ExprRef {
        if let Some(&r) = self.dedup.get(&node) {
            return r;
        }
        let r = self.nodes.len() as ExprRef;
        self.nodes.push(node.clone());
        self.sorts.push(sort);
        self.dedup.insert(node, r);
        r
    }

    pub fn var(&mut self, name: &str, width: u8) -> ExprRef {
        assert!((1..=64).contains(&width), "variable width out of range");
        self.intern(Node::Var { name: name.to_string(), width }, Sort::Bv(width))
    }

    pub fn constant(&mut self, value: u64, width: u8) -> ExprRef {
        assert!((1..=64).contains(&width));
        let value = if width == 64 { value } else { value & ((1u64 << width) - 1) };
        self.intern(Node::Const { value, width }, Sort::Bv(width))
    }

    pub fn objsize(&mut self, key: &str) -> ExprRef {
        self.intern(Node::ObjSize { key: key.to_string() }, Sort::Bv(64))
    }

    pub fn bool_const(&mut self, b: bool) -> ExprRef {
        self.intern(Node::BoolConst(b), Sort::Bool)
    }

    pub fn bv_bin(&mut self, op: BvBin, a: ExprRef, b: ExprRef) -> ExprRef {
        let (wa, wb) = (self.width(a), self.width(b));
        assert_eq!(wa, wb, "width mismatch in {op:?}: {wa} vs {wb}");
        assert!(matches!(self.sort(a), Sort::Bv(_)) && matches!(self.sort(b), Sort::Bv(_)));
        self.intern(Node::BvBin(op, a, b), Sort::Bv(wa))
    }

    pub fn bv_not(&mut self, a: ExprRef) -> ExprRef {
        let w = self.width(a);
        self.intern(Node::BvNot(a), Sort::Bv(w))
    }

    pub fn bv_neg(&mut self, a: ExprRef) -> ExprRef {
        let w = self.width(a);
        self.intern(Node::BvNeg(a), Sort::Bv(w))
    }

    pub fn zext(&mut self, a: ExprRef, to: u8) -> ExprRef {
        let w = self.width(a);
        assert!(to >= w && to <= 64);
        if to == w {
            return a;
        }
        self.intern(Node::ZExt(a, to), Sort::Bv(to))
    }

    pub fn sext(&mut self, a: ExprRef, to: u8) -> ExprRef {
        let w = self.width(a);
        assert!(to >= w && to <= 64);
        if to == w {
            return a;
        }
        self.intern(Node::SExt(a, to), Sort::Bv(to))
    }

    /// Bits hi..=lo (LSB numbering), result width hi-lo+1.
    pub fn extract(&mut self, a: ExprRef, hi: u8, lo: u8) -> ExprRef {
        let w = self.width(a);
        assert!(hi >= lo && hi < w);
        if lo == 0 && hi == w - 1 {
            return a;
        }
        self.intern(Node::Extract(a, hi, lo), Sort::Bv(hi - lo + 1))
    }

    /// `a` supplies the high bits, `b` the low bits (SMT-LIB order).
    pub fn concat(&mut self, a: ExprRef, b: ExprRef) -> ExprRef {
        let w = self.width(a) + self.width(b);
        assert!(w <= 64, "concat result exceeds 64 bits");
        self.intern(Node::Concat(a, b), Sort::Bv(w))
    }

    pub fn ite(&mut self, c: ExprRef, a: ExprRef, b: ExprRef) -> ExprRef {
        assert_eq!(self.sort(c), Sort::Bool);
        assert_eq!(self.sort(a), self.sort(b));
        let s = self.sort(a);
        self.intern(Node::Ite(c, a, b), s)
    }

    pub fn bool_not(&mut self, a: ExprRef) -> ExprRef {
        assert_eq!(self.sort(a), Sort::Bool);
        if let Node::BoolNot(inner) = self.node(a) {
            return *inner;
        }
        self.intern(Node::BoolNot(a), Sort::Bool)
    }

    pub fn bool_and(&mut self, a: ExprRef, b: ExprRef) -> ExprRef {
        self.intern(Node::BoolAnd(a, b), Sort::Bool)
    }

    pub fn bool_or(&mut self, a: ExprRef, b: ExprRef) -> ExprRef {
        self.intern(Node::BoolOr(a, b), Sort::Bool)
    }

    pub fn cmp(&mut self, op: CmpOp, a: ExprRef, b: ExprRef) -> ExprRef {
        assert_eq!(self.sort(a), self.sort(b), "comparison sorts differ");
        self.intern(Node::Cmp(op, a, b), Sort::Bool)
    }

    pub fn eq(&mut self, a: ExprRef, b: ExprRef) -> ExprRef {
        self.cmp(CmpOp::Eq, a, b)
    }

    pub fn ne(&mut self, a: ExprRef, b: ExprRef) -> ExprRef {
        let e = self.eq(a, b);
        self.bool_not(e)
    }

    /// Free variables (name, width), including objsize pseudo-variables
    /// under the `objsize!` prefix. Sorted by name.
    pub fn free_vars(&self, roots: &[ExprRef]) -> Vec<(String, u8)> {
        let mut seen = std::collections::BTreeMap::new();
        let mut stack: Vec<ExprRef> = roots.to_vec();
        let mut visited = vec![false; self.nodes.len()];
        while let Some(e) = stack.pop() {
            if visited[e as usize] {
                continue;
            }
            visited[e as usize] = true;
            match self.node(e) {
                Node::Var { name, width } => {
                    seen.insert(name.clone(), *width);
                }
                Node::ObjSize { key } => {
                    seen.insert(format!("objsize!{key}"), 64);
                }
                n => for_each_child(n, |c| stack.push(c)),
            }
        }
        seen.into_iter().collect()
    }

    /// Capture-free simultaneous substitution of variables (and objsize
    /// keys addressed as `objsize!<key>`) by expressions. Replacement widths
    /// are reconciled by zero-extension or truncation; non-bitvector
    /// replacements for bitvector variables are an error.
    pub fn substitute(
        &mut self,
        e: ExprRef,
        map: &HashMap<String, ExprRef>,
    ) -> Result<ExprRef, String> {
        let mut memo: HashMap<ExprRef, ExprRef> = HashMap::new();
        self.subst_rec(e, map, &mut memo)
    }

    fn reconcile(&mut self, repl: ExprRef, want: u8, name: &str) -> Result<ExprRef, String> {
        match self.sort(repl) {
            Sort::Bool => Err(format!("cannot substitute boolean expression for bitvector `{name}`")),
            Sort::Bv(w) if w == want => Ok(repl),
            Sort::Bv(w) if w < want => Ok(self.zext(repl, want)),
            Sort::Bv(_) => Ok(self.extract(repl, want - 1, 0)),
        }
    }

    fn subst_rec(
        &mut self,
        e: ExprRef,
        map: &HashMap<String, ExprRef>,
        memo: &mut HashMap<ExprRef, ExprRef>,
    ) -> Result<ExprRef, String> {
        if let Some(&r) = memo.get(&e) {
            return Ok(r);
        }
        let node = self.node(e).clone();
        let out = match node {
            Node::Var { ref name, width } => match map.get(name) {
                Some(&repl) => self.reconcile(repl, width, name)?,
                None => e,
            },
            Node::ObjSize { ref key } => match map.get(&format!("objsize!{key}")) {
                Some(&repl) => self.reconcile(repl, 64, key)?,
                None => e,
            },
            Node::Const { .. } | Node::BoolConst(_) => e,
            Node::BvBin(op, a, b) => {
                let (a, b) = (self.subst_rec(a, map, memo)?, self.subst_rec(b, map, memo)?);
                self.bv_bin(op, a, b)
            }
            Node::BvNot(a) => {
                let a = self.subst_rec(a, map, memo)?;
                self.bv_not(a)
            }
            Node::BvNeg(a) => {
                let a = self.subst_rec(a, map, memo)?;
                self.bv_neg(a)
            }
            Node::ZExt(a, to) => {
                let a = self.subst_rec(a, map, memo)?;
                self.zext(a, to)
            }
            Node::SExt(a, to) => {
                let a = self.subst_rec(a, map, memo)?;
                self.sext(a, to)
            }
            Node::Extract(a, hi, lo) => {
                let a = self.subst_rec(a, map, memo)?;
                self.extract(a, hi, lo)
            }
            Node::Concat(a, b) => {
                let (a, b) = (self.subst_rec(a, map, memo)?, self.subst_rec(b, map, memo)?);
                self.concat(a, b)
            }
            Node::Ite(c, a, b) => {
                let c = self.subst_rec(c, map, memo)?;
                let (a, b) = (self.subst_rec(a, map, memo)?, self.subst_rec(b, map, memo)?);
                self.ite(c, a, b)
            }
            Node::BoolNot(a) => {
                let a = self.subst_rec(a, map, memo)?;
                self.bool_not(a)
            }
            Node::BoolAnd(a, b) => {
                let (a, b) = (self.subst_rec(a, map, memo)?, self.subst_rec(b, map, memo)?);
                self.bool_and(a, b)
            }
            Node::BoolOr(a, b) => {
                let (a, b) = (self.subst_rec(a, map, memo)?, self.subst_rec(b, map, memo)?);
                self.bool_or(a, b)
            }
            Node::Cmp(op, a, b) => {
                let (a, b) = (self.subst_rec(a, map, memo)?, self.subst_rec(b, map, memo)?);
                self.cmp(op, a, b)
            }
        };
        memo.insert(e, out);
        Ok(out)
    }
}

pub fn for_each_child(n: &Node, mut f: impl FnMut(ExprRef)) {
    match n {
        Node::Var { .. } | Node::Const { .. } | Node::ObjSize { .. } | Node::BoolConst(_) => {}
        Node::BvBin(_, a, b)
        | Node::Concat(a, b)
        | Node::BoolAnd(a, b)
        | Node::BoolOr(a, b)
        | Node::Cmp(_, a, b) => {
            f(*a);
            f(*b);
        }
        Node::BvNot(a) | Node::BvNeg(a) | Node::ZExt(a, _) | Node::SExt(a, _) | Node::Extract(a, _, _) | Node::BoolNot(a) => {
            f(*a)
        }
        Node::Ite(c, a, b) => {
            f(*c);
            f(*a);
            f(*b);
        }
    }
}

/// Evaluated value of an expression under a variable assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Val {
    Bool(bool),
    Bv(u64, u8),
}

impl Val {
    pub fn as_u64(&self) -> u64 {
        match self {
            Val::Bool(b) => *b as u64,
            Val::Bv(v, _) => *v,
        }
    }
    pub fn as_bool(&self) -> bool {
        match self {
            Val::Bool(b) => *b,
            Val::Bv(v, _) => *v != 0,
        }
    }
}

fn mask(w: u8) -> u64 {
    if w == 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

fn to_signed(v: u64, w: u8) -> i64 {
    let v = v & mask(w);
    if w == 64 {
        v as i64
    } else if v & (1u64 << (w - 1)) != 0 {
        (v | !mask(w)) as i64
    } else {
        v as i64
    }
}

/// Direct evaluator matching the bit-blasted SMT semantics exactly
/// (division by zero follows the SMT-LIB bitvector conventions).
pub fn eval(pool: &ExprPool, e: ExprRef, env: &dyn Fn(&str) -> u64) -> Val {
    let mut memo: Vec<Option<Val>> = vec![None; pool.len()];
    eval_rec(pool, e, env, &mut memo)
}

fn eval_rec(pool: &ExprPool, e: ExprRef, env: &dyn Fn(&str) -> u64, memo: &mut Vec<Option<Val>>) -> Val {
    if let Some(v) = memo[e as usize] {
        return v;
    }
    let out = match pool.node(e) {
        Node::Var { name, width } => Val::Bv(env(name) & mask(*width), *width),
        Node::Const { value, width } => Val::Bv(*value, *width),
        Node::ObjSize { key } => Val::Bv(env(&format!("objsize!{key}")), 64),
        Node::BvBin(op, a, b) => {
            let w = pool.width(*a);
            let x = eval_rec(pool, *a, env, memo).as_u64();
            let y = eval_rec(pool, *b, env, memo).as_u64();
            let m = mask(w);
            let v = match op {
                BvBin::Add => x.wrapping_add(y) & m,
                BvBin::Sub => x.wrapping_sub(y) & m,
                BvBin::Mul => x.wrapping_mul(y) & m,
                BvBin::UDiv => {
                    if y == 0 {
                        m
                    } else {
                        (x / y) & m
                    }
                }
                BvBin::URem => {
                    if y == 0 {
                        x
                    } else {
                        (x % y) & m
                    }
                }
                BvBin::SDiv => {
                    let (sx, sy) = (to_signed(x, w), to_signed(y, w));
                    if sy == 0 {
                        if sx >= 0 {
                            m // -1
                        } else {
                            1
                        }
                    } else {
                        (sx.wrapping_div(sy) as u64) & m
                    }
                }
                BvBin::SRem => {
                    let (sx, sy) = (to_signed(x, w), to_signed(y, w));
                    if sy == 0 {
                        x
                    } else {
                        (sx.wrapping_rem(sy) as u64) & m
                    }
                }
                BvBin::And => x & y,
                BvBin::Or => x | y,
                BvBin::Xor => x ^ y,
                BvBin::Shl => {
                    if y >= w as u64 {
                        0
                    } else {
                        (x << y) & m
                    }
                }
                BvBin::LShr => {
                    if y >= w as u64 {
                        0
                    } else {
                        (x & m) >> y
                    }
                }
                BvBin::AShr => {
                    let sx = to_signed(x, w);
                    if y >= w as u64 {
                        if sx < 0 {
                            m
                        } else {
                            0
                        }
                    } else {
                        ((sx >> y) as u64) & m
                    }
                }
            };
            Val::Bv(v, w)
        }
        Node::BvNot(a) => {
            let w = pool.width(*a);
            Val::Bv(!eval_rec(pool, *a, env, memo).as_u64() & mask(w), w)
        }
        Node::BvNeg(a) => {
            let w = pool.width(*a);
            Val::Bv(eval_rec(pool, *a, env, memo).as_u64().wrapping_neg() & mask(w), w)
        }
        Node::ZExt(a, to) => Val::Bv(eval_rec(pool, *a, env, memo).as_u64(), *to),
        Node::SExt(a, to) => {
            let w = pool.width(*a);
            let v = eval_rec(pool, *a, env, memo).as_u64();
            Val::Bv(to_signed(v, w) as u64 & mask(*to), *to)
        }
        Node::Extract(a, hi, lo) => {
            let v = eval_rec(pool, *a, env, memo).as_u64();
            Val::Bv((v >> lo) & mask(hi - lo + 1), hi - lo + 1)
        }
        Node::Concat(a, b) => {
            let wb = pool.width(*b);
            let va = eval_rec(pool, *a, env, memo).as_u64();
            let vb = eval_rec(pool, *b, env, memo).as_u64();
            Val::Bv((va << wb) | (vb & mask(wb)), pool.width(*a) + wb)
        }
        Node::Ite(c, a, b) => {
            if eval_rec(pool, *c, env, memo).as_bool() {
                eval_rec(pool, *a, env, memo)
            } else {
                eval_rec(pool, *b, env, memo)
            }
        }
        Node::BoolConst(b) => Val::Bool(*b),
        Node::BoolNot(a) => Val::Bool(!eval_rec(pool, *a, env, memo).as_bool()),
        Node::BoolAnd(a, b) => Val::Bool(
            eval_rec(pool, *a, env, memo).as_bool() && eval_rec(pool, *b, env, memo).as_bool(),
        ),
        Node::BoolOr(a, b) => Val::Bool(
            eval_rec(pool, *a, env, memo).as_bool() || eval_rec(pool, *b, env, memo).as_bool(),
        ),
        Node::Cmp(op, a, b) => {
            let sa = pool.sort(*a);
            let x = eval_rec(pool, *a, env, memo);
            let y = eval_rec(pool, *b, env, memo);
            let r = match (op, sa) {
                (CmpOp::Eq, Sort::Bool) => x.as_bool() == y.as_bool(),
                (CmpOp::Eq, Sort::Bv(_)) => x.as_u64() == y.as_u64(),
                (CmpOp::Ult, _) => x.as_u64() < y.as_u64(),
                (CmpOp::Ule, _) => x.as_u64() <= y.as_u64(),
                (CmpOp::Slt, Sort::Bv(w)) => to_signed(x.as_u64(), w) < to_signed(y.as_u64(), w),
                (CmpOp::Sle, Sort::Bv(w)) => to_signed(x.as_u64(), w) <= to_signed(y.as_u64(), w),
                (CmpOp::Slt | CmpOp::Sle, Sort::Bool) => {
                    unreachable!("signed comparison over booleans")
                }
            };
            Val::Bool(r)
        }
    };
    memo[e as usize] = Some(out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_dedups_structurally() {
        let mut p = ExprPool::new();
        let a1 = p.var("a", 8);
        let a2 = p.var("a", 8);
        assert_eq!(a1, a2);
        let c = p.constant(3, 8);
        let s1 = p.bv_bin(BvBin::Add, a1, c);
        let s2 = p.bv_bin(BvBin::Add, a2, c);
        assert_eq!(s1, s2);
    }

    #[test]
    fn substitution_identity_and_composition() {
        let mut p = ExprPool::new();
        let a = p.var("a", 8);
        let b = p.var("b", 8);
        let e = p.cmp(CmpOp::Ult, a, b);
        let id = p.substitute(e, &HashMap::new()).unwrap();
        assert_eq!(id, e);

        // a -> x, then x -> y equals a -> y when domains/ranges are disjoint
        let x = p.var("x", 8);
        let y = p.var("y", 8);
        let m1: HashMap<String, ExprRef> = [("a".to_string(), x)].into();
        let m2: HashMap<String, ExprRef> = [("x".to_string(), y)].into();
        let e1 = p.substitute(e, &m1).unwrap();
        let e2 = p.substitute(e1, &m2).unwrap();
        let m3: HashMap<String, ExprRef> = [("a".to_string(), y)].into();
        let direct = p.substitute(e, &m3).unwrap();
        assert_eq!(e2, direct);
    }

    #[test]
    fn substitution_reconciles_widths() {
        let mut p = ExprPool::new();
        let a = p.var("a", 32);
        let n = p.constant(0, 32);
        let e = p.eq(a, n);
        let short = p.var("s", 8);
        let m: HashMap<String, ExprRef> = [("a".to_string(), short)].into();
        let out = p.substitute(e, &m).unwrap();
        // s was zero-extended to 32 bits
        let vars = p.free_vars(&[out]);
        assert_eq!(vars, vec![("s".to_string(), 8)]);
        let v = eval(&p, out, &|name| if name == "s" { 0 } else { 1 });
        assert_eq!(v, Val::Bool(true));
    }

    #[test]
    fn eval_signed_ops() {
        let mut p = ExprPool::new();
        let a = p.var("a", 8);
        let b = p.var("b", 8);
        let lt = p.cmp(CmpOp::Slt, a, b);
        // -1 < 1 signed
        let v = eval(&p, lt, &|n| if n == "a" { 0xff } else { 1 });
        assert_eq!(v, Val::Bool(true));
        // 255 < 1 unsigned is false
        let ult = p.cmp(CmpOp::Ult, a, b);
        let v = eval(&p, ult, &|n| if n == "a" { 0xff } else { 1 });
        assert_eq!(v, Val::Bool(false));
    }
}
