//! Constraint sets, bit-blasting to CNF, and the satisfiability oracle.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::cnf::{Lit, SatOutcome, SatSolver};
use super::expr::{BvBin, CmpOp, ExprPool, ExprRef, Node, Sort};

/// Where a conjunct came from; reduction and core reporting key off this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ProgramBranch,
    RootCause,
    HarnessSizeLoop,
    HarnessNullopt,
    StitchEquality,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::ProgramBranch => "program-branch",
            Provenance::RootCause => "root-cause",
            Provenance::HarnessSizeLoop => "harness-size-loop",
            Provenance::HarnessNullopt => "harness-nullopt",
            Provenance::StitchEquality => "stitch-equality",
        }
    }
    pub fn from_tag(s: &str) -> Option<Self> {
        Some(match s {
            "program-branch" => Provenance::ProgramBranch,
            "root-cause" => Provenance::RootCause,
            "harness-size-loop" => Provenance::HarnessSizeLoop,
            "harness-nullopt" => Provenance::HarnessNullopt,
            "stitch-equality" => Provenance::StitchEquality,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjunct {
    pub expr: ExprRef,
    pub prov: Provenance,
}

/// Ordered conjunction of boolean expressions with per-conjunct provenance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    pub conjuncts: Vec<Conjunct>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, expr: ExprRef, prov: Provenance) {
        self.conjuncts.push(Conjunct { expr, prov });
    }

    pub fn extend_from(&mut self, other: &ConstraintSet) {
        self.conjuncts.extend(other.conjuncts.iter().copied());
    }

    pub fn exprs(&self) -> Vec<ExprRef> {
        self.conjuncts.iter().map(|c| c.expr).collect()
    }

    pub fn len(&self) -> usize {
        self.conjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveResult {
    /// Model assigns every free variable (objsize pseudo-variables appear
    /// under their `objsize!` names).
    Sat(BTreeMap<String, u64>),
    /// Indices into the conjunct list forming an unsatisfiable subset.
    Unsat(Vec<usize>),
    Unknown,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveResult::Unsat(_))
    }
}

pub const DEFAULT_SOLVER_BUDGET: u64 = 1_000_000;

/// Bit-blasting satisfiability check with assumption-based unsat cores.
pub fn solve(pool: &ExprPool, set: &ConstraintSet, budget: u64) -> SolveResult {
    let mut sat = SatSolver::new();
    let mut blaster = Blaster::new(&mut sat);
    let mut selectors = Vec::new();
    for c in &set.conjuncts {
        let lit = blaster.blast_bool(pool, c.expr);
        let sel = blaster.sat.new_var();
        blaster.sat.add_clause(&[Lit::neg(sel), lit]);
        selectors.push(Lit::pos(sel));
    }
    let vars = blaster.var_bits.clone();
    match sat.solve(&selectors, budget) {
        SatOutcome::Sat => {
            let mut model = BTreeMap::new();
            for ((name, _w), bits) in vars {
                let mut v = 0u64;
                for (i, b) in bits.iter().enumerate() {
                    if sat.model_value(b.var()) == b.sign() {
                        v |= 1u64 << i;
                    }
                }
                model.insert(name, v);
            }
            SolveResult::Sat(model)
        }
        SatOutcome::Unsat(core_lits) => {
            let mut core: Vec<usize> = core_lits
                .iter()
                .filter_map(|l| selectors.iter().position(|s| s == l))
                .collect();
            core.sort_unstable();
            core.dedup();
            if core.is_empty() && !set.conjuncts.is_empty() {
                // level-0 contradiction: fall back to the full set
                core = (0..set.conjuncts.len()).collect();
            }
            // one deletion pass tightens the core at desk scale
            if core.len() > 1 && core.len() <= 24 {
                core = minimize_core(pool, set, &core, budget);
            }
            SolveResult::Unsat(core)
        }
        SatOutcome::Unknown => SolveResult::Unknown,
    }
}

fn minimize_core(pool: &ExprPool, set: &ConstraintSet, core: &[usize], budget: u64) -> Vec<usize> {
    let mut kept: Vec<usize> = core.to_vec();
    let mut i = 0;
    while i < kept.len() {
        if kept.len() == 1 {
            break;
        }
        let mut trial = kept.clone();
        trial.remove(i);
        let sub = ConstraintSet {
            conjuncts: trial.iter().map(|&k| set.conjuncts[k]).collect(),
        };
        let mut sat = SatSolver::new();
        let mut blaster = Blaster::new(&mut sat);
        let mut selectors = Vec::new();
        for c in &sub.conjuncts {
            let lit = blaster.blast_bool(pool, c.expr);
            let sel = blaster.sat.new_var();
            blaster.sat.add_clause(&[Lit::neg(sel), lit]);
            selectors.push(Lit::pos(sel));
        }
        match sat.solve(&selectors, budget.min(50_000)) {
            SatOutcome::Unsat(_) => {
                kept = trial;
            }
            _ => i += 1,
        }
    }
    kept
}

/// Checks a model against every conjunct with the direct evaluator.
pub fn model_satisfies(pool: &ExprPool, set: &ConstraintSet, model: &BTreeMap<String, u64>) -> bool {
    let env = |name: &str| model.get(name).copied().unwrap_or(0);
    set.conjuncts.iter().all(|c| super::expr::eval(pool, c.expr, &env).as_bool())
}

struct Blaster<'s> {
    sat: &'s mut SatSolver,
    lit_true: Lit,
    bv_cache: HashMap<ExprRef, Vec<Lit>>,
    bool_cache: HashMap<ExprRef, Lit>,
    var_bits: BTreeMap<(String, u8), Vec<Lit>>,
}

impl<'s> Blaster<'s> {
    fn new(sat: &'s mut SatSolver) -> Self {
        let t = sat.new_var();
        sat.add_clause(&[Lit::pos(t)]);
        Blaster {
            sat,
            lit_true: Lit::pos(t),
            bv_cache: HashMap::new(),
            bool_cache: HashMap::new(),
            var_bits: BTreeMap::new(),
        }
    }

    fn lit_false(&self) -> Lit {
        self.lit_true.negate()
    }

    fn fresh(&mut self) -> Lit {
        Lit::pos(self.sat.new_var())
    }

    fn const_lit(&self, b: bool) -> Lit {
        if b {
            self.lit_true
        } else {
            self.lit_false()
        }
    }

    // --- gates -----------------------------------------------------------

    fn gate_and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == self.lit_false() || b == self.lit_false() {
            return self.lit_false();
        }
        if a == self.lit_true {
            return b;
        }
        if b == self.lit_true {
            return a;
        }
        if a == b {
            return a;
        }
        if a == b.negate() {
            return self.lit_false();
        }
        let o = self.fresh();
        self.sat.add_clause(&[o.negate(), a]);
        self.sat.add_clause(&[o.negate(), b]);
        self.sat.add_clause(&[o, a.negate(), b.negate()]);
        o
    }

    fn gate_or(&mut self, a: Lit, b: Lit) -> Lit {
        let na = a.negate();
        let nb = b.negate();
        self.gate_and(na, nb).negate()
    }

    fn gate_xor(&mut self, a: Lit, b: Lit) -> Lit {
        if a == self.lit_false() {
            return b;
        }
        if b == self.lit_false() {
            return a;
        }
        if a == self.lit_true {
            return b.negate();
        }
        if b == self.lit_true {
            return a.negate();
        }
        if a == b {
            return self.lit_false();
        }
        if a == b.negate() {
            return self.lit_true;
        }
        let o = self.fresh();
        self.sat.add_clause(&[o.negate(), a, b]);
        self.sat.add_clause(&[o.negate(), a.negate(), b.negate()]);
        self.sat.add_clause(&[o, a, b.negate()]);
        self.sat.add_clause(&[o, a.negate(), b]);
        o
    }

    fn gate_mux(&mut self, c: Lit, t: Lit, f: Lit) -> Lit {
        if c == self.lit_true {
            return t;
        }
        if c == self.lit_false() {
            return f;
        }
        if t == f {
            return t;
        }
        let o = self.fresh();
        self.sat.add_clause(&[c.negate(), t.negate(), o]);
        self.sat.add_clause(&[c.negate(), t, o.negate()]);
        self.sat.add_clause(&[c, f.negate(), o]);
        self.sat.add_clause(&[c, f, o.negate()]);
        o
    }

    /// (sum, carry_out)
    fn full_adder(&mut self, a: Lit, b: Lit, cin: Lit) -> (Lit, Lit) {
        let axb = self.gate_xor(a, b);
        let sum = self.gate_xor(axb, cin);
        let ab = self.gate_and(a, b);
        let axb_c = self.gate_and(axb, cin);
        let cout = self.gate_or(ab, axb_c);
        (sum, cout)
    }

    fn add_bits(&mut self, a: &[Lit], b: &[Lit], cin: Lit) -> Vec<Lit> {
        let mut out = Vec::with_capacity(a.len());
        let mut carry = cin;
        for (x, y) in a.iter().zip(b) {
            let (s, c) = self.full_adder(*x, *y, carry);
            out.push(s);
            carry = c;
        }
        out
    }

    fn negate_bits(&mut self, a: &[Lit]) -> Vec<Lit> {
        let inv: Vec<Lit> = a.iter().map(|l| l.negate()).collect();
        let one: Vec<Lit> = std::iter::once(self.lit_true)
            .chain(std::iter::repeat(self.lit_false()))
            .take(a.len())
            .collect();
        self.add_bits(&inv, &one, self.lit_false())
    }

    /// a < b (unsigned): borrow out of a - b.
    fn ult_bits(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut borrow = self.lit_false();
        for (x, y) in a.iter().zip(b) {
            // borrow' = (~x & y) | (~(x ^ y) & borrow)
            let nx_and_y = self.gate_and(x.negate(), *y);
            let x_xor_y = self.gate_xor(*x, *y);
            let keep = self.gate_and(x_xor_y.negate(), borrow);
            borrow = self.gate_or(nx_and_y, keep);
        }
        borrow
    }

    fn slt_bits(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let w = a.len();
        let (sa, sb) = (a[w - 1], b[w - 1]);
        let ult = self.ult_bits(&a[..w - 1], &b[..w - 1]);
        if w == 1 {
            // a < b signed on 1 bit: a=1 (=-1), b=0
            return self.gate_and(sa, sb.negate());
        }
        // different signs: a negative wins; same signs: unsigned compare of low bits
        let diff = self.gate_xor(sa, sb);
        let neg_wins = self.gate_and(sa, sb.negate());
        self.gate_mux(diff, neg_wins, ult)
    }

    fn eq_bits(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut acc = self.lit_true;
        for (x, y) in a.iter().zip(b) {
            let bit_eq = self.gate_xor(*x, *y).negate();
            acc = self.gate_and(acc, bit_eq);
        }
        acc
    }

    fn mul_bits(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let mut acc: Vec<Lit> = vec![self.lit_false(); w];
        for i in 0..w {
            let row: Vec<Lit> = (0..w)
                .map(|j| {
                    if j < i {
                        self.lit_false()
                    } else {
                        self.gate_and(a[j - i], b[i])
                    }
                })
                .collect();
            acc = self.add_bits(&acc, &row, self.lit_false());
        }
        acc
    }

    /// Restoring division: (quotient, remainder) with divisor != 0 semantics;
    /// callers mux in the SMT-LIB division-by-zero results.
    fn udivrem_bits(&mut self, a: &[Lit], b: &[Lit]) -> (Vec<Lit>, Vec<Lit>) {
        let w = a.len();
        let mut rem: Vec<Lit> = vec![self.lit_false(); w];
        let mut quo: Vec<Lit> = vec![self.lit_false(); w];
        for i in (0..w).rev() {
            // rem = (rem << 1) | a[i]
            rem.rotate_right(1);
            rem[0] = a[i];
            // if rem >= b { rem -= b; quo[i] = 1 }
            let lt = self.ult_bits(&rem, b);
            let ge = lt.negate();
            let neg_b = self.negate_bits(b);
            let diff = self.add_bits(&rem, &neg_b, self.lit_false());
            for k in 0..w {
                rem[k] = self.gate_mux(ge, diff[k], rem[k]);
            }
            quo[i] = ge;
        }
        (quo, rem)
    }

    fn is_zero(&mut self, a: &[Lit]) -> Lit {
        let mut any = self.lit_false();
        for l in a {
            any = self.gate_or(any, *l);
        }
        any.negate()
    }

    fn shift_bits(&mut self, a: &[Lit], b: &[Lit], kind: BvBin) -> Vec<Lit> {
        let w = a.len();
        let fill = match kind {
            BvBin::AShr => a[w - 1],
            _ => self.lit_false(),
        };
        // barrel shifter over every bit of the amount; a stage whose step
        // reaches the full width shifts everything out
        let mut cur = a.to_vec();
        for (s, sel) in b.iter().enumerate() {
            let amt = 1u128 << s.min(127);
            let mut shifted = vec![fill; w];
            if amt < w as u128 {
                let amt = amt as usize;
                for k in 0..w {
                    match kind {
                        BvBin::Shl => {
                            if k >= amt {
                                shifted[k] = cur[k - amt];
                            }
                        }
                        _ => {
                            if k + amt < w {
                                shifted[k] = cur[k + amt];
                            }
                        }
                    }
                }
            }
            for k in 0..w {
                cur[k] = self.gate_mux(*sel, shifted[k], cur[k]);
            }
        }
        cur
    }

    // --- expression translation -------------------------------------------

    fn blast_bv(&mut self, pool: &ExprPool, e: ExprRef) -> Vec<Lit> {
        if let Some(bits) = self.bv_cache.get(&e) {
            return bits.clone();
        }
        let bits: Vec<Lit> = match pool.node(e) {
            Node::Var { name, width } => self.var_lits(name, *width),
            Node::ObjSize { key } => self.var_lits(&format!("objsize!{key}"), 64),
            Node::Const { value, width } => (0..*width)
                .map(|i| self.const_lit(value >> i & 1 == 1))
                .collect(),
            Node::BvBin(op, a, b) => {
                let (a, b) = (*a, *b);
                let op = *op;
                let x = self.blast_bv(pool, a);
                let y = self.blast_bv(pool, b);
                match op {
                    BvBin::Add => self.add_bits(&x, &y, self.lit_false()),
                    BvBin::Sub => {
                        let ny: Vec<Lit> = y.iter().map(|l| l.negate()).collect();
                        self.add_bits(&x, &ny, self.lit_true)
                    }
                    BvBin::Mul => self.mul_bits(&x, &y),
                    BvBin::And => x.iter().zip(&y).map(|(a, b)| self.gate_and(*a, *b)).collect(),
                    BvBin::Or => x.iter().zip(&y).map(|(a, b)| self.gate_or(*a, *b)).collect(),
                    BvBin::Xor => x.iter().zip(&y).map(|(a, b)| self.gate_xor(*a, *b)).collect(),
                    BvBin::Shl | BvBin::LShr | BvBin::AShr => self.shift_bits(&x, &y, op),
                    BvBin::UDiv => {
                        let (q, _) = self.udivrem_bits(&x, &y);
                        let z = self.is_zero(&y);
                        q.iter().map(|l| self.gate_mux(z, self.lit_true, *l)).collect()
                    }
                    BvBin::URem => {
                        let (_, r) = self.udivrem_bits(&x, &y);
                        let z = self.is_zero(&y);
                        r.iter().zip(&x).map(|(l, xb)| self.gate_mux(z, *xb, *l)).collect()
                    }
                    BvBin::SDiv => self.signed_divrem(&x, &y, true),
                    BvBin::SRem => self.signed_divrem(&x, &y, false),
                }
            }
            Node::BvNot(a) => {
                let a = *a;
                self.blast_bv(pool, a).iter().map(|l| l.negate()).collect()
            }
            Node::BvNeg(a) => {
                let a = *a;
                let bits = self.blast_bv(pool, a);
                self.negate_bits(&bits)
            }
            Node::ZExt(a, to) => {
                let (a, to) = (*a, *to as usize);
                let mut bits = self.blast_bv(pool, a);
                bits.resize(to, self.lit_false());
                bits
            }
            Node::SExt(a, to) => {
                let (a, to) = (*a, *to as usize);
                let mut bits = self.blast_bv(pool, a);
                let sign = *bits.last().unwrap();
                bits.resize(to, sign);
                bits
            }
            Node::Extract(a, hi, lo) => {
                let (a, hi, lo) = (*a, *hi as usize, *lo as usize);
                let bits = self.blast_bv(pool, a);
                bits[lo..=hi].to_vec()
            }
            Node::Concat(a, b) => {
                let (a, b) = (*a, *b);
                let hi = self.blast_bv(pool, a);
                let mut bits = self.blast_bv(pool, b);
                bits.extend(hi);
                bits
            }
            Node::Ite(c, a, b) => {
                let (c, a, b) = (*c, *a, *b);
                let cl = self.blast_bool(pool, c);
                let x = self.blast_bv(pool, a);
                let y = self.blast_bv(pool, b);
                x.iter().zip(&y).map(|(t, f)| self.gate_mux(cl, *t, *f)).collect()
            }
            other => unreachable!("boolean node {other:?} in bitvector position"),
        };
        self.bv_cache.insert(e, bits.clone());
        bits
    }

    fn signed_divrem(&mut self, x: &[Lit], y: &[Lit], want_div: bool) -> Vec<Lit> {
        let w = x.len();
        let sx = x[w - 1];
        let sy = y[w - 1];
        let nx = self.negate_bits(x);
        let ny = self.negate_bits(y);
        let ax: Vec<Lit> = (0..w).map(|k| self.gate_mux(sx, nx[k], x[k])).collect();
        let ay: Vec<Lit> = (0..w).map(|k| self.gate_mux(sy, ny[k], y[k])).collect();
        let (q, r) = self.udivrem_bits(&ax, &ay);
        let z = self.is_zero(y);
        if want_div {
            // quotient sign = sx ^ sy; on zero divisor: x >= 0 -> -1, else 1
            let qs = self.gate_xor(sx, sy);
            let nq = self.negate_bits(&q);
            let signed_q: Vec<Lit> = (0..w).map(|k| self.gate_mux(qs, nq[k], q[k])).collect();
            let minus_one = vec![self.lit_true; w];
            let one: Vec<Lit> = std::iter::once(self.lit_true)
                .chain(std::iter::repeat(self.lit_false()))
                .take(w)
                .collect();
            let zval: Vec<Lit> = (0..w).map(|k| self.gate_mux(sx, one[k], minus_one[k])).collect();
            (0..w).map(|k| self.gate_mux(z, zval[k], signed_q[k])).collect()
        } else {
            // remainder takes the dividend's sign; on zero divisor: x
            let nr = self.negate_bits(&r);
            let signed_r: Vec<Lit> = (0..w).map(|k| self.gate_mux(sx, nr[k], r[k])).collect();
            (0..w).map(|k| self.gate_mux(z, x[k], signed_r[k])).collect()
        }
    }

    fn var_lits(&mut self, name: &str, width: u8) -> Vec<Lit> {
        if let Some(bits) = self.var_bits.get(&(name.to_string(), width)) {
            return bits.clone();
        }
        let bits: Vec<Lit> = (0..width).map(|_| self.fresh()).collect();
        self.var_bits.insert((name.to_string(), width), bits.clone());
        bits
    }

    fn blast_bool(&mut self, pool: &ExprPool, e: ExprRef) -> Lit {
        if let Some(l) = self.bool_cache.get(&e) {
            return *l;
        }
        let lit = match pool.node(e) {
            Node::BoolConst(b) => self.const_lit(*b),
            Node::BoolNot(a) => {
                let a = *a;
                self.blast_bool(pool, a).negate()
            }
            Node::BoolAnd(a, b) => {
                let (a, b) = (*a, *b);
                let x = self.blast_bool(pool, a);
                let y = self.blast_bool(pool, b);
                self.gate_and(x, y)
            }
            Node::BoolOr(a, b) => {
                let (a, b) = (*a, *b);
                let x = self.blast_bool(pool, a);
                let y = self.blast_bool(pool, b);
                self.gate_or(x, y)
            }
            Node::Ite(c, a, b) => {
                let (c, a, b) = (*c, *a, *b);
                let cl = self.blast_bool(pool, c);
                let x = self.blast_bool(pool, a);
                let y = self.blast_bool(pool, b);
                self.gate_mux(cl, x, y)
            }
            Node::Cmp(op, a, b) => {
                let (op, a, b) = (*op, *a, *b);
                match pool.sort(a) {
                    Sort::Bool => {
                        let x = self.blast_bool(pool, a);
                        let y = self.blast_bool(pool, b);
                        match op {
                            CmpOp::Eq => self.gate_xor(x, y).negate(),
                            _ => unreachable!("ordered comparison on booleans"),
                        }
                    }
                    Sort::Bv(_) => {
                        let x = self.blast_bv(pool, a);
                        let y = self.blast_bv(pool, b);
                        match op {
                            CmpOp::Eq => self.eq_bits(&x, &y),
                            CmpOp::Ult => self.ult_bits(&x, &y),
                            CmpOp::Ule => self.ult_bits(&y, &x).negate(),
                            CmpOp::Slt => self.slt_bits(&x, &y),
                            CmpOp::Sle => self.slt_bits(&y, &x).negate(),
                        }
                    }
                }
            }
            other => unreachable!("bitvector node {other:?} in boolean position"),
        };
        self.bool_cache.insert(e, lit);
        lit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sym::expr::eval;

    #[test]
    fn sat_with_model_and_unsat_with_core() {
        let mut p = ExprPool::new();
        let x = p.var("x", 8);
        let c3 = p.constant(3, 8);
        let c200 = p.constant(200, 8);
        let mut set = ConstraintSet::new();
        let lt = p.cmp(CmpOp::Ult, x, c3);
        set.push(lt, Provenance::ProgramBranch);
        match solve(&p, &set, 100_000) {
            SolveResult::Sat(m) => {
                assert!(m["x"] < 3);
            }
            other => panic!("expected sat, got {other:?}"),
        }
        let gt = p.cmp(CmpOp::Ult, c200, x);
        set.push(gt, Provenance::RootCause);
        let tauto = p.bool_const(true);
        set.push(tauto, Provenance::ProgramBranch);
        match solve(&p, &set, 100_000) {
            SolveResult::Unsat(core) => {
                assert!(core.contains(&0) && core.contains(&1));
                assert!(!core.contains(&2));
            }
            other => panic!("expected unsat, got {other:?}"),
        }
    }

    #[test]
    fn x_equals_x_is_sat() {
        let mut p = ExprPool::new();
        let x = p.var("x", 16);
        let e = p.eq(x, x);
        let mut set = ConstraintSet::new();
        set.push(e, Provenance::ProgramBranch);
        assert!(solve(&p, &set, 100_000).is_sat());
    }

    #[test]
    fn objsize_behaves_as_fresh_variable_until_bound() {
        let mut p = ExprPool::new();
        let os = p.objsize("buf");
        let c10 = p.constant(10, 64);
        let lt = p.cmp(CmpOp::Ult, os, c10);
        let mut set = ConstraintSet::new();
        set.push(lt, Provenance::RootCause);
        assert!(solve(&p, &set, 100_000).is_sat());
        // binding it above 10 flips the verdict
        let c20 = p.constant(20, 64);
        let bind = p.eq(os, c20);
        set.push(bind, Provenance::StitchEquality);
        assert!(solve(&p, &set, 100_000).is_unsat());
    }

    /// Differential check of the blaster against the direct evaluator on
    /// random small expressions.
    #[test]
    fn blaster_matches_evaluator_on_random_formulas() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for round in 0..300 {
            let mut p = ExprPool::new();
            let w = rng.random_range(1..=8u8);
            let gen = random_bool_expr(&mut p, &mut rng, w, 3);
            let mut set = ConstraintSet::new();
            set.push(gen, Provenance::ProgramBranch);
            let verdict = solve(&p, &set, 200_000);
            let vars = p.free_vars(&[gen]);
            // exhaustive enumeration oracle
            let mut truly_sat = false;
            let total: u64 = vars.iter().map(|(_, w)| *w as u64).sum();
            assert!(total <= 24, "oracle space too large");
            let mut found_model: Option<BTreeMap<String, u64>> = None;
            for bits in 0..(1u64 << total) {
                let mut env = BTreeMap::new();
                let mut off = 0;
                for (name, vw) in &vars {
                    let m = if *vw == 64 { u64::MAX } else { (1u64 << vw) - 1 };
                    env.insert(name.clone(), (bits >> off) & m);
                    off += *vw as u64;
                }
                if eval(&p, gen, &|n| env.get(n).copied().unwrap_or(0)).as_bool() {
                    truly_sat = true;
                    found_model = Some(env);
                    break;
                }
            }
            match verdict {
                SolveResult::Sat(m) => {
                    assert!(truly_sat, "round {round}: solver sat, oracle unsat");
                    assert!(
                        eval(&p, gen, &|n| m.get(n).copied().unwrap_or(0)).as_bool(),
                        "round {round}: model does not evaluate true"
                    );
                }
                SolveResult::Unsat(_) => {
                    assert!(!truly_sat, "round {round}: solver unsat, oracle found {found_model:?}");
                }
                SolveResult::Unknown => panic!("round {round}: budget exhausted"),
            }
        }
    }

    pub(crate) fn random_bv_expr(
        p: &mut ExprPool,
        rng: &mut rand_chacha::ChaCha8Rng,
        w: u8,
        depth: u8,
    ) -> ExprRef {
        use rand::Rng;
        if depth == 0 || rng.random_bool(0.3) {
            return if rng.random_bool(0.5) {
                let names = ["x", "y", "z"];
                p.var(names[rng.random_range(0..3)], w)
            } else {
                p.constant(rng.random::<u64>(), w)
            };
        }
        let a = random_bv_expr(p, rng, w, depth - 1);
        let b = random_bv_expr(p, rng, w, depth - 1);
        let ops = [
            BvBin::Add,
            BvBin::Sub,
            BvBin::Mul,
            BvBin::UDiv,
            BvBin::URem,
            BvBin::SDiv,
            BvBin::SRem,
            BvBin::And,
            BvBin::Or,
            BvBin::Xor,
            BvBin::Shl,
            BvBin::LShr,
            BvBin::AShr,
        ];
        match rng.random_range(0..16) {
            0..=12 => {
                let op = ops[rng.random_range(0..ops.len())];
                p.bv_bin(op, a, b)
            }
            13 => p.bv_not(a),
            14 => p.bv_neg(a),
            _ => {
                let c = random_cmp(p, rng, w, depth - 1);
                p.ite(c, a, b)
            }
        }
    }

    fn random_cmp(p: &mut ExprPool, rng: &mut rand_chacha::ChaCha8Rng, w: u8, depth: u8) -> ExprRef {
        use rand::Rng;
        let a = random_bv_expr(p, rng, w, depth);
        let b = random_bv_expr(p, rng, w, depth);
        let op = [CmpOp::Eq, CmpOp::Ult, CmpOp::Ule, CmpOp::Slt, CmpOp::Sle]
            [rng.random_range(0..5)];
        p.cmp(op, a, b)
    }

    pub(crate) fn random_bool_expr(
        p: &mut ExprPool,
        rng: &mut rand_chacha::ChaCha8Rng,
        w: u8,
        depth: u8,
    ) -> ExprRef {
        use rand::Rng;
        if depth == 0 {
            return random_cmp(p, rng, w, 1);
        }
        match rng.random_range(0..6) {
            0 => {
                let a = random_bool_expr(p, rng, w, depth - 1);
                p.bool_not(a)
            }
            1 => {
                let a = random_bool_expr(p, rng, w, depth - 1);
                let b = random_bool_expr(p, rng, w, depth - 1);
                p.bool_and(a, b)
            }
            2 => {
                let a = random_bool_expr(p, rng, w, depth - 1);
                let b = random_bool_expr(p, rng, w, depth - 1);
                p.bool_or(a, b)
            }
            _ => random_cmp(p, rng, w, depth - 1),
        }
    }
}
