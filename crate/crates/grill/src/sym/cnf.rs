//! CDCL SAT solver with watched literals, first-UIP learning, VSIDS-style
//! activities, phase saving, Luby restarts and assumption-based cores.

pub type Var = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(pub u32);

impl Lit {
    pub fn pos(v: Var) -> Lit {
        Lit(v << 1)
    }
    pub fn neg(v: Var) -> Lit {
        Lit((v << 1) | 1)
    }
    pub fn new(v: Var, positive: bool) -> Lit {
        if positive {
            Lit::pos(v)
        } else {
            Lit::neg(v)
        }
    }
    pub fn var(self) -> Var {
        self.0 >> 1
    }
    pub fn sign(self) -> bool {
        self.0 & 1 == 0
    }
    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SatOutcome {
    Sat,
    /// Subset of the assumption literals that is jointly unsatisfiable
    /// with the clause set.
    Unsat(Vec<Lit>),
    Unknown,
}

const NO_REASON: u32 = u32::MAX;

pub struct SatSolver {
    nvars: u32,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>, // lit idx -> clause indexes watching it
    assign: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    pub conflicts: u64,
}

impl SatSolver {
    pub fn new() -> Self {
        SatSolver {
            nvars: 0,
            clauses: Vec::new(),
            watches: Vec::new(),
            assign: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            conflicts: 0,
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.nvars;
        self.nvars += 1;
        self.assign.push(LBool::Undef);
        self.level.push(0);
        self.reason.push(NO_REASON);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    pub fn num_vars(&self) -> u32 {
        self.nvars
    }

    fn value(&self, l: Lit) -> LBool {
        match self.assign[l.var() as usize] {
            LBool::Undef => LBool::Undef,
            LBool::True => {
                if l.sign() {
                    LBool::True
                } else {
                    LBool::False
                }
            }
            LBool::False => {
                if l.sign() {
                    LBool::False
                } else {
                    LBool::True
                }
            }
        }
    }

    pub fn model_value(&self, v: Var) -> bool {
        matches!(self.assign[v as usize], LBool::True)
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        debug_assert_eq!(self.decision_level(), 0);
        // dedup and drop satisfied/false literals at level 0
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            match self.value(l) {
                LBool::True => return, // already satisfied forever
                LBool::False => continue,
                LBool::Undef => {
                    if c.contains(&l.negate()) {
                        return; // tautology
                    }
                    if !c.contains(&l) {
                        c.push(l);
                    }
                }
            }
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                let idx = self.clauses.len() as u32;
                self.watches[c[0].negate().idx()].push(idx);
                self.watches[c[1].negate().idx()].push(idx);
                self.clauses.push(c);
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        debug_assert_eq!(self.value(l), LBool::Undef);
        let v = l.var() as usize;
        self.assign[v] = if l.sign() { LBool::True } else { LBool::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.phase[v] = l.sign();
        self.trail.push(l);
    }

    /// Returns the index of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p.negate();
            let mut i = 0;
            let mut watch_list = std::mem::take(&mut self.watches[p.idx()]);
            while i < watch_list.len() {
                let ci = watch_list[i];
                let cu = ci as usize;
                // ensure false_lit is at position 1
                if self.clauses[cu][0] == false_lit {
                    self.clauses[cu].swap(0, 1);
                }
                debug_assert_eq!(self.clauses[cu][1], false_lit);
                let first = self.clauses[cu][0];
                if self.value(first) == LBool::True {
                    i += 1;
                    continue;
                }
                // find a new literal to watch
                let mut moved = false;
                for k in 2..self.clauses[cu].len() {
                    let lk = self.clauses[cu][k];
                    if self.value(lk) != LBool::False {
                        self.clauses[cu].swap(1, k);
                        self.watches[lk.negate().idx()].push(ci);
                        watch_list.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                // unit or conflict
                if self.value(first) == LBool::False {
                    self.watches[p.idx()] = watch_list;
                    return Some(ci);
                }
                self.enqueue(first, ci);
                i += 1;
            }
            self.watches[p.idx()] = watch_list;
        }
        None
    }

    fn bump(&mut self, v: Var) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP conflict analysis; returns (learned clause, backtrack level).
    fn analyze(&mut self, confl: u32) -> (Vec<Lit>, u32) {
        let mut learned: Vec<Lit> = vec![Lit(0)]; // slot 0 for the UIP
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut confl = confl;
        let mut index = self.trail.len();
        loop {
            let clause: Vec<Lit> = self.clauses[confl as usize].clone();
            let start = if p.is_none() { 0 } else { 1 };
            for k in start..clause.len() {
                let q = clause[k];
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(q.var());
                    if self.level[v] == self.decision_level() {
                        counter += 1;
                    } else {
                        learned.push(q);
                    }
                }
            }
            // find next literal to expand
            loop {
                index -= 1;
                if self.seen[self.trail[index].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = lit.var() as usize;
            self.seen[v] = false;
            counter -= 1;
            if counter == 0 {
                learned[0] = lit.negate();
                break;
            }
            p = Some(lit);
            confl = self.reason[v];
            debug_assert_ne!(confl, NO_REASON);
        }
        for l in &learned[1..] {
            self.seen[l.var() as usize] = false;
        }
        let bt = if learned.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for k in 2..learned.len() {
                if self.level[learned[k].var() as usize] > self.level[learned[max_i].var() as usize] {
                    max_i = k;
                }
            }
            learned.swap(1, max_i);
            self.level[learned[1].var() as usize]
        };
        (learned, bt)
    }

    /// Assumption subset responsible for `failing` (an assumption literal
    /// found false) being contradicted. Returned literals are assumption
    /// literals, `failing` included.
    fn analyze_final(&mut self, failing: Lit) -> Vec<Lit> {
        let mut out = vec![failing];
        if self.decision_level() == 0 {
            return out;
        }
        self.seen[failing.var() as usize] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            if !self.seen[v] {
                continue;
            }
            if self.reason[v] == NO_REASON {
                debug_assert!(self.level[v] > 0);
                if l != failing.negate() {
                    out.push(l);
                }
            } else {
                let clause = self.clauses[self.reason[v] as usize].clone();
                for q in &clause[1..] {
                    if self.level[q.var() as usize] > 0 {
                        self.seen[q.var() as usize] = true;
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[failing.var() as usize] = false;
        out
    }

    fn cancel_until(&mut self, level: u32) {
        while self.decision_level() > level {
            let lim = self.trail_lim.pop().unwrap();
            while self.trail.len() > lim {
                let l = self.trail.pop().unwrap();
                let v = l.var() as usize;
                self.assign[v] = LBool::Undef;
                self.reason[v] = NO_REASON;
            }
        }
        self.qhead = self.trail.len();
    }

    fn pick_branch_var(&self) -> Option<Var> {
        let mut best: Option<Var> = None;
        let mut best_act = -1.0;
        for v in 0..self.nvars {
            if self.assign[v as usize] == LBool::Undef && self.activity[v as usize] > best_act {
                best = Some(v);
                best_act = self.activity[v as usize];
            }
        }
        best
    }

    pub fn solve(&mut self, assumptions: &[Lit], max_conflicts: u64) -> SatOutcome {
        if !self.ok {
            return SatOutcome::Unsat(Vec::new());
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SatOutcome::Unsat(Vec::new());
        }
        self.conflicts = 0;
        let mut restart_round = 0u64;
        loop {
            let budget_this_round = 100 * luby(restart_round);
            restart_round += 1;
            let mut round_conflicts = 0u64;
            loop {
                if let Some(confl) = self.propagate() {
                    self.conflicts += 1;
                    round_conflicts += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        return SatOutcome::Unsat(Vec::new());
                    }
                    let (learned, bt) = self.analyze(confl);
                    self.cancel_until(bt);
                    self.learn(learned);
                    self.var_inc *= 1.0 / 0.95;
                    if self.conflicts >= max_conflicts {
                        self.cancel_until(0);
                        return SatOutcome::Unknown;
                    }
                    if round_conflicts >= budget_this_round {
                        self.cancel_until(0);
                        break; // restart
                    }
                } else {
                    // extend assumptions first
                    if (self.decision_level() as usize) < assumptions.len() {
                        let a = assumptions[self.decision_level() as usize];
                        match self.value(a) {
                            LBool::True => {
                                self.trail_lim.push(self.trail.len());
                                continue;
                            }
                            LBool::False => {
                                let core = self.analyze_final(a);
                                self.cancel_until(0);
                                return SatOutcome::Unsat(core);
                            }
                            LBool::Undef => {
                                self.trail_lim.push(self.trail.len());
                                self.enqueue(a, NO_REASON);
                                continue;
                            }
                        }
                    }
                    match self.pick_branch_var() {
                        None => return SatOutcome::Sat,
                        Some(v) => {
                            let l = Lit::new(v, self.phase[v as usize]);
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(l, NO_REASON);
                        }
                    }
                }
            }
        }
    }

    fn learn(&mut self, learned: Vec<Lit>) {
        match learned.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(learned[0], NO_REASON);
                // re-anchor as a level-0 fact when possible
                if self.decision_level() == 0 {
                    self.reason[learned[0].var() as usize] = NO_REASON;
                }
            }
            _ => {
                let idx = self.clauses.len() as u32;
                self.watches[learned[0].negate().idx()].push(idx);
                self.watches[learned[1].negate().idx()].push(idx);
                let first = learned[0];
                self.clauses.push(learned);
                self.enqueue(first, idx);
            }
        }
    }

}

/// Luby restart sequence: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
fn luby(x: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = x;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_sat_and_unsat() {
        let mut s = SatSolver::new();
        let a = s.new_var();
        let b = s.new_var();
        s.add_clause(&[Lit::pos(a), Lit::pos(b)]);
        s.add_clause(&[Lit::neg(a)]);
        assert_eq!(s.solve(&[], 10_000), SatOutcome::Sat);
        assert!(s.model_value(b));
        assert!(!s.model_value(a));

        let mut s = SatSolver::new();
        let a = s.new_var();
        s.add_clause(&[Lit::pos(a)]);
        s.add_clause(&[Lit::neg(a)]);
        assert!(matches!(s.solve(&[], 10_000), SatOutcome::Unsat(_)));
    }

    #[test]
    fn assumption_core_is_relevant_subset() {
        let mut s = SatSolver::new();
        let a = s.new_var();
        let b = s.new_var();
        let c = s.new_var();
        // a -> b, and assumptions force a and !b; c is irrelevant
        s.add_clause(&[Lit::neg(a), Lit::pos(b)]);
        let assumptions = [Lit::pos(c), Lit::pos(a), Lit::neg(b)];
        match s.solve(&assumptions, 10_000) {
            SatOutcome::Unsat(core) => {
                assert!(core.contains(&Lit::pos(a)) || core.contains(&Lit::neg(b)));
                assert!(!core.contains(&Lit::pos(c)));
            }
            other => panic!("expected unsat, got {other:?}"),
        }
    }

    #[test]
    fn pigeonhole_3_into_2_is_unsat() {
        // 3 pigeons, 2 holes
        let mut s = SatSolver::new();
        let mut v = [[0u32; 2]; 3];
        for p in 0..3 {
            for h in 0..2 {
                v[p][h] = s.new_var();
            }
        }
        for p in 0..3 {
            s.add_clause(&[Lit::pos(v[p][0]), Lit::pos(v[p][1])]);
        }
        for h in 0..2 {
            for p1 in 0..3 {
                for p2 in (p1 + 1)..3 {
                    s.add_clause(&[Lit::neg(v[p1][h]), Lit::neg(v[p2][h])]);
                }
            }
        }
        assert!(matches!(s.solve(&[], 100_000), SatOutcome::Unsat(_)));
    }
}
