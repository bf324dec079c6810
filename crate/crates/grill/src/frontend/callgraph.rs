//! Call graph construction and caller->callee path enumeration.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::pretty;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallSite {
    pub stmt: StmtId,
    /// Pretty-printed argument expressions, for reports and audits.
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallEdge {
    pub caller: String,
    pub callee: String,
    /// Every call site of `callee` within `caller`; multiple sites collapse
    /// into this single edge.
    pub callsites: Vec<CallSite>,
    pub promoted: bool,
    /// Original function-pointer expression when `promoted`.
    pub fp_expr: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CallGraph {
    pub edges: Vec<CallEdge>,
    #[serde(skip)]
    by_caller: BTreeMap<String, Vec<usize>>,
    #[serde(skip)]
    by_callee: BTreeMap<String, Vec<usize>>,
}

impl CallGraph {
    pub fn reindex(&mut self) {
        self.by_caller.clear();
        self.by_callee.clear();
        for (i, e) in self.edges.iter().enumerate() {
            self.by_caller.entry(e.caller.clone()).or_default().push(i);
            self.by_callee.entry(e.callee.clone()).or_default().push(i);
        }
    }

    pub fn callees_of(&self, caller: &str) -> impl Iterator<Item = &CallEdge> {
        self.by_caller.get(caller).into_iter().flatten().map(|i| &self.edges[*i])
    }

    pub fn callers_of(&self, callee: &str) -> impl Iterator<Item = &CallEdge> {
        self.by_callee.get(callee).into_iter().flatten().map(|i| &self.edges[*i])
    }

    pub fn edge(&self, caller: &str, callee: &str) -> Option<&CallEdge> {
        self.edges.iter().find(|e| e.caller == caller && e.callee == callee)
    }
}

/// One `CallEdge` per (caller, callee) pair with at least one direct call.
/// Indirect calls are not represented; run promotion first if they matter.
pub fn build_call_graph(p: &Program) -> CallGraph {
    let mut map: BTreeMap<(String, String), CallEdge> = BTreeMap::new();
    for (fname, f) in &p.functions {
        visit_stmts(&f.body, &mut |st| {
            let call = match &st.kind {
                StmtKind::Let(_, _, Some(Rvalue::Call(c)))
                | StmtKind::Assign(_, Rvalue::Call(c))
                | StmtKind::Expr(Rvalue::Call(c)) => c,
                _ => return,
            };
            let callee = match &call.callee {
                Callee::Func(n) => n.clone(),
                _ => return,
            };
            let site = CallSite {
                stmt: st.id,
                args: call.args.iter().map(pretty::print_expr).collect(),
            };
            let entry = map.entry((fname.clone(), callee.clone())).or_insert_with(|| CallEdge {
                caller: fname.clone(),
                callee,
                callsites: Vec::new(),
                promoted: true,
                fp_expr: call.promoted_from.clone(),
            });
            // an edge counts as promoted only if every site came from promotion
            if call.promoted_from.is_none() {
                entry.promoted = false;
                entry.fp_expr = None;
            }
            entry.callsites.push(site);
        });
    }
    let mut g = CallGraph { edges: map.into_values().collect(), ..Default::default() };
    g.reindex();
    g
}

/// All root->target paths as edge sequences. Each call edge is used at most
/// once per path, which bounds recursion (a direct self-edge can appear once).
pub fn enumerate_paths(g: &CallGraph, root: &str, target: &str) -> Vec<Vec<CallEdge>> {
    let mut out = Vec::new();
    if root == target {
        out.push(Vec::new());
    }
    let mut used: BTreeSet<(String, String)> = BTreeSet::new();
    let mut stack: Vec<CallEdge> = Vec::new();
    dfs(g, root, target, &mut used, &mut stack, &mut out);
    out
}

fn dfs(
    g: &CallGraph,
    at: &str,
    target: &str,
    used: &mut BTreeSet<(String, String)>,
    stack: &mut Vec<CallEdge>,
    out: &mut Vec<Vec<CallEdge>>,
) {
    for e in g.callees_of(at) {
        let key = (e.caller.clone(), e.callee.clone());
        if used.contains(&key) {
            continue;
        }
        used.insert(key.clone());
        stack.push(e.clone());
        if e.callee == target {
            out.push(stack.clone());
        }
        // keep exploring below the target too: target may call itself deeper
        dfs(g, &e.callee, target, used, stack, out);
        stack.pop();
        used.remove(&key);
    }
}

/// Result of rewriting one indirect call site into direct calls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Promotion {
    pub function: String,
    pub stmt: StmtId,
    pub fp_expr: String,
    pub candidates: Vec<String>,
    pub unresolved: bool,
}

/// Rewrites every indirect call whose candidate set is non-empty into a
/// chain of `if (fp == cand_i) { cand_i(args); }` direct calls. Candidates
/// must have their address captured somewhere in the program and an exactly
/// matching signature. Statement ids are renumbered afterwards.
pub fn promote_indirect_calls(p: &Program) -> (Program, Vec<Promotion>) {
    let mut taken: BTreeSet<String> = BTreeSet::new();
    for f in p.functions.values() {
        visit_stmts(&f.body, &mut |st| {
            visit_stmt_exprs(st, &mut |e| {
                if let ExprKind::FnRef(n) = &e.kind {
                    taken.insert(n.clone());
                }
            });
        });
    }

    let mut promotions = Vec::new();
    let mut out = p.clone();
    let fnames: Vec<String> = out.functions.keys().cloned().collect();
    for fname in fnames {
        let mut f = out.functions.remove(&fname).unwrap();
        rewrite_block(p, &taken, &fname, &mut f.body, &mut promotions);
        out.functions.insert(fname, f);
    }
    out.renumber();
    (out, promotions)
}

fn signature_of_expr(t: &MiniType) -> Option<&Signature> {
    match t {
        MiniType::FnPtr(sig) => Some(sig),
        _ => None,
    }
}

fn fn_signature(f: &FunctionDef) -> Signature {
    Signature {
        params: f.params.iter().map(|(_, t)| t.clone()).collect(),
        ret: f.ret.clone().map(Box::new),
    }
}

fn rewrite_block(
    p: &Program,
    taken: &BTreeSet<String>,
    fname: &str,
    block: &mut Block,
    promotions: &mut Vec<Promotion>,
) {
    let mut i = 0;
    while i < block.len() {
        match &mut block[i].kind {
            StmtKind::If(_, t, e) => {
                rewrite_block(p, taken, fname, t, promotions);
                if let Some(e) = e {
                    rewrite_block(p, taken, fname, e, promotions);
                }
            }
            StmtKind::While(_, b) => rewrite_block(p, taken, fname, b, promotions),
            StmtKind::Switch(_, cases, dflt) => {
                for (_, b) in cases.iter_mut() {
                    rewrite_block(p, taken, fname, b, promotions);
                }
                if let Some(b) = dflt {
                    rewrite_block(p, taken, fname, b, promotions);
                }
            }
            kind => {
                let call = match kind {
                    StmtKind::Let(_, _, Some(Rvalue::Call(c)))
                    | StmtKind::Assign(_, Rvalue::Call(c))
                    | StmtKind::Expr(Rvalue::Call(c)) => Some(c),
                    _ => None,
                };
                let fp = match call {
                    Some(CallRv { callee: Callee::Ptr(e), .. }) => Some((*e.clone(), ())),
                    _ => None,
                };
                if let Some((fp_expr, ())) = fp {
                    let sig = signature_of_expr(&fp_expr.ty).cloned();
                    let candidates: Vec<String> = match &sig {
                        Some(sig) => p
                            .functions
                            .values()
                            .filter(|f| taken.contains(&f.name) && &fn_signature(f) == sig)
                            .map(|f| f.name.clone())
                            .collect(),
                        None => Vec::new(),
                    };
                    let fp_text = pretty::print_expr(&fp_expr);
                    promotions.push(Promotion {
                        function: fname.to_string(),
                        stmt: block[i].id,
                        fp_expr: fp_text.clone(),
                        candidates: candidates.clone(),
                        unresolved: candidates.is_empty(),
                    });
                    if !candidates.is_empty() {
                        let original = block[i].clone();
                        let replacement = build_dispatch(&original, &fp_expr, &fp_text, &candidates);
                        block.splice(i..=i, replacement);
                    }
                }
            }
        }
        i += 1;
    }
}

/// `if (fp == c0) { <call c0> } else { if (fp == c1) { ... } }`
/// A `let x = (*fp)(..)` source splits into the declaration followed by the
/// dispatch chain assigning into `x`.
fn build_dispatch(original: &Stmt, fp: &Expr, fp_text: &str, candidates: &[String]) -> Vec<Stmt> {
    let line = original.line;
    let mut out = Vec::new();
    let mut source = original.clone();
    if let StmtKind::Let(name, ty, Some(rv)) = &source.kind {
        out.push(Stmt { id: 0, kind: StmtKind::Let(name.clone(), ty.clone(), None), line });
        let place = Expr {
            kind: ExprKind::Var(VarRef::Local(name.clone())),
            ty: ty.clone(),
            line,
            col: 0,
        };
        source.kind = StmtKind::Assign(place, rv.clone());
    }

    let mk_direct = |target: &str| -> Stmt {
        let mut st = source.clone();
        let call = match &mut st.kind {
            StmtKind::Assign(_, Rvalue::Call(c)) | StmtKind::Expr(Rvalue::Call(c)) => c,
            _ => unreachable!("dispatch source is always a call statement"),
        };
        call.callee = Callee::Func(target.to_string());
        call.promoted_from = Some(fp_text.to_string());
        st
    };

    let mut chain: Option<Stmt> = None;
    for cand in candidates.iter().rev() {
        let fnref = Expr { kind: ExprKind::FnRef(cand.clone()), ty: fp.ty.clone(), line, col: 0 };
        let cond = Expr {
            kind: ExprKind::Binary(BinOp::Eq, Box::new(fp.clone()), Box::new(fnref)),
            ty: MiniType::Bool,
            line,
            col: 0,
        };
        let then_block = vec![mk_direct(cand)];
        let else_block = chain.take().map(|s| vec![s]);
        chain = Some(Stmt { id: 0, kind: StmtKind::If(cond, then_block, else_block), line });
    }
    out.push(chain.expect("non-empty candidate list"));
    out
}
