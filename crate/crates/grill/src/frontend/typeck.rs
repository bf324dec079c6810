//! Name resolution and type checking. Fills `Expr::ty` in place, resolves
//! raw identifiers, lowers enum constants and named case labels, and applies
//! C-style array decay where a pointer is expected.

use std::collections::HashMap;

use super::ast::*;
use super::FrontendError;

type TResult<T> = Result<T, FrontendError>;

pub fn check_program(p: &mut Program) -> TResult<()> {
    resolve_decl_types(p);
    validate_decls(p)?;
    if !p.functions.contains_key(&p.entry) {
        return Err(FrontendError::NoEntry { name: p.entry.clone() });
    }
    let names: Vec<String> = p.functions.keys().cloned().collect();
    for name in names {
        let mut f = p.functions.remove(&name).unwrap();
        let result = check_function(p, &mut f);
        p.functions.insert(name, f);
        result?;
    }
    Ok(())
}

/// The parser cannot tell struct names from enum names; normalize every
/// declared type before anything else looks at them.
fn resolve_decl_types(p: &mut Program) {
    let enum_names: std::collections::BTreeSet<String> = p.enums.keys().cloned().collect();
    let fix = |t: &mut MiniType| {
        *t = resolve_named_with(&enum_names, t);
    };
    let struct_names: Vec<String> = p.structs.keys().cloned().collect();
    for sn in struct_names {
        let mut sd = p.structs.remove(&sn).unwrap();
        for (_, ft) in sd.fields.iter_mut() {
            fix(ft);
        }
        p.structs.insert(sn, sd);
    }
    for gd in p.globals.values_mut() {
        fix(&mut gd.ty);
    }
    for f in p.functions.values_mut() {
        for (_, pt) in f.params.iter_mut() {
            fix(pt);
        }
        if let Some(rt) = &mut f.ret {
            fix(rt);
        }
    }
}

fn resolve_named_with(enums: &std::collections::BTreeSet<String>, t: &MiniType) -> MiniType {
    match t {
        MiniType::Struct(n) if enums.contains(n) => MiniType::Enum(n.clone()),
        MiniType::Array(e, s) => MiniType::Array(Box::new(resolve_named_with(enums, e)), *s),
        MiniType::Ptr(e) => MiniType::Ptr(Box::new(resolve_named_with(enums, e))),
        MiniType::FnPtr(sig) => MiniType::FnPtr(Signature {
            params: sig.params.iter().map(|x| resolve_named_with(enums, x)).collect(),
            ret: sig.ret.as_ref().map(|r| Box::new(resolve_named_with(enums, r))),
        }),
        other => other.clone(),
    }
}

fn validate_decls(p: &Program) -> TResult<()> {
    for sd in p.structs.values() {
        for (fname, ft) in &sd.fields {
            validate_type(p, ft, false).map_err(|e| e.in_context(&format!("field {}.{}", sd.name, fname)))?;
        }
    }
    for gd in p.globals.values() {
        validate_type(p, &gd.ty, false).map_err(|e| e.in_context(&format!("global {}", gd.name)))?;
        if p.structs.get(struct_name(&gd.ty).unwrap_or("")).map(|s| s.opaque).unwrap_or(false) {
            return Err(FrontendError::Type {
                line: 0,
                col: 0,
                msg: format!("global {} has opaque type", gd.name),
            });
        }
    }
    for f in p.functions.values() {
        for (pname, pt) in &f.params {
            validate_type(p, pt, false)
                .map_err(|e| e.in_context(&format!("parameter {} of {}", pname, f.name)))?;
        }
        if let Some(rt) = &f.ret {
            validate_type(p, rt, false).map_err(|e| e.in_context(&format!("return type of {}", f.name)))?;
        }
    }
    Ok(())
}

fn struct_name(t: &MiniType) -> Option<&str> {
    match t {
        MiniType::Struct(n) => Some(n),
        _ => None,
    }
}

/// Structural validity: named types exist, unknown-size arrays appear only
/// under pointers, opaque structs appear only behind pointers, void only as
/// a pointee.
fn validate_type(p: &Program, t: &MiniType, under_ptr: bool) -> TResult<()> {
    let err = |msg: String| Err(FrontendError::Type { line: 0, col: 0, msg });
    match t {
        MiniType::Int(it) => {
            if ![8, 16, 32, 64].contains(&it.width) {
                return err(format!("bad integer width {}", it.width));
            }
            Ok(())
        }
        MiniType::Bool => Ok(()),
        MiniType::Enum(n) => {
            if !p.enums.contains_key(n) {
                return err(format!("unknown enum `{n}`"));
            }
            Ok(())
        }
        MiniType::Struct(n) => {
            // parser cannot distinguish struct from enum names
            if p.enums.contains_key(n) {
                return Ok(());
            }
            let sd = p.structs.get(n).ok_or_else(|| FrontendError::Type {
                line: 0,
                col: 0,
                msg: format!("unknown type `{n}`"),
            })?;
            if sd.opaque && !under_ptr {
                return err(format!("opaque struct `{n}` may only be used behind a pointer"));
            }
            Ok(())
        }
        MiniType::Array(elem, size) => {
            if matches!(**elem, MiniType::Array(_, ArraySize::Unknown)) {
                return err("array element may not be an unsized array".into());
            }
            if *size == ArraySize::Unknown && !under_ptr {
                return err("unsized array is only legal as a pointer pointee".into());
            }
            validate_type(p, elem, false)
        }
        MiniType::Ptr(pointee) => match &**pointee {
            MiniType::Void => Ok(()),
            other => validate_type(p, other, true),
        },
        MiniType::FnPtr(sig) => {
            for pt in &sig.params {
                validate_type(p, pt, false)?;
            }
            if let Some(rt) = &sig.ret {
                validate_type(p, rt, false)?;
            }
            Ok(())
        }
        MiniType::Void => err("void is only legal as a pointer pointee".into()),
    }
}

/// Normalizes names the parser guessed as `Struct` into `Enum` when they
/// name an enum.
fn resolve_named(p: &Program, t: &MiniType) -> MiniType {
    match t {
        MiniType::Struct(n) if p.enums.contains_key(n) => MiniType::Enum(n.clone()),
        MiniType::Array(e, s) => MiniType::Array(Box::new(resolve_named(p, e)), *s),
        MiniType::Ptr(e) => MiniType::Ptr(Box::new(resolve_named(p, e))),
        MiniType::FnPtr(sig) => MiniType::FnPtr(Signature {
            params: sig.params.iter().map(|x| resolve_named(p, x)).collect(),
            ret: sig.ret.as_ref().map(|r| Box::new(resolve_named(p, r))),
        }),
        other => other.clone(),
    }
}

struct Env<'p> {
    prog: &'p Program,
    func: String,
    params: HashMap<String, MiniType>,
    locals: Vec<HashMap<String, MiniType>>,
    ret: Option<MiniType>,
}

impl<'p> Env<'p> {
    fn lookup_local(&self, name: &str) -> Option<&MiniType> {
        self.locals.iter().rev().find_map(|s| s.get(name))
    }
}

fn check_function(p: &Program, f: &mut FunctionDef) -> TResult<()> {
    for (_, pt) in f.params.iter_mut() {
        *pt = resolve_named(p, pt);
    }
    if let Some(rt) = &mut f.ret {
        *rt = resolve_named(p, rt);
    }
    let mut env = Env {
        prog: p,
        func: f.name.clone(),
        params: f.params.iter().cloned().collect(),
        locals: vec![HashMap::new()],
        ret: f.ret.clone(),
    };
    check_block(&mut env, &mut f.body)
}

fn check_block(env: &mut Env, block: &mut Block) -> TResult<()> {
    env.locals.push(HashMap::new());
    for st in block.iter_mut() {
        check_stmt(env, st)?;
    }
    env.locals.pop();
    Ok(())
}

fn check_stmt(env: &mut Env, st: &mut Stmt) -> TResult<()> {
    match &mut st.kind {
        StmtKind::Let(name, ty, init) => {
            *ty = resolve_named(env.prog, ty);
            validate_type(env.prog, ty, false)
                .map_err(|e| e.in_context(&format!("local {name}")))?;
            if matches!(ty, MiniType::Void) {
                return Err(FrontendError::Type { line: st.line, col: 0, msg: "void local".into() });
            }
            let declared = ty.clone();
            if let Some(rv) = init {
                check_rvalue(env, rv, Some(&declared), st.line)?;
            }
            env.locals.last_mut().unwrap().insert(name.clone(), declared);
            Ok(())
        }
        StmtKind::Assign(place, rv) => {
            let pt = check_expr(env, place, None)?;
            require_lvalue(place, st.line)?;
            if matches!(pt, MiniType::Array(_, _)) {
                return Err(FrontendError::Type {
                    line: st.line,
                    col: 0,
                    msg: "cannot assign whole arrays; use memcpy".into(),
                });
            }
            check_rvalue(env, rv, Some(&pt), st.line)
        }
        StmtKind::Expr(rv) => {
            let rv_ty = Rvalue::Call(match rv {
                Rvalue::Call(c) => c.clone(),
                Rvalue::Expr(_) => {
                    return Err(FrontendError::Type {
                        line: st.line,
                        col: 0,
                        msg: "expression statement must be a call".into(),
                    })
                }
            });
            drop(rv_ty);
            check_rvalue(env, rv, None, st.line)
        }
        StmtKind::If(cond, t, e) => {
            let ct = check_expr(env, cond, Some(&MiniType::Bool))?;
            require_bool(&ct, st.line)?;
            check_block(env, t)?;
            if let Some(e) = e {
                check_block(env, e)?;
            }
            Ok(())
        }
        StmtKind::While(cond, b) => {
            let ct = check_expr(env, cond, Some(&MiniType::Bool))?;
            require_bool(&ct, st.line)?;
            check_block(env, b)
        }
        StmtKind::Switch(scrut, cases, dflt) => {
            let sty = check_expr(env, scrut, None)?;
            let enum_name = match &sty {
                MiniType::Enum(n) => Some(n.clone()),
                MiniType::Int(_) => None,
                other => {
                    return Err(FrontendError::Type {
                        line: st.line,
                        col: 0,
                        msg: format!("switch scrutinee must be integer or enum, found {other:?}"),
                    })
                }
            };
            for (label, body) in cases.iter_mut() {
                if let CaseValue::Named(n) = label {
                    let v = resolve_const_name(env.prog, enum_name.as_deref(), n).ok_or_else(|| {
                        FrontendError::Type {
                            line: st.line,
                            col: 0,
                            msg: format!("unknown case label `{n}`"),
                        }
                    })?;
                    *label = CaseValue::Int(v);
                }
                check_block(env, body)?;
            }
            if let Some(b) = dflt {
                check_block(env, b)?;
            }
            Ok(())
        }
        StmtKind::Return(e) => {
            match (e, env.ret.clone()) {
                (None, None) => Ok(()),
                (Some(e), Some(rt)) => {
                    check_expr(env, e, Some(&rt))?;
                    assignable(env.prog, &e.ty, &rt).then_some(()).ok_or_else(|| {
                        FrontendError::Type {
                            line: st.line,
                            col: 0,
                            msg: format!("return type mismatch: {:?} vs {:?}", e.ty, rt),
                        }
                    })
                }
                (None, Some(_)) => Err(FrontendError::Type {
                    line: st.line,
                    col: 0,
                    msg: "missing return value".into(),
                }),
                (Some(_), None) => Err(FrontendError::Type {
                    line: st.line,
                    col: 0,
                    msg: "function returns no value".into(),
                }),
            }
        }
        StmtKind::Break => Ok(()),
    }
}

fn resolve_const_name(p: &Program, enum_hint: Option<&str>, name: &str) -> Option<u64> {
    if let Some(en) = enum_hint {
        if let Some(v) = p.enums.get(en).and_then(|e| e.value_of(name)) {
            return Some(v);
        }
    }
    if let Some(c) = p.consts.get(name) {
        return Some(c.value);
    }
    for e in p.enums.values() {
        if let Some(v) = e.value_of(name) {
            return Some(v);
        }
    }
    None
}

fn check_rvalue(env: &mut Env, rv: &mut Rvalue, expect: Option<&MiniType>, line: u32) -> TResult<()> {
    match rv {
        Rvalue::Expr(e) => {
            check_expr(env, e, expect)?;
            if let Some(want) = expect {
                coerce(env.prog, e, want, line)?;
            }
            Ok(())
        }
        Rvalue::Call(call) => {
            let ret = check_call(env, call, line)?;
            if let Some(want) = expect {
                let got = ret.ok_or_else(|| FrontendError::Type {
                    line,
                    col: 0,
                    msg: "call returns no value".into(),
                })?;
                if !assignable(env.prog, &got, want) {
                    return Err(FrontendError::Type {
                        line,
                        col: 0,
                        msg: format!("cannot assign {got:?} to {want:?}"),
                    });
                }
            }
            Ok(())
        }
    }
}

fn check_call(env: &mut Env, call: &mut CallRv, line: u32) -> TResult<Option<MiniType>> {
    // a named callee that is actually a function-pointer variable is an
    // indirect call
    if let Callee::Func(name) = &call.callee {
        let is_var = env.lookup_local(name).is_some()
            || env.params.contains_key(name)
            || env.prog.globals.contains_key(name);
        if is_var && !env.prog.functions.contains_key(name) {
            let mut e = Expr::new(ExprKind::Var(VarRef::Raw(name.clone())), line, 0);
            check_expr(env, &mut e, None)?;
            call.callee = Callee::Ptr(Box::new(e));
        }
    }
    match &mut call.callee {
        Callee::Intrinsic(i) => {
            let i = *i;
            check_intrinsic_call(env, i, &mut call.args, line)
        }
        Callee::Func(name) => {
            let fd = env.prog.functions.get(name).cloned().ok_or_else(|| FrontendError::Type {
                line,
                col: 0,
                msg: format!("call to undeclared function `{name}` in {}", env.func),
            })?;
            if fd.params.len() != call.args.len() {
                return Err(FrontendError::Type {
                    line,
                    col: 0,
                    msg: format!(
                        "`{name}` expects {} arguments, got {}",
                        fd.params.len(),
                        call.args.len()
                    ),
                });
            }
            for (arg, (_, pt)) in call.args.iter_mut().zip(&fd.params) {
                check_expr(env, arg, Some(pt))?;
                coerce(env.prog, arg, pt, line)?;
            }
            Ok(fd.ret.clone())
        }
        Callee::Ptr(e) => {
            let t = check_expr(env, e, None)?;
            let sig = match t {
                MiniType::FnPtr(sig) => sig,
                other => {
                    return Err(FrontendError::Type {
                        line,
                        col: 0,
                        msg: format!("indirect call through non function pointer {other:?}"),
                    })
                }
            };
            if sig.params.len() != call.args.len() {
                return Err(FrontendError::Type {
                    line,
                    col: 0,
                    msg: "indirect call arity mismatch".into(),
                });
            }
            for (arg, pt) in call.args.iter_mut().zip(&sig.params) {
                check_expr(env, arg, Some(pt))?;
                coerce(env.prog, arg, pt, line)?;
            }
            Ok(sig.ret.map(|r| *r))
        }
    }
}

fn check_intrinsic_call(
    env: &mut Env,
    i: Intrinsic,
    args: &mut [Expr],
    line: u32,
) -> TResult<Option<MiniType>> {
    let arity_err = |want: usize| FrontendError::Type {
        line,
        col: 0,
        msg: format!("{} expects {want} arguments", i.name()),
    };
    match i {
        Intrinsic::Alloc => {
            if args.len() != 1 {
                return Err(arity_err(1));
            }
            let t = check_expr(env, &mut args[0], Some(&MiniType::Int(IntType::U64)))?;
            require_int(&t, line)?;
            Ok(Some(MiniType::ptr_to(MiniType::Void)))
        }
        Intrinsic::Free => {
            if args.len() != 1 {
                return Err(arity_err(1));
            }
            let t = check_expr(env, &mut args[0], None)?;
            require_ptr(&t, line)?;
            Ok(None)
        }
        Intrinsic::Memcpy => {
            if args.len() != 3 {
                return Err(arity_err(3));
            }
            let d = check_expr(env, &mut args[0], None)?;
            decay_if_array(env.prog, &mut args[0]);
            require_ptr(&args[0].ty.clone(), line).or_else(|_| require_ptr(&d, line))?;
            check_expr(env, &mut args[1], None)?;
            decay_if_array(env.prog, &mut args[1]);
            require_ptr(&args[1].ty.clone(), line)?;
            let n = check_expr(env, &mut args[2], Some(&MiniType::Int(IntType::U64)))?;
            require_int(&n, line)?;
            Ok(None)
        }
        Intrinsic::ReadInput => {
            if args.len() != 2 {
                return Err(arity_err(2));
            }
            check_expr(env, &mut args[0], None)?;
            decay_if_array(env.prog, &mut args[0]);
            require_ptr(&args[0].ty.clone(), line)?;
            let n = check_expr(env, &mut args[1], Some(&MiniType::Int(IntType::U64)))?;
            require_int(&n, line)?;
            Ok(Some(MiniType::Int(IntType::U64)))
        }
    }
}

fn require_bool(t: &MiniType, line: u32) -> TResult<()> {
    if matches!(t, MiniType::Bool) {
        Ok(())
    } else {
        Err(FrontendError::Type { line, col: 0, msg: format!("expected bool, found {t:?}") })
    }
}

fn require_int(t: &MiniType, line: u32) -> TResult<()> {
    if matches!(t, MiniType::Int(_) | MiniType::Enum(_)) {
        Ok(())
    } else {
        Err(FrontendError::Type { line, col: 0, msg: format!("expected integer, found {t:?}") })
    }
}

fn require_ptr(t: &MiniType, line: u32) -> TResult<()> {
    if t.is_ptr() {
        Ok(())
    } else {
        Err(FrontendError::Type { line, col: 0, msg: format!("expected pointer, found {t:?}") })
    }
}

fn require_lvalue(e: &Expr, line: u32) -> TResult<()> {
    let ok = match &e.kind {
        ExprKind::Var(VarRef::Local(_) | VarRef::Param(_) | VarRef::Global(_)) => true,
        ExprKind::Deref(_) => true,
        ExprKind::Field(base, _) => return require_lvalue(base, line),
        ExprKind::Index(base, _) => return require_lvalue_or_ptr(base, line),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(FrontendError::Type { line, col: 0, msg: "not an lvalue".into() })
    }
}

fn require_lvalue_or_ptr(e: &Expr, line: u32) -> TResult<()> {
    if e.ty.is_ptr() {
        Ok(())
    } else {
        require_lvalue(e, line)
    }
}

/// Array-typed values decay to `&arr` when a pointer is expected. The
/// rewritten node is exactly what re-parsing the printed form produces, so
/// printing stays a fixed point.
fn decay_if_array(prog: &Program, e: &mut Expr) {
    if matches!(e.kind, ExprKind::AddrOf(_)) {
        return;
    }
    if let MiniType::Array(elem, size) = e.ty.clone() {
        let _ = prog;
        let inner = e.clone();
        *e = Expr {
            kind: ExprKind::AddrOf(Box::new(inner)),
            ty: MiniType::ptr_to(MiniType::Array(elem, size)),
            line: e.line,
            col: e.col,
        };
    }
}

/// Inserts array decay when needed, then checks assignability.
fn coerce(prog: &Program, e: &mut Expr, want: &MiniType, line: u32) -> TResult<()> {
    if want.is_ptr() {
        decay_if_array(prog, e);
    }
    if assignable(prog, &e.ty, want) {
        // integer literals adopt the expected type
        if let (ExprKind::IntLit(_), MiniType::Int(_) | MiniType::Enum(_)) = (&e.kind, want) {
            e.ty = want.clone();
        }
        Ok(())
    } else {
        Err(FrontendError::Type {
            line,
            col: e.col,
            msg: format!("cannot use {:?} where {want:?} is expected", e.ty),
        })
    }
}

/// Assignability: exact match, void-pointer bridging, literal adaptation,
/// null to any pointer, and array-pointee relaxation (sized -> unsized,
/// array-of-T -> T).
pub fn assignable(prog: &Program, from: &MiniType, to: &MiniType) -> bool {
    if from == to {
        return true;
    }
    match (from, to) {
        (MiniType::Ptr(a), MiniType::Ptr(b)) => {
            if matches!(**a, MiniType::Void) || matches!(**b, MiniType::Void) {
                return true;
            }
            match (&**a, &**b) {
                (MiniType::Array(ea, _), MiniType::Array(eb, ArraySize::Unknown)) => ea == eb,
                (MiniType::Array(ea, _), other) => &**ea == other,
                (elem, MiniType::Array(eb, ArraySize::Unknown)) => elem == &**eb,
                _ => false,
            }
        }
        (MiniType::Int(a), MiniType::Int(b)) => a == b,
        (MiniType::Enum(_), MiniType::Int(it)) => *it == IntType::U32,
        (MiniType::Int(it), MiniType::Enum(_)) => *it == IntType::U32,
        _ => {
            let _ = prog;
            false
        }
    }
}

fn check_expr(env: &mut Env, e: &mut Expr, expect: Option<&MiniType>) -> TResult<MiniType> {
    let line = e.line;
    let ty: MiniType = match &mut e.kind {
        ExprKind::IntLit(v) => match expect {
            Some(MiniType::Int(it)) => {
                let t = MiniType::Int(*it);
                let _ = v;
                t
            }
            Some(MiniType::Enum(n)) => MiniType::Enum(n.clone()),
            _ => MiniType::Int(IntType::I32),
        },
        ExprKind::BoolLit(_) => MiniType::Bool,
        ExprKind::StrLit(s) => {
            // NUL-terminated byte array object
            MiniType::ptr_to(MiniType::Array(
                Box::new(MiniType::Int(IntType::U8)),
                ArraySize::Const(s.len() as u64 + 1),
            ))
        }
        ExprKind::NullLit => match expect {
            Some(t @ MiniType::Ptr(_)) => t.clone(),
            _ => MiniType::ptr_to(MiniType::Void),
        },
        ExprKind::Var(vr) => {
            let name = vr.name().to_string();
            if let Some(t) = env.lookup_local(&name) {
                *vr = VarRef::Local(name);
                t.clone()
            } else if let Some(t) = env.params.get(&name) {
                *vr = VarRef::Param(name);
                t.clone()
            } else if let Some(g) = env.prog.globals.get(&name) {
                *vr = VarRef::Global(name);
                g.ty.clone()
            } else if let Some(c) = env.prog.consts.get(&name) {
                *vr = VarRef::Const(name);
                MiniType::Int(c.ty)
            } else if let Some((en, _)) = env
                .prog
                .enums
                .iter()
                .find_map(|(en, ed)| ed.value_of(&name).map(|v| (en.clone(), v)))
            {
                *vr = VarRef::EnumConst(en.clone(), name);
                MiniType::Enum(en)
            } else if env.prog.functions.contains_key(&name) {
                // bare function name denotes its address
                let fd = &env.prog.functions[&name];
                let sig = Signature {
                    params: fd.params.iter().map(|(_, t)| t.clone()).collect(),
                    ret: fd.ret.clone().map(Box::new),
                };
                e.kind = ExprKind::FnRef(name);
                MiniType::FnPtr(sig)
            } else {
                return Err(FrontendError::Type {
                    line,
                    col: e.col,
                    msg: format!("unknown identifier `{name}` in {}", env.func),
                });
            }
        }
        ExprKind::FnRef(name) => {
            let fd = env.prog.functions.get(name).ok_or_else(|| FrontendError::Type {
                line,
                col: e.col,
                msg: format!("unknown function `{name}`"),
            })?;
            MiniType::FnPtr(Signature {
                params: fd.params.iter().map(|(_, t)| t.clone()).collect(),
                ret: fd.ret.clone().map(Box::new),
            })
        }
        ExprKind::Unary(op, a) => {
            let at = check_expr(env, a, expect.filter(|_| *op != UnOp::Not))?;
            match op {
                UnOp::Not => {
                    require_bool(&at, line)?;
                    MiniType::Bool
                }
                UnOp::Neg | UnOp::BitNot => {
                    require_int(&at, line)?;
                    at
                }
            }
        }
        ExprKind::Binary(op, a, b) => {
            let op = *op;
            match op {
                BinOp::LogAnd | BinOp::LogOr => {
                    let at = check_expr(env, a, Some(&MiniType::Bool))?;
                    let bt = check_expr(env, b, Some(&MiniType::Bool))?;
                    require_bool(&at, line)?;
                    require_bool(&bt, line)?;
                    MiniType::Bool
                }
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let at = check_expr(env, a, None)?;
                    let bt = check_expr(env, b, Some(&at))?;
                    check_same_scalar_or_ptr(env.prog, a, b, &at, &bt, op, line)?;
                    MiniType::Bool
                }
                _ => {
                    let at = check_expr(env, a, expect)?;
                    // pointer arithmetic: ptr +- int
                    if at.is_ptr() && matches!(op, BinOp::Add | BinOp::Sub) {
                        let bt = check_expr(env, b, Some(&MiniType::Int(IntType::U64)))?;
                        require_int(&bt, line)?;
                        at
                    } else {
                        let bt = check_expr(env, b, Some(&at))?;
                        require_int(&at, line)?;
                        require_int(&bt, line)?;
                        unify_int(a, b, &at, &bt, line)?
                    }
                }
            }
        }
        ExprKind::Cast(a, to) => {
            *to = resolve_named(env.prog, to);
            validate_type(env.prog, to, false).or_else(|_| validate_type(env.prog, to, true))?;
            let at = check_expr(env, a, None)?;
            let ok = match (&at, &*to) {
                (MiniType::Int(_) | MiniType::Bool | MiniType::Enum(_), MiniType::Int(_) | MiniType::Bool | MiniType::Enum(_)) => true,
                (MiniType::Ptr(_), MiniType::Ptr(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(FrontendError::Type {
                    line,
                    col: e.col,
                    msg: format!("invalid cast from {at:?} to {to:?}"),
                });
            }
            to.clone()
        }
        ExprKind::Deref(a) => {
            let at = check_expr(env, a, None)?;
            match at {
                MiniType::Ptr(p) => match *p {
                    MiniType::Void => {
                        return Err(FrontendError::Type {
                            line,
                            col: e.col,
                            msg: "cannot dereference *void; cast it first".into(),
                        })
                    }
                    MiniType::Array(_, _) => {
                        return Err(FrontendError::Type {
                            line,
                            col: e.col,
                            msg: "cannot dereference a pointer to an array; index it".into(),
                        })
                    }
                    t => t,
                },
                other => {
                    return Err(FrontendError::Type {
                        line,
                        col: e.col,
                        msg: format!("cannot dereference {other:?}"),
                    })
                }
            }
        }
        ExprKind::AddrOf(a) => {
            let at = check_expr(env, a, None)?;
            require_lvalue(a, line)?;
            MiniType::ptr_to(at)
        }
        ExprKind::Field(base, fname) => {
            let bt = check_expr(env, base, None)?;
            let sname = match bt {
                MiniType::Struct(n) => n,
                other => {
                    return Err(FrontendError::Type {
                        line,
                        col: e.col,
                        msg: format!("field access on non-struct {other:?}"),
                    })
                }
            };
            let sd = &env.prog.structs[&sname];
            if sd.opaque {
                return Err(FrontendError::Type {
                    line,
                    col: e.col,
                    msg: format!("cannot access fields of opaque struct `{sname}`"),
                });
            }
            sd.fields
                .iter()
                .find(|(n, _)| n == fname)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| FrontendError::Type {
                    line,
                    col: e.col,
                    msg: format!("no field `{fname}` in struct `{sname}`"),
                })?
        }
        ExprKind::Index(base, idx) => {
            let bt = check_expr(env, base, None)?;
            let it = check_expr(env, idx, Some(&MiniType::Int(IntType::U64)))?;
            require_int(&it, line)?;
            match bt {
                MiniType::Array(elem, _) => *elem,
                MiniType::Ptr(p) => match *p {
                    MiniType::Array(elem, _) => *elem,
                    MiniType::Void => {
                        return Err(FrontendError::Type {
                            line,
                            col: e.col,
                            msg: "cannot index *void".into(),
                        })
                    }
                    t => t,
                },
                other => {
                    return Err(FrontendError::Type {
                        line,
                        col: e.col,
                        msg: format!("cannot index {other:?}"),
                    })
                }
            }
        }
    };
    e.ty = ty.clone();
    Ok(ty)
}

fn check_same_scalar_or_ptr(
    prog: &Program,
    a: &mut Expr,
    b: &mut Expr,
    at: &MiniType,
    bt: &MiniType,
    op: BinOp,
    line: u32,
) -> TResult<()> {
    match (at, bt) {
        (MiniType::Int(x), MiniType::Int(y)) => {
            unify_int(a, b, at, bt, line)?;
            let _ = (x, y);
            Ok(())
        }
        (MiniType::Enum(x), MiniType::Enum(y)) if x == y => Ok(()),
        (MiniType::Enum(_), MiniType::Int(IntType { width: 32, .. }))
        | (MiniType::Int(IntType { width: 32, .. }), MiniType::Enum(_)) => Ok(()),
        (MiniType::Bool, MiniType::Bool) => Ok(()),
        (MiniType::Ptr(_), MiniType::Ptr(_)) | (MiniType::FnPtr(_), MiniType::FnPtr(_)) => {
            if matches!(op, BinOp::Eq | BinOp::Ne) && (assignable(prog, at, bt) || assignable(prog, bt, at)) {
                Ok(())
            } else {
                Err(FrontendError::Type {
                    line,
                    col: 0,
                    msg: "pointers support only ==/!= between compatible types".into(),
                })
            }
        }
        _ => Err(FrontendError::Type {
            line,
            col: 0,
            msg: format!("comparison between incompatible types {at:?} and {bt:?}"),
        }),
    }
}

/// Integer operands of a binary op must agree; bare literals adapt.
fn unify_int(a: &mut Expr, b: &mut Expr, at: &MiniType, bt: &MiniType, line: u32) -> TResult<MiniType> {
    if at == bt {
        return Ok(at.clone());
    }
    match (&a.kind, &b.kind) {
        (ExprKind::IntLit(_), _) if bt.is_int() => {
            a.ty = bt.clone();
            Ok(bt.clone())
        }
        (_, ExprKind::IntLit(_)) if at.is_int() => {
            b.ty = at.clone();
            Ok(at.clone())
        }
        _ => {
            // enums act as their underlying u32
            let au = if matches!(at, MiniType::Enum(_)) { MiniType::Int(IntType::U32) } else { at.clone() };
            let bu = if matches!(bt, MiniType::Enum(_)) { MiniType::Int(IntType::U32) } else { bt.clone() };
            if au == bu {
                Ok(au)
            } else {
                Err(FrontendError::Type {
                    line,
                    col: 0,
                    msg: format!("mismatched integer types {at:?} and {bt:?}; add an explicit cast"),
                })
            }
        }
    }
}
