//! Canonical pretty-printer. The emitted text is the normal form used for
//! program hashing; parse -> print -> parse is a fixed point.

use super::ast::*;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (kind, name) in &p.decl_order {
        match kind {
            DeclKind::Struct => {
                let sd = &p.structs[name];
                if sd.opaque {
                    out.push_str(&format!("struct {};\n\n", sd.name));
                } else {
                    out.push_str(&format!("struct {} {{\n", sd.name));
                    for (f, t) in &sd.fields {
                        out.push_str(&format!("    {}: {},\n", f, print_type(t)));
                    }
                    out.push_str("}\n\n");
                }
            }
            DeclKind::Enum => {
                let ed = &p.enums[name];
                out.push_str(&format!("enum {} {{ ", ed.name));
                let vs: Vec<String> =
                    ed.variants.iter().map(|(n, v)| format!("{n} = {v}")).collect();
                out.push_str(&vs.join(", "));
                out.push_str(" }\n\n");
            }
            DeclKind::Const => {
                let cd = &p.consts[name];
                out.push_str(&format!("const {}: {} = {};\n\n", cd.name, cd.ty.name(), cd.value));
            }
            DeclKind::Global => {
                let gd = &p.globals[name];
                match gd.init {
                    Some(v) => out.push_str(&format!(
                        "global {}: {} = {};\n\n",
                        gd.name,
                        print_type(&gd.ty),
                        v
                    )),
                    None => out.push_str(&format!("global {}: {};\n\n", gd.name, print_type(&gd.ty))),
                }
            }
            DeclKind::Function => {
                let f = &p.functions[name];
                print_function(&mut out, f);
                out.push('\n');
            }
        }
    }
    out
}

pub fn print_type(t: &MiniType) -> String {
    match t {
        MiniType::Int(it) => it.name(),
        MiniType::Bool => "bool".into(),
        MiniType::Enum(n) | MiniType::Struct(n) => n.clone(),
        MiniType::Array(elem, size) => {
            let base = match &**elem {
                // parenthesize pointer/fn elements so the suffix binds right
                MiniType::Ptr(_) | MiniType::FnPtr(_) => format!("({})", print_type(elem)),
                _ => print_type(elem),
            };
            match size {
                ArraySize::Const(n) => format!("{base}[{n}]"),
                ArraySize::Unknown => format!("{base}[?]"),
            }
        }
        MiniType::Ptr(p) => format!("*{}", print_type(p)),
        MiniType::FnPtr(sig) => {
            let ps: Vec<String> = sig.params.iter().map(print_type).collect();
            match &sig.ret {
                Some(r) => format!("fn({}) -> {}", ps.join(", "), print_type(r)),
                None => format!("fn({})", ps.join(", ")),
            }
        }
        MiniType::Void => "void".into(),
    }
}

fn print_function(out: &mut String, f: &FunctionDef) {
    let ps: Vec<String> =
        f.params.iter().map(|(n, t)| format!("{}: {}", n, print_type(t))).collect();
    match &f.ret {
        Some(r) => out.push_str(&format!("fn {}({}) -> {} {{\n", f.name, ps.join(", "), print_type(r))),
        None => out.push_str(&format!("fn {}({}) {{\n", f.name, ps.join(", "))),
    }
    print_block(out, &f.body, 1);
    out.push_str("}\n");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_block(out: &mut String, b: &Block, depth: usize) {
    for st in b {
        print_stmt(out, st, depth);
    }
}

fn print_stmt(out: &mut String, st: &Stmt, depth: usize) {
    indent(out, depth);
    match &st.kind {
        StmtKind::Let(n, t, rv) => match rv {
            Some(rv) => out.push_str(&format!("let {}: {} = {};\n", n, print_type(t), print_rvalue(rv))),
            None => out.push_str(&format!("let {}: {};\n", n, print_type(t))),
        },
        StmtKind::Assign(p, rv) => {
            out.push_str(&format!("{} = {};\n", print_expr(p), print_rvalue(rv)))
        }
        StmtKind::Expr(rv) => out.push_str(&format!("{};\n", print_rvalue(rv))),
        StmtKind::If(c, t, e) => {
            out.push_str(&format!("if ({}) {{\n", print_expr(c)));
            print_block(out, t, depth + 1);
            indent(out, depth);
            match e {
                Some(e) => {
                    out.push_str("} else {\n");
                    print_block(out, e, depth + 1);
                    indent(out, depth);
                    out.push_str("}\n");
                }
                None => out.push_str("}\n"),
            }
        }
        StmtKind::While(c, b) => {
            out.push_str(&format!("while ({}) {{\n", print_expr(c)));
            print_block(out, b, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Switch(c, cases, dflt) => {
            out.push_str(&format!("switch ({}) {{\n", print_expr(c)));
            for (v, b) in cases {
                indent(out, depth);
                match v {
                    CaseValue::Int(v) => out.push_str(&format!("case {v}: {{\n")),
                    CaseValue::Named(n) => out.push_str(&format!("case {n}: {{\n")),
                }
                print_block(out, b, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
            if let Some(b) = dflt {
                indent(out, depth);
                out.push_str("default: {\n");
                print_block(out, b, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Return(Some(e)) => out.push_str(&format!("return {};\n", print_expr(e))),
        StmtKind::Return(None) => out.push_str("return;\n"),
        StmtKind::Break => out.push_str("break;\n"),
    }
}

fn print_rvalue(rv: &Rvalue) -> String {
    match rv {
        Rvalue::Expr(e) => print_expr(e),
        Rvalue::Call(c) => print_call(c),
    }
}

pub fn print_call(c: &CallRv) -> String {
    let args: Vec<String> = c.args.iter().map(print_expr).collect();
    let callee = match &c.callee {
        Callee::Func(n) => n.clone(),
        Callee::Intrinsic(i) => i.name().to_string(),
        Callee::Ptr(e) => print_expr_prec(e, 14),
    };
    format!("{}({})", callee, args.join(", "))
}

pub fn print_expr(e: &Expr) -> String {
    print_expr_prec(e, 0)
}

fn bin_prec(op: BinOp) -> u8 {
    match op {
        BinOp::LogOr => 1,
        BinOp::LogAnd => 2,
        BinOp::BitOr => 3,
        BinOp::BitXor => 4,
        BinOp::BitAnd => 5,
        BinOp::Eq | BinOp::Ne => 6,
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 7,
        BinOp::Shl | BinOp::Shr => 8,
        BinOp::Add | BinOp::Sub => 9,
        BinOp::Mul | BinOp::Div | BinOp::Rem => 10,
    }
}

fn bin_sym(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Rem => "%",
        BinOp::BitAnd => "&",
        BinOp::BitOr => "|",
        BinOp::BitXor => "^",
        BinOp::Shl => "<<",
        BinOp::Shr => ">>",
        BinOp::Eq => "==",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Gt => ">",
        BinOp::Ge => ">=",
        BinOp::LogAnd => "&&",
        BinOp::LogOr => "||",
    }
}

fn print_expr_prec(e: &Expr, min: u8) -> String {
    let (s, prec) = match &e.kind {
        ExprKind::IntLit(v) => (format!("{v}"), 15),
        ExprKind::BoolLit(b) => (format!("{b}"), 15),
        ExprKind::StrLit(s) => {
            let mut t = String::from("\"");
            for ch in s.chars() {
                match ch {
                    '\n' => t.push_str("\\n"),
                    '\t' => t.push_str("\\t"),
                    '\0' => t.push_str("\\0"),
                    '\\' => t.push_str("\\\\"),
                    '"' => t.push_str("\\\""),
                    c => t.push(c),
                }
            }
            t.push('"');
            (t, 15)
        }
        ExprKind::NullLit => ("null".into(), 15),
        ExprKind::Var(vr) => (vr.name().to_string(), 15),
        ExprKind::FnRef(n) => (n.clone(), 15),
        ExprKind::Unary(op, a) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
                UnOp::BitNot => "~",
            };
            (format!("{}{}", sym, print_expr_prec(a, 12)), 12)
        }
        ExprKind::Binary(op, a, b) => {
            let p = bin_prec(*op);
            (
                format!(
                    "{} {} {}",
                    print_expr_prec(a, p),
                    bin_sym(*op),
                    print_expr_prec(b, p + 1)
                ),
                p,
            )
        }
        ExprKind::Cast(a, t) => (format!("{} as {}", print_expr_prec(a, 13), print_type(t)), 13),
        // `(*p).f` prints back as `p->f`
        ExprKind::Field(base, f) => match &base.kind {
            ExprKind::Deref(inner) => (format!("{}->{}", print_expr_prec(inner, 14), f), 14),
            _ => (format!("{}.{}", print_expr_prec(base, 14), f), 14),
        },
        ExprKind::Deref(a) => (format!("*{}", print_expr_prec(a, 12)), 12),
        ExprKind::AddrOf(a) => (format!("&{}", print_expr_prec(a, 12)), 12),
        ExprKind::Index(a, i) => {
            (format!("{}[{}]", print_expr_prec(a, 14), print_expr_prec(i, 0)), 14)
        }
    };
    if prec < min {
        format!("({s})")
    } else {
        s
    }
}
