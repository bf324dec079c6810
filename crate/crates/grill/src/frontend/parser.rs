//! Recursive-descent parser for MiniLang source text.

use super::ast::*;
use super::token::{lex, Spanned, Tok};
use super::FrontendError;

pub struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    pub fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((0, 0))
    }

    fn bump(&mut self) -> PResult<Spanned> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| FrontendError::syntax(0, 0, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: &Tok) -> PResult<Spanned> {
        let (line, col) = self.here();
        let got = self.bump()?;
        if &got.tok == t {
            Ok(got)
        } else {
            Err(FrontendError::syntax(line, col, format!("expected {t:?}, found {:?}", got.tok)))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, u32, u32)> {
        let (line, col) = self.here();
        match self.bump()?.tok {
            Tok::Ident(s) => Ok((s, line, col)),
            other => Err(FrontendError::syntax(line, col, format!("expected identifier, found {other:?}"))),
        }
    }

    fn kw(&mut self, word: &str) -> bool {
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == word {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    pub fn parse_program(&mut self) -> PResult<Program> {
        let mut p = Program { entry: "main".to_string(), ..Default::default() };
        while self.peek().is_some() {
            let (line, col) = self.here();
            let (word, _, _) = self.expect_ident()?;
            match word.as_str() {
                "struct" => {
                    let sd = self.parse_struct()?;
                    if p.structs.contains_key(&sd.name) {
                        return Err(FrontendError::Duplicate { what: "struct".into(), name: sd.name });
                    }
                    p.decl_order.push((DeclKind::Struct, sd.name.clone()));
                    p.structs.insert(sd.name.clone(), sd);
                }
                "enum" => {
                    let ed = self.parse_enum()?;
                    if p.enums.contains_key(&ed.name) {
                        return Err(FrontendError::Duplicate { what: "enum".into(), name: ed.name });
                    }
                    p.decl_order.push((DeclKind::Enum, ed.name.clone()));
                    p.enums.insert(ed.name.clone(), ed);
                }
                "const" => {
                    let cd = self.parse_const()?;
                    if p.consts.contains_key(&cd.name) {
                        return Err(FrontendError::Duplicate { what: "const".into(), name: cd.name });
                    }
                    p.decl_order.push((DeclKind::Const, cd.name.clone()));
                    p.consts.insert(cd.name.clone(), cd);
                }
                "global" => {
                    let gd = self.parse_global()?;
                    if p.globals.contains_key(&gd.name) {
                        return Err(FrontendError::Duplicate { what: "global".into(), name: gd.name });
                    }
                    p.decl_order.push((DeclKind::Global, gd.name.clone()));
                    p.globals.insert(gd.name.clone(), gd);
                }
                "fn" => {
                    let fd = self.parse_function(line)?;
                    if p.functions.contains_key(&fd.name) {
                        return Err(FrontendError::Duplicate { what: "function".into(), name: fd.name });
                    }
                    p.decl_order.push((DeclKind::Function, fd.name.clone()));
                    p.functions.insert(fd.name.clone(), fd);
                }
                other => {
                    return Err(FrontendError::syntax(
                        line,
                        col,
                        format!("expected top-level declaration, found `{other}`"),
                    ))
                }
            }
        }
        Ok(p)
    }

    fn parse_struct(&mut self) -> PResult<StructDef> {
        let (name, _, _) = self.expect_ident()?;
        if self.eat(&Tok::Semi) {
            return Ok(StructDef { name, fields: Vec::new(), opaque: true });
        }
        self.expect(&Tok::LBrace)?;
        let mut fields = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let (fname, line, col) = self.expect_ident()?;
            self.expect(&Tok::Colon)?;
            let ty = self.parse_type()?;
            if fields.iter().any(|(n, _)| n == &fname) {
                return Err(FrontendError::syntax(line, col, format!("duplicate field `{fname}`")));
            }
            fields.push((fname, ty));
            if !self.eat(&Tok::Comma) {
                self.expect(&Tok::RBrace)?;
                break;
            }
        }
        Ok(StructDef { name, fields, opaque: false })
    }

    fn parse_enum(&mut self) -> PResult<EnumDef> {
        let (name, _, _) = self.expect_ident()?;
        self.expect(&Tok::LBrace)?;
        let mut variants: Vec<(String, u64)> = Vec::new();
        let mut next = 0u64;
        while !self.eat(&Tok::RBrace) {
            let (vname, line, col) = self.expect_ident()?;
            let value = if self.eat(&Tok::Assign) {
                match self.bump()?.tok {
                    Tok::Int(v) => v,
                    other => {
                        return Err(FrontendError::syntax(line, col, format!("expected integer, found {other:?}")))
                    }
                }
            } else {
                next
            };
            next = value + 1;
            if variants.iter().any(|(n, _)| n == &vname) {
                return Err(FrontendError::syntax(line, col, format!("duplicate variant `{vname}`")));
            }
            variants.push((vname, value));
            if !self.eat(&Tok::Comma) {
                self.expect(&Tok::RBrace)?;
                break;
            }
        }
        Ok(EnumDef { name, variants })
    }

    fn parse_const(&mut self) -> PResult<ConstDef> {
        let (name, line, col) = self.expect_ident()?;
        self.expect(&Tok::Colon)?;
        let ty = self.parse_type()?;
        let it = match ty {
            MiniType::Int(it) => it,
            _ => return Err(FrontendError::syntax(line, col, "const type must be an integer")),
        };
        self.expect(&Tok::Assign)?;
        let v = match self.bump()?.tok {
            Tok::Int(v) => v,
            other => return Err(FrontendError::syntax(line, col, format!("expected integer, found {other:?}"))),
        };
        self.expect(&Tok::Semi)?;
        Ok(ConstDef { name, ty: it, value: it.truncate(v) })
    }

    fn parse_global(&mut self) -> PResult<GlobalDef> {
        let (name, line, col) = self.expect_ident()?;
        self.expect(&Tok::Colon)?;
        let ty = self.parse_type()?;
        let init = if self.eat(&Tok::Assign) {
            match self.bump()?.tok {
                Tok::Int(v) => Some(v),
                other => return Err(FrontendError::syntax(line, col, format!("expected integer, found {other:?}"))),
            }
        } else {
            None
        };
        self.expect(&Tok::Semi)?;
        Ok(GlobalDef { name, ty, init })
    }

    fn parse_function(&mut self, line: u32) -> PResult<FunctionDef> {
        let (name, _, _) = self.expect_ident()?;
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let (pname, _, _) = self.expect_ident()?;
                self.expect(&Tok::Colon)?;
                let ty = self.parse_type()?;
                params.push((pname, ty));
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        let ret = if self.eat(&Tok::Arrow) { Some(self.parse_type()?) } else { None };
        let body = self.parse_block()?;
        Ok(FunctionDef { name, params, ret, body, line })
    }

    pub fn parse_type(&mut self) -> PResult<MiniType> {
        if self.eat(&Tok::Star) {
            let inner = self.parse_type()?;
            return Ok(MiniType::ptr_to(inner));
        }
        let (line, col) = self.here();
        let mut base = if self.eat(&Tok::LParen) {
            let t = self.parse_type()?;
            self.expect(&Tok::RParen)?;
            t
        } else {
            let (word, _, _) = self.expect_ident()?;
            match word.as_str() {
                "i8" => MiniType::Int(IntType::I8),
                "i16" => MiniType::Int(IntType::I16),
                "i32" => MiniType::Int(IntType::I32),
                "i64" => MiniType::Int(IntType::I64),
                "u8" => MiniType::Int(IntType::U8),
                "u16" => MiniType::Int(IntType::U16),
                "u32" => MiniType::Int(IntType::U32),
                "u64" => MiniType::Int(IntType::U64),
                "bool" => MiniType::Bool,
                "void" => MiniType::Void,
                "fn" => {
                    self.expect(&Tok::LParen)?;
                    let mut ps = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            ps.push(self.parse_type()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(&Tok::Comma)?;
                        }
                    }
                    let ret =
                        if self.eat(&Tok::Arrow) { Some(Box::new(self.parse_type()?)) } else { None };
                    MiniType::FnPtr(Signature { params: ps, ret })
                }
                // struct or enum name; disambiguated during type checking
                _ => MiniType::Struct(word),
            }
        };
        while self.eat(&Tok::LBracket) {
            let size = if self.eat(&Tok::Question) {
                ArraySize::Unknown
            } else {
                match self.bump()?.tok {
                    Tok::Int(v) => ArraySize::Const(v),
                    other => {
                        return Err(FrontendError::syntax(line, col, format!("expected array size, found {other:?}")))
                    }
                }
            };
            self.expect(&Tok::RBracket)?;
            base = MiniType::Array(Box::new(base), size);
        }
        Ok(base)
    }

    fn parse_block(&mut self) -> PResult<Block> {
        self.expect(&Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            stmts.push(self.parse_stmt()?);
        }
        Ok(stmts)
    }

    fn parse_stmt(&mut self) -> PResult<Stmt> {
        let (line, _col) = self.here();
        let mk = |kind| Stmt { id: 0, kind, line };
        if self.kw("let") {
            let (name, _, _) = self.expect_ident()?;
            self.expect(&Tok::Colon)?;
            let ty = self.parse_type()?;
            let init = if self.eat(&Tok::Assign) { Some(self.parse_rvalue()?) } else { None };
            self.expect(&Tok::Semi)?;
            return Ok(mk(StmtKind::Let(name, ty, init)));
        }
        if self.kw("if") {
            self.expect(&Tok::LParen)?;
            let cond = self.parse_expr()?;
            self.expect(&Tok::RParen)?;
            let then = self.parse_block()?;
            let els = if self.kw("else") {
                if let Some(Tok::Ident(w)) = self.peek() {
                    if w == "if" {
                        // `else if` sugar: wrap the chained if in a block
                        let st = self.parse_stmt()?;
                        Some(vec![st])
                    } else {
                        Some(self.parse_block()?)
                    }
                } else {
                    Some(self.parse_block()?)
                }
            } else {
                None
            };
            return Ok(mk(StmtKind::If(cond, then, els)));
        }
        if self.kw("while") {
            self.expect(&Tok::LParen)?;
            let cond = self.parse_expr()?;
            self.expect(&Tok::RParen)?;
            let body = self.parse_block()?;
            return Ok(mk(StmtKind::While(cond, body)));
        }
        if self.kw("switch") {
            self.expect(&Tok::LParen)?;
            let scrut = self.parse_expr()?;
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::LBrace)?;
            let mut cases = Vec::new();
            let mut dflt = None;
            while !self.eat(&Tok::RBrace) {
                let (w, l, c) = self.expect_ident()?;
                match w.as_str() {
                    "case" => {
                        let label = match self.bump()?.tok {
                            Tok::Int(v) => CaseValue::Int(v),
                            Tok::Ident(name) => CaseValue::Named(name),
                            other => {
                                return Err(FrontendError::syntax(l, c, format!("bad case label {other:?}")))
                            }
                        };
                        self.expect(&Tok::Colon)?;
                        let body = self.parse_block()?;
                        cases.push((label, body));
                    }
                    "default" => {
                        self.expect(&Tok::Colon)?;
                        dflt = Some(self.parse_block()?);
                    }
                    other => {
                        return Err(FrontendError::syntax(l, c, format!("expected case/default, found `{other}`")))
                    }
                }
            }
            return Ok(mk(StmtKind::Switch(scrut, cases, dflt)));
        }
        if self.kw("return") {
            if self.eat(&Tok::Semi) {
                return Ok(mk(StmtKind::Return(None)));
            }
            let e = self.parse_expr()?;
            self.expect(&Tok::Semi)?;
            return Ok(mk(StmtKind::Return(Some(e))));
        }
        if self.kw("break") {
            self.expect(&Tok::Semi)?;
            return Ok(mk(StmtKind::Break));
        }
        // assignment, bare call, or expression statement
        let first = self.parse_expr_or_call()?;
        match first {
            ExprOrCall::Call(c) => {
                self.expect(&Tok::Semi)?;
                Ok(mk(StmtKind::Expr(Rvalue::Call(c))))
            }
            ExprOrCall::Expr(place) => {
                self.expect(&Tok::Assign)?;
                let rv = self.parse_rvalue()?;
                self.expect(&Tok::Semi)?;
                Ok(mk(StmtKind::Assign(place, rv)))
            }
        }
    }

    fn parse_rvalue(&mut self) -> PResult<Rvalue> {
        match self.parse_expr_or_call()? {
            ExprOrCall::Call(c) => Ok(Rvalue::Call(c)),
            ExprOrCall::Expr(e) => Ok(Rvalue::Expr(e)),
        }
    }

    /// Parses either a call (callee followed by an argument list) or an
    /// ordinary expression. Calls never nest inside expressions.
    fn parse_expr_or_call(&mut self) -> PResult<ExprOrCall> {
        let e = self.parse_expr()?;
        if self.peek() == Some(&Tok::LParen) {
            self.bump()?;
            let mut args = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    args.push(self.parse_expr()?);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(&Tok::Comma)?;
                }
            }
            let callee = match &e.kind {
                ExprKind::Var(VarRef::Raw(name)) => match Intrinsic::from_name(name) {
                    Some(i) => Callee::Intrinsic(i),
                    None => Callee::Func(name.clone()),
                },
                _ => Callee::Ptr(Box::new(e)),
            };
            return Ok(ExprOrCall::Call(CallRv { callee, args, promoted_from: None }));
        }
        Ok(ExprOrCall::Expr(e))
    }

    pub fn parse_expr(&mut self) -> PResult<Expr> {
        self.parse_bin(0)
    }

    fn parse_bin(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let (op, prec) = match self.peek() {
                Some(Tok::OrOr) => (BinOp::LogOr, 1),
                Some(Tok::AndAnd) => (BinOp::LogAnd, 2),
                Some(Tok::Pipe) => (BinOp::BitOr, 3),
                Some(Tok::Caret) => (BinOp::BitXor, 4),
                Some(Tok::Amp) => (BinOp::BitAnd, 5),
                Some(Tok::EqEq) => (BinOp::Eq, 6),
                Some(Tok::NotEq) => (BinOp::Ne, 6),
                Some(Tok::Lt) => (BinOp::Lt, 7),
                Some(Tok::Le) => (BinOp::Le, 7),
                Some(Tok::Gt) => (BinOp::Gt, 7),
                Some(Tok::Ge) => (BinOp::Ge, 7),
                Some(Tok::Shl) => (BinOp::Shl, 8),
                Some(Tok::Shr) => (BinOp::Shr, 8),
                Some(Tok::Plus) => (BinOp::Add, 9),
                Some(Tok::Minus) => (BinOp::Sub, 9),
                Some(Tok::Star) => (BinOp::Mul, 10),
                Some(Tok::Slash) => (BinOp::Div, 10),
                Some(Tok::Percent) => (BinOp::Rem, 10),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            let (line, col) = self.here();
            self.bump()?;
            let rhs = self.parse_bin(prec + 1)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), line, col);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        let (line, col) = self.here();
        if self.eat(&Tok::Minus) {
            let e = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), line, col));
        }
        if self.eat(&Tok::Bang) {
            let e = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), line, col));
        }
        if self.eat(&Tok::Tilde) {
            let e = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::BitNot, Box::new(e)), line, col));
        }
        if self.eat(&Tok::Star) {
            let e = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Deref(Box::new(e)), line, col));
        }
        if self.eat(&Tok::Amp) {
            let e = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::AddrOf(Box::new(e)), line, col));
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let mut e = self.parse_primary()?;
        loop {
            let (line, col) = self.here();
            if self.eat(&Tok::LBracket) {
                let idx = self.parse_expr()?;
                self.expect(&Tok::RBracket)?;
                e = Expr::new(ExprKind::Index(Box::new(e), Box::new(idx)), line, col);
            } else if self.eat(&Tok::Dot) {
                let (f, _, _) = self.expect_ident()?;
                e = Expr::new(ExprKind::Field(Box::new(e), f), line, col);
            } else if self.eat(&Tok::Arrow) {
                let (f, _, _) = self.expect_ident()?;
                let deref = Expr::new(ExprKind::Deref(Box::new(e)), line, col);
                e = Expr::new(ExprKind::Field(Box::new(deref), f), line, col);
            } else if let Some(Tok::Ident(w)) = self.peek() {
                if w == "as" {
                    self.bump()?;
                    let ty = self.parse_type()?;
                    e = Expr::new(ExprKind::Cast(Box::new(e), ty), line, col);
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let (line, col) = self.here();
        match self.bump()?.tok {
            Tok::Int(v) => Ok(Expr::new(ExprKind::IntLit(v), line, col)),
            Tok::Str(s) => Ok(Expr::new(ExprKind::StrLit(s), line, col)),
            Tok::Ident(w) => match w.as_str() {
                "true" => Ok(Expr::new(ExprKind::BoolLit(true), line, col)),
                "false" => Ok(Expr::new(ExprKind::BoolLit(false), line, col)),
                "null" => Ok(Expr::new(ExprKind::NullLit, line, col)),
                _ => Ok(Expr::new(ExprKind::Var(VarRef::Raw(w)), line, col)),
            },
            Tok::LParen => {
                let e = self.parse_expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            other => Err(FrontendError::syntax(line, col, format!("unexpected token {other:?}"))),
        }
    }
}

enum ExprOrCall {
    Expr(Expr),
    Call(CallRv),
}
