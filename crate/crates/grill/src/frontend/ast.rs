//! Typed AST for MiniLang: a small imperative language with fixed-width
//! integers, structs, enums, arrays, pointers and function pointers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signedness {
    Signed,
    Unsigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntType {
    /// Width in bits: 8, 16, 32 or 64.
    pub width: u8,
    pub sign: Signedness,
}

impl IntType {
    pub const fn new(width: u8, sign: Signedness) -> Self {
        IntType { width, sign }
    }
    pub const I8: IntType = IntType::new(8, Signedness::Signed);
    pub const I16: IntType = IntType::new(16, Signedness::Signed);
    pub const I32: IntType = IntType::new(32, Signedness::Signed);
    pub const I64: IntType = IntType::new(64, Signedness::Signed);
    pub const U8: IntType = IntType::new(8, Signedness::Unsigned);
    pub const U16: IntType = IntType::new(16, Signedness::Unsigned);
    pub const U32: IntType = IntType::new(32, Signedness::Unsigned);
    pub const U64: IntType = IntType::new(64, Signedness::Unsigned);

    pub fn byte_width(&self) -> u64 {
        (self.width / 8) as u64
    }

    /// Wrap a raw 64-bit value into this type's value range.
    pub fn truncate(&self, v: u64) -> u64 {
        if self.width == 64 {
            v
        } else {
            v & ((1u64 << self.width) - 1)
        }
    }

    /// Sign- or zero-extend a value of this type to i64/u64 semantics.
    pub fn extend(&self, v: u64) -> u64 {
        let v = self.truncate(v);
        if self.sign == Signedness::Signed && self.width < 64 {
            let sign_bit = 1u64 << (self.width - 1);
            if v & sign_bit != 0 {
                return v | !((1u64 << self.width) - 1);
            }
        }
        v
    }

    pub fn name(&self) -> String {
        let s = match self.sign {
            Signedness::Signed => "i",
            Signedness::Unsigned => "u",
        };
        format!("{}{}", s, self.width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArraySize {
    Const(u64),
    /// Only legal as a pointer pointee (C-style decayed array).
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MiniType {
    Int(IntType),
    Bool,
    /// Named enum; lowered to its underlying integer type after type checking.
    Enum(String),
    Struct(String),
    Array(Box<MiniType>, ArraySize),
    Ptr(Box<MiniType>),
    FnPtr(Signature),
    /// Opaque pointee; only legal under `Ptr`.
    Void,
}

impl MiniType {
    pub fn ptr_to(t: MiniType) -> MiniType {
        MiniType::Ptr(Box::new(t))
    }
    pub fn is_ptr(&self) -> bool {
        matches!(self, MiniType::Ptr(_))
    }
    pub fn is_int(&self) -> bool {
        matches!(self, MiniType::Int(_))
    }
    pub fn pointee(&self) -> Option<&MiniType> {
        match self {
            MiniType::Ptr(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub params: Vec<MiniType>,
    pub ret: Option<Box<MiniType>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructDef {
    pub name: String,
    /// Ordered fields; empty plus `opaque == true` means an opaque declaration.
    pub fields: Vec<(String, MiniType)>,
    pub opaque: bool,
}

impl StructDef {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|(n, _)| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumDef {
    pub name: String,
    /// Variant name -> constant value (underlying type is u32).
    pub variants: Vec<(String, u64)>,
}

impl EnumDef {
    pub fn value_of(&self, variant: &str) -> Option<u64> {
        self.variants.iter().find(|(n, _)| n == variant).map(|(_, v)| *v)
    }
}

pub type StmtId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
    BitNot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LogAnd,
    LogOr,
}

impl BinOp {
    pub fn is_comparison(&self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExprKind {
    IntLit(u64),
    BoolLit(bool),
    /// String literal; evaluates to a pointer to a NUL-terminated global byte array.
    StrLit(String),
    NullLit,
    /// Resolved variable reference.
    Var(VarRef),
    /// `&func` — function address.
    FnRef(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `e as T`
    Cast(Box<Expr>, MiniType),
    /// `*e`
    Deref(Box<Expr>),
    /// `&place`
    AddrOf(Box<Expr>),
    /// `base.field` where base is a struct value, or `base->field` (sugar,
    /// stored as Field(Deref(base), field)).
    Field(Box<Expr>, String),
    /// `base[idx]` where base is an array value or a pointer.
    Index(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRef {
    /// Unresolved until type checking.
    Raw(String),
    Local(String),
    Param(String),
    Global(String),
    /// Enum constant, lowered to its integer value.
    EnumConst(String, String),
    /// Named compile-time constant.
    Const(String),
}

impl VarRef {
    pub fn name(&self) -> &str {
        match self {
            VarRef::Raw(n)
            | VarRef::Local(n)
            | VarRef::Param(n)
            | VarRef::Global(n)
            | VarRef::Const(n) => n,
            VarRef::EnumConst(_, v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expr {
    pub kind: ExprKind,
    /// Filled in by the type checker; `Void` before that.
    pub ty: MiniType,
    pub line: u32,
    pub col: u32,
}

impl Expr {
    pub fn new(kind: ExprKind, line: u32, col: u32) -> Self {
        Expr { kind, ty: MiniType::Void, line, col }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Callee {
    Func(String),
    Intrinsic(Intrinsic),
    /// Indirect call through a function-pointer expression.
    Ptr(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Intrinsic {
    /// `alloc(n)` — heap object of n bytes, zero-filled; never fails.
    Alloc,
    /// `free(p)`
    Free,
    /// `memcpy(dst, src, n)`
    Memcpy,
    /// `read_input(dst, n) -> u64` — fills up to n bytes from the input
    /// stream, returns the count actually read.
    ReadInput,
}

impl Intrinsic {
    pub fn name(&self) -> &'static str {
        match self {
            Intrinsic::Alloc => "alloc",
            Intrinsic::Free => "free",
            Intrinsic::Memcpy => "memcpy",
            Intrinsic::ReadInput => "read_input",
        }
    }
    pub fn from_name(s: &str) -> Option<Intrinsic> {
        match s {
            "alloc" => Some(Intrinsic::Alloc),
            "free" => Some(Intrinsic::Free),
            "memcpy" => Some(Intrinsic::Memcpy),
            "read_input" => Some(Intrinsic::ReadInput),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRv {
    pub callee: Callee,
    pub args: Vec<Expr>,
    /// Pretty-printed original function-pointer expression when this direct
    /// call was produced by indirect-call promotion.
    pub promoted_from: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Rvalue {
    Expr(Expr),
    Call(CallRv),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stmt {
    pub id: StmtId,
    pub kind: StmtKind,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    /// `let x: T;` or `let x: T = rv;`
    Let(String, MiniType, Option<Rvalue>),
    /// `place = rv;`
    Assign(Expr, Rvalue),
    /// Bare call for side effects.
    Expr(Rvalue),
    If(Expr, Block, Option<Block>),
    While(Expr, Block),
    /// `switch (e) { case K: {..} ... default: {..} }`
    Switch(Expr, Vec<(CaseValue, Block)>, Option<Block>),
    Return(Option<Expr>),
    Break,
}

pub type Block = Vec<Stmt>;

/// A switch case label: an integer literal, or a named constant / enum
/// variant that the type checker resolves to `Int`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CaseValue {
    Int(u64),
    Named(String),
}

impl CaseValue {
    pub fn value(&self) -> u64 {
        match self {
            CaseValue::Int(v) => *v,
            CaseValue::Named(n) => panic!("unresolved case label `{n}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<(String, MiniType)>,
    pub ret: Option<MiniType>,
    pub body: Block,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalDef {
    pub name: String,
    pub ty: MiniType,
    /// Optional scalar initializer (wider initializers start zeroed).
    pub init: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstDef {
    pub name: String,
    pub ty: IntType,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Program {
    pub structs: BTreeMap<String, StructDef>,
    pub enums: BTreeMap<String, EnumDef>,
    pub consts: BTreeMap<String, ConstDef>,
    pub globals: BTreeMap<String, GlobalDef>,
    pub functions: BTreeMap<String, FunctionDef>,
    /// Declaration order, used by the pretty-printer for canonical output.
    pub decl_order: Vec<(DeclKind, String)>,
    pub entry: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeclKind {
    Struct,
    Enum,
    Const,
    Global,
    Function,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.get(name)
    }

    /// Underlying integer type of `t` after enum lowering, if it has one.
    pub fn scalar_int(&self, t: &MiniType) -> Option<IntType> {
        match t {
            MiniType::Int(it) => Some(*it),
            MiniType::Bool => Some(IntType::U8),
            MiniType::Enum(_) => Some(IntType::U32),
            _ => None,
        }
    }

    /// Byte size of a type instance in memory.
    pub fn size_of(&self, t: &MiniType) -> u64 {
        match t {
            MiniType::Int(it) => it.byte_width(),
            MiniType::Bool => 1,
            MiniType::Enum(_) => 4,
            MiniType::Struct(name) => {
                let sd = &self.structs[name];
                sd.fields.iter().map(|(_, ft)| self.size_of(ft)).sum()
            }
            MiniType::Array(elem, ArraySize::Const(n)) => self.size_of(elem) * n,
            MiniType::Array(_, ArraySize::Unknown) => 0,
            MiniType::Ptr(_) | MiniType::FnPtr(_) => 8,
            MiniType::Void => 0,
        }
    }

    /// Byte offset of a named field within a struct.
    pub fn field_offset(&self, sd: &StructDef, field: &str) -> Option<u64> {
        let mut off = 0;
        for (n, ft) in &sd.fields {
            if n == field {
                return Some(off);
            }
            off += self.size_of(ft);
        }
        None
    }

    /// Assign statement ids sequentially in declaration / body order.
    /// Called after parsing and again after any program transformation.
    pub fn renumber(&mut self) {
        let mut next: StmtId = 0;
        let order: Vec<String> = self
            .decl_order
            .iter()
            .filter(|(k, _)| *k == DeclKind::Function)
            .map(|(_, n)| n.clone())
            .collect();
        for fname in order {
            if let Some(f) = self.functions.get_mut(&fname) {
                renumber_block(&mut f.body, &mut next);
            }
        }
    }

    /// Function containing a statement id, with a reference to the statement.
    pub fn find_stmt(&self, id: StmtId) -> Option<(&str, &Stmt)> {
        for (name, f) in &self.functions {
            if let Some(s) = find_in_block(&f.body, id) {
                return Some((name.as_str(), s));
            }
        }
        None
    }
}

fn renumber_block(block: &mut Block, next: &mut StmtId) {
    for st in block {
        st.id = *next;
        *next += 1;
        match &mut st.kind {
            StmtKind::If(_, t, e) => {
                renumber_block(t, next);
                if let Some(e) = e {
                    renumber_block(e, next);
                }
            }
            StmtKind::While(_, b) => renumber_block(b, next),
            StmtKind::Switch(_, cases, dflt) => {
                for (_, b) in cases {
                    renumber_block(b, next);
                }
                if let Some(b) = dflt {
                    renumber_block(b, next);
                }
            }
            _ => {}
        }
    }
}

fn find_in_block(block: &Block, id: StmtId) -> Option<&Stmt> {
    for st in block {
        if st.id == id {
            return Some(st);
        }
        let inner = match &st.kind {
            StmtKind::If(_, t, e) => {
                find_in_block(t, id).or_else(|| e.as_ref().and_then(|b| find_in_block(b, id)))
            }
            StmtKind::While(_, b) => find_in_block(b, id),
            StmtKind::Switch(_, cases, dflt) => cases
                .iter()
                .find_map(|(_, b)| find_in_block(b, id))
                .or_else(|| dflt.as_ref().and_then(|b| find_in_block(b, id))),
            _ => None,
        };
        if inner.is_some() {
            return inner;
        }
    }
    None
}

/// Walk every statement of a block in execution order, calling `f` on each.
pub fn visit_stmts<'a>(block: &'a Block, f: &mut dyn FnMut(&'a Stmt)) {
    for st in block {
        f(st);
        match &st.kind {
            StmtKind::If(_, t, e) => {
                visit_stmts(t, f);
                if let Some(e) = e {
                    visit_stmts(e, f);
                }
            }
            StmtKind::While(_, b) => visit_stmts(b, f),
            StmtKind::Switch(_, cases, dflt) => {
                for (_, b) in cases {
                    visit_stmts(b, f);
                }
                if let Some(b) = dflt {
                    visit_stmts(b, f);
                }
            }
            _ => {}
        }
    }
}

/// Walk every expression in a statement (not recursing into nested blocks).
pub fn visit_stmt_exprs<'a>(st: &'a Stmt, f: &mut dyn FnMut(&'a Expr)) {
    fn walk<'a>(e: &'a Expr, f: &mut dyn FnMut(&'a Expr)) {
        f(e);
        match &e.kind {
            ExprKind::Unary(_, a) => walk(a, f),
            ExprKind::Binary(_, a, b) => {
                walk(a, f);
                walk(b, f);
            }
            ExprKind::Cast(a, _) | ExprKind::Deref(a) | ExprKind::AddrOf(a) | ExprKind::Field(a, _) => {
                walk(a, f)
            }
            ExprKind::Index(a, b) => {
                walk(a, f);
                walk(b, f);
            }
            _ => {}
        }
    }
    let rv = |rv: &'a Rvalue, f: &mut dyn FnMut(&'a Expr)| match rv {
        Rvalue::Expr(e) => walk(e, f),
        Rvalue::Call(c) => {
            if let Callee::Ptr(e) = &c.callee {
                walk(e, f);
            }
            for a in &c.args {
                walk(a, f);
            }
        }
    };
    match &st.kind {
        StmtKind::Let(_, _, Some(r)) => rv(r, f),
        StmtKind::Let(_, _, None) => {}
        StmtKind::Assign(p, r) => {
            walk(p, f);
            rv(r, f);
        }
        StmtKind::Expr(r) => rv(r, f),
        StmtKind::If(c, _, _) | StmtKind::While(c, _) | StmtKind::Switch(c, _, _) => walk(c, f),
        StmtKind::Return(Some(e)) => walk(e, f),
        StmtKind::Return(None) | StmtKind::Break => {}
    }
}
