//! MiniLang frontend: lexer, parser, type checker, canonical printer, call
//! graph and indirect-call promotion.

pub mod ast;
pub mod callgraph;
pub mod parser;
pub mod pretty;
pub mod token;
pub mod typeck;

use thiserror::Error;

pub use ast::*;
pub use callgraph::{build_call_graph, enumerate_paths, promote_indirect_calls, CallEdge, CallGraph, CallSite, Promotion};
pub use pretty::{print_expr, print_program, print_type};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("type error at line {line}: {msg}")]
    Type { line: u32, col: u32, msg: String },
    #[error("duplicate {what} `{name}`")]
    Duplicate { what: String, name: String },
    #[error("no entry function `{name}`")]
    NoEntry { name: String },
}

impl FrontendError {
    pub fn syntax(line: u32, col: u32, msg: impl Into<String>) -> Self {
        FrontendError::Syntax { line, col, msg: msg.into() }
    }

    pub fn in_context(self, ctx: &str) -> Self {
        match self {
            FrontendError::Type { line, col, msg } => {
                FrontendError::Type { line, col, msg: format!("{msg} (in {ctx})") }
            }
            other => other,
        }
    }
}

/// Parses and type checks MiniLang source into a typed `Program` with
/// statement ids assigned.
pub fn parse_program(source: &str) -> Result<Program, FrontendError> {
    let mut parser = parser::Parser::new(source)?;
    let mut p = parser.parse_program()?;
    typeck::check_program(&mut p)?;
    p.renumber();
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUNNING_EXAMPLE: &str = include_str!("../../tests/corpus/running_example.mini");

    #[test]
    fn parses_running_example() {
        let p = parse_program(RUNNING_EXAMPLE).unwrap();
        assert_eq!(p.functions.len(), 4);
        assert!(p.functions.contains_key("add_elem"));
        assert!(p.functions.contains_key("process_req"));
        assert!(p.functions.contains_key("handle_req"));
        assert!(p.functions.contains_key("main"));
        assert_eq!(p.globals.len(), 1);
        assert!(p.globals.contains_key("gp"));
    }

    #[test]
    fn empty_translation_unit_has_no_entry() {
        let err = parse_program("").unwrap_err();
        assert!(matches!(err, FrontendError::NoEntry { .. }));
    }

    #[test]
    fn undeclared_call_is_a_type_error() {
        let src = "fn main() { missing(); }";
        let err = parse_program(src).unwrap_err();
        match err {
            FrontendError::Type { msg, .. } => assert!(msg.contains("missing")),
            other => panic!("expected type error, got {other:?}"),
        }
    }

    #[test]
    fn pretty_print_is_a_fixed_point() {
        let p1 = parse_program(RUNNING_EXAMPLE).unwrap();
        let text1 = print_program(&p1);
        let p2 = parse_program(&text1).unwrap();
        let text2 = print_program(&p2);
        // canonical text is stable, and statement ids land identically
        assert_eq!(text1, text2);
        let ids = |p: &Program| {
            let mut v = Vec::new();
            for f in p.functions.values() {
                visit_stmts(&f.body, &mut |s| v.push(s.id));
            }
            v
        };
        assert_eq!(ids(&p1), ids(&p2));
    }

    #[test]
    fn call_graph_of_running_example() {
        let p = parse_program(RUNNING_EXAMPLE).unwrap();
        let g = build_call_graph(&p);
        let pairs: Vec<(String, String)> =
            g.edges.iter().map(|e| (e.caller.clone(), e.callee.clone())).collect();
        assert!(pairs.contains(&("main".into(), "handle_req".into())));
        assert!(pairs.contains(&("handle_req".into(), "process_req".into())));
        assert!(pairs.contains(&("process_req".into(), "add_elem".into())));
        assert_eq!(pairs.len(), 3);
        // two call sites of add_elem collapse into the single edge
        let e = g.edge("process_req", "add_elem").unwrap();
        assert_eq!(e.callsites.len(), 2);
    }

    #[test]
    fn leaf_only_program_has_empty_graph() {
        let p = parse_program("fn main() { let x: u32 = 1; }").unwrap();
        let g = build_call_graph(&p);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn paths_in_running_example() {
        let p = parse_program(RUNNING_EXAMPLE).unwrap();
        let g = build_call_graph(&p);
        let paths = enumerate_paths(&g, "main", "add_elem");
        assert_eq!(paths.len(), 1);
        let names: Vec<(String, String)> =
            paths[0].iter().map(|e| (e.caller.clone(), e.callee.clone())).collect();
        assert_eq!(
            names,
            vec![
                ("main".to_string(), "handle_req".to_string()),
                ("handle_req".to_string(), "process_req".to_string()),
                ("process_req".to_string(), "add_elem".to_string()),
            ]
        );
    }

    #[test]
    fn target_equals_root_gives_one_empty_path() {
        let p = parse_program(RUNNING_EXAMPLE).unwrap();
        let g = build_call_graph(&p);
        let paths = enumerate_paths(&g, "main", "main");
        assert_eq!(paths, vec![Vec::new()]);
    }

    #[test]
    fn cycle_uses_each_edge_once() {
        let src = r#"
fn a(n: u32) {
    if (n > 0) {
        b(n - 1);
    }
}
fn b(n: u32) {
    if (n > 1) {
        a(n - 1);
    }
}
fn main() {
    a(4);
}
"#;
        let p = parse_program(src).unwrap();
        let g = build_call_graph(&p);
        let paths = enumerate_paths(&g, "a", "b");
        // (a,b) alone; (a,b)(b,a) never revisits (a,b)
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].len(), 1);
        let via_main = enumerate_paths(&g, "main", "b");
        assert_eq!(via_main.len(), 1);
        assert_eq!(via_main[0].len(), 2);
    }

    #[test]
    fn promotion_finds_address_taken_matching_candidates() {
        let src = r#"
fn inc(x: u32) -> u32 {
    return x + 1;
}
fn dec(x: u32) -> u32 {
    return x - 1;
}
fn wrong_arity(x: u32, y: u32) -> u32 {
    return x + y;
}
fn main(sel: u8, v: u32) {
    let f: fn(u32) -> u32 = inc;
    if (sel > 7) {
        f = dec;
    }
    let r: u32 = f(v);
}
"#;
        let p = parse_program(src).unwrap();
        let (promoted, promos) = promote_indirect_calls(&p);
        assert_eq!(promos.len(), 1);
        assert!(!promos[0].unresolved);
        assert_eq!(promos[0].candidates, vec!["dec".to_string(), "inc".to_string()]);
        // wrong_arity's signature does not match the call site
        assert!(!promos[0].candidates.contains(&"wrong_arity".to_string()));
        let g = build_call_graph(&promoted);
        let inc_edge = g.edge("main", "inc").unwrap();
        assert!(inc_edge.promoted);
        assert!(inc_edge.fp_expr.is_some());
        assert!(g.edge("main", "dec").is_some());
    }

    #[test]
    fn no_function_pointers_is_identity() {
        let p = parse_program(RUNNING_EXAMPLE).unwrap();
        let (promoted, promos) = promote_indirect_calls(&p);
        assert!(promos.is_empty());
        assert_eq!(print_program(&promoted), print_program(&p));
    }

    #[test]
    fn indirect_call_with_no_candidates_is_unresolved() {
        let src = r#"
fn helper(x: u32) -> u32 {
    return x;
}
fn main(v: u32) {
    let f: fn(u32, u32) -> u32;
    let r: u32 = f(v, v);
}
"#;
        // no address-taken function matches fn(u32,u32)->u32
        let p = parse_program(src).unwrap();
        let (promoted, promos) = promote_indirect_calls(&p);
        assert_eq!(promos.len(), 1);
        assert!(promos[0].unresolved);
        let g = build_call_graph(&promoted);
        assert!(g.edges.is_empty());
    }
}
