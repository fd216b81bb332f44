//! Parser for `.tl` sources.
//!
//! Parsing runs in two stages: a recursive-descent pass producing a raw
//! syntax tree with unresolved paths, then name resolution into a
//! [`Context`]. Declarations may refer to symbols declared later in the
//! file.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(String),
    Unexpected { expected: Vec<String>, found: String },
    UnresolvedSymbol(String),
    DuplicateSymbol(String),
    UndeclaredAssoc { trait_path: String, assoc: String },
    WrongSymbolKind { path: String, expected: &'static str },
    InferVarOutsideGoal,
    Invalid(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lexical(msg) => f.write_str(msg),
            ParseErrorKind::Unexpected { expected, found } => {
                if expected.len() == 1 {
                    write!(f, "expected {}, found {found}", expected[0])
                } else {
                    write!(f, "expected one of {}, found {found}", expected.join(", "))
                }
            }
            ParseErrorKind::UnresolvedSymbol(path) => write!(f, "cannot find `{path}` in this scope"),
            ParseErrorKind::DuplicateSymbol(path) => write!(f, "`{path}` is defined multiple times"),
            ParseErrorKind::UndeclaredAssoc { trait_path, assoc } => {
                write!(f, "associated type `{assoc}` is not declared in trait `{trait_path}`")
            }
            ParseErrorKind::WrongSymbolKind { path, expected } => write!(f, "expected {expected}, found `{path}`"),
            ParseErrorKind::InferVarOutsideGoal => f.write_str("inference variables are only allowed in goals"),
            ParseErrorKind::Invalid(msg) => f.write_str(msg),
        }
    }
}

/// Parses a `.tl` source. Declarations marked `extern` (directly or through
/// an enclosing `extern mod`) get [`Provenance::External`]; all others get
/// `provenance_default`.
pub fn parse_context(source: &str, file: &str, provenance_default: Provenance) -> Result<Context, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        toks: tokens,
        pos: 0,
        expected: BTreeSet::new(),
    };
    let mut items = Vec::new();
    parser.items(&[], false, &mut items)?;
    Resolver::new(file, provenance_default).run(items)
}

// ---------------------------------------------------------------------------
// Raw syntax

#[derive(Clone, Debug)]
struct Pos {
    line: u32,
    column: u32,
}

#[derive(Clone, Debug)]
struct RawPath {
    /// Written with a leading `::`: resolved from the root only.
    absolute: bool,
    segs: Vec<String>,
    pos: Pos,
}

impl RawPath {
    fn joined(&self) -> String {
        self.segs.join("::")
    }
}

#[derive(Clone, Debug)]
enum RawArg {
    Type(RawType),
    Region(String),
}

#[derive(Clone, Debug)]
struct RawTraitRef {
    path: RawPath,
    args: Vec<RawArg>,
}

#[derive(Clone, Debug)]
struct RawProj {
    self_ty: RawType,
    tr: RawTraitRef,
    assoc: String,
    args: Vec<RawArg>,
    pos: Pos,
}

#[derive(Clone, Debug)]
enum RawBound {
    Trait(RawTraitRef),
    Region(String),
}

#[derive(Clone, Debug)]
enum RawType {
    Unit,
    Named { path: RawPath, args: Vec<RawArg> },
    SelfTy(Pos),
    Ref { region: String, mutable: bool, inner: Box<RawType> },
    Tuple(Box<RawType>, Box<RawType>),
    Fn { params: Vec<RawType>, ret: Box<RawType> },
    Proj(Box<RawProj>),
    Dyn(Vec<RawBound>),
    Infer(u32, Pos),
}

#[derive(Clone, Debug)]
enum RawPred {
    Bounds { ty: RawType, bounds: Vec<RawBound> },
    ProjEq { proj: RawProj, rhs: RawType },
}

#[derive(Clone, Debug, Default)]
struct RawParams {
    regions: Vec<String>,
    types: Vec<(String, Vec<RawBound>)>,
    wheres: Vec<RawPred>,
}

#[derive(Clone, Debug)]
struct RawAssoc {
    name: String,
    pos: Pos,
    params: RawParams,
    bounds: Vec<RawBound>,
}

#[derive(Clone, Debug)]
struct RawBinding {
    name: String,
    pos: Pos,
    params: RawParams,
    ty: RawType,
}

#[derive(Clone, Debug)]
enum RawDeclKind {
    Newtype {
        name: String,
        pos: Pos,
        params: RawParams,
        body: RawType,
    },
    Trait {
        name: String,
        pos: Pos,
        params: RawParams,
        supers: Vec<RawBound>,
        assoc: Vec<RawAssoc>,
        callable: Option<usize>,
    },
    Impl {
        params: RawParams,
        tr: RawTraitRef,
        self_ty: RawType,
        bindings: Vec<RawBinding>,
    },
    Goal {
        label: String,
        pos: Pos,
        pred: RawPred,
    },
}

#[derive(Clone, Debug)]
struct RawDecl {
    kind: RawDeclKind,
    external: bool,
    module: Vec<String>,
    line_start: u32,
    line_end: u32,
}

// ---------------------------------------------------------------------------
// Recursive descent

const RESERVED: &[&str] = &[
    "newtype", "trait", "impl", "for", "where", "type", "goal", "extern", "mod", "fn", "dyn", "unit", "mut", "as",
    "Self",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    expected: BTreeSet<String>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> Pos {
        let t = &self.toks[self.pos];
        Pos {
            line: t.line,
            column: t.column,
        }
    }

    fn prev_line(&self) -> u32 {
        self.toks[self.pos.saturating_sub(1)].line
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        self.expected.clear();
        t
    }

    fn check(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            true
        } else {
            self.expected.insert(tok.to_string());
            false
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.check(tok) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn check_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            true
        } else {
            self.expected.insert(format!("`{kw}`"));
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.check_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn unexpected(&self) -> ParseError {
        let pos = self.here();
        ParseError {
            line: pos.line,
            column: pos.column,
            kind: ParseErrorKind::Unexpected {
                expected: self.expected.iter().cloned().collect(),
                found: self.peek().to_string(),
            },
        }
    }

    fn invalid(&self, pos: &Pos, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: pos.line,
            column: pos.column,
            kind: ParseErrorKind::Invalid(msg.into()),
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        let pos = self.here();
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.advance();
                Ok((s, pos))
            }
            _ => {
                self.expected.insert("identifier".into());
                Err(self.unexpected())
            }
        }
    }

    fn path(&mut self) -> PResult<RawPath> {
        let start = self.here();
        let absolute = self.eat(&Tok::PathSep);
        let (first, pos) = self.ident()?;
        let pos = if absolute { start } else { pos };
        let mut segs = vec![first];
        while self.check(&Tok::PathSep) && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.advance();
            segs.push(self.ident()?.0);
        }
        Ok(RawPath { absolute, segs, pos })
    }

    fn items(&mut self, module: &[String], external: bool, out: &mut Vec<RawDecl>) -> PResult<()> {
        loop {
            if matches!(self.peek(), Tok::Eof | Tok::RBrace) {
                if !module.is_empty() {
                    self.check(&Tok::RBrace);
                }
                return Ok(());
            }
            self.item(module, external, out)?;
        }
    }

    fn item(&mut self, module: &[String], external: bool, out: &mut Vec<RawDecl>) -> PResult<()> {
        let line_start = self.here().line;
        let mut callable = None;
        while self.eat(&Tok::Hash) {
            let attr_pos = self.here();
            self.expect(&Tok::LBracket)?;
            let (name, _) = self.ident()?;
            if name != "callable" {
                return Err(self.invalid(&attr_pos, format!("unknown attribute `{name}`")));
            }
            self.expect(&Tok::LParen)?;
            let (key, key_pos) = self.ident()?;
            if key != "arity" {
                return Err(self.invalid(&key_pos, format!("unknown `callable` argument `{key}`")));
            }
            self.expect(&Tok::Eq)?;
            let n = match self.peek().clone() {
                Tok::Int(n) => {
                    self.advance();
                    n as usize
                }
                _ => {
                    self.expected.insert("integer".into());
                    return Err(self.unexpected());
                }
            };
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::RBracket)?;
            callable = Some(n);
        }
        let external = self.eat_kw("extern") || external;
        let attr_pos = self.here();

        if self.eat_kw("mod") {
            let path = self.path()?;
            self.expect(&Tok::LBrace)?;
            let mut inner: Vec<String> = module.to_vec();
            inner.extend(path.segs);
            self.items(&inner, external, out)?;
            self.expect(&Tok::RBrace)?;
            if callable.is_some() {
                return Err(self.invalid(&attr_pos, "`callable` applies to traits only"));
            }
            return Ok(());
        }

        let kind = if self.eat_kw("newtype") {
            let (name, pos) = self.ident()?;
            let mut params = self.binders()?;
            if self.eat_kw("where") {
                params.wheres = self.where_list()?;
            }
            self.expect(&Tok::Eq)?;
            let body = self.ty()?;
            self.expect(&Tok::Semi)?;
            RawDeclKind::Newtype { name, pos, params, body }
        } else if self.eat_kw("trait") {
            let (name, pos) = self.ident()?;
            let mut params = self.binders()?;
            let supers = if self.eat(&Tok::Colon) { self.bounds()? } else { Vec::new() };
            if self.eat_kw("where") {
                params.wheres = self.where_list()?;
            }
            let mut assoc = Vec::new();
            if !self.eat(&Tok::Semi) {
                self.expect(&Tok::LBrace)?;
                while !self.eat(&Tok::RBrace) {
                    self.expect_kw("type")?;
                    let (aname, apos) = self.ident()?;
                    let mut aparams = self.binders()?;
                    let bounds = if self.eat(&Tok::Colon) { self.bounds()? } else { Vec::new() };
                    if self.eat_kw("where") {
                        aparams.wheres = self.where_list()?;
                    }
                    self.expect(&Tok::Semi)?;
                    assoc.push(RawAssoc {
                        name: aname,
                        pos: apos,
                        params: aparams,
                        bounds,
                    });
                }
            }
            RawDeclKind::Trait {
                name,
                pos,
                params,
                supers,
                assoc,
                callable: callable.take(),
            }
        } else if self.eat_kw("impl") {
            let mut params = self.binders()?;
            let tr = self.trait_ref()?;
            self.expect_kw("for")?;
            let self_ty = self.ty()?;
            if self.eat_kw("where") {
                params.wheres = self.where_list()?;
            }
            let mut bindings = Vec::new();
            if !self.eat(&Tok::Semi) {
                self.expect(&Tok::LBrace)?;
                while !self.eat(&Tok::RBrace) {
                    self.expect_kw("type")?;
                    let (bname, bpos) = self.ident()?;
                    let mut bparams = self.binders()?;
                    if self.eat_kw("where") {
                        bparams.wheres = self.where_list()?;
                    }
                    self.expect(&Tok::Eq)?;
                    let ty = self.ty()?;
                    self.expect(&Tok::Semi)?;
                    bindings.push(RawBinding {
                        name: bname,
                        pos: bpos,
                        params: bparams,
                        ty,
                    });
                }
            }
            RawDeclKind::Impl {
                params,
                tr,
                self_ty,
                bindings,
            }
        } else if self.eat_kw("goal") {
            let (label, pos) = self.ident()?;
            self.expect(&Tok::Colon)?;
            let pred = self.predicate()?;
            self.expect(&Tok::Semi)?;
            if let RawPred::Bounds { bounds, .. } = &pred {
                if bounds.len() != 1 {
                    return Err(self.invalid(&pos, "a goal states exactly one predicate"));
                }
            }
            RawDeclKind::Goal { label, pos, pred }
        } else {
            return Err(self.unexpected());
        };
        if callable.is_some() {
            return Err(self.invalid(&attr_pos, "`callable` applies to traits only"));
        }
        out.push(RawDecl {
            kind,
            external,
            module: module.to_vec(),
            line_start,
            line_end: self.prev_line(),
        });
        Ok(())
    }

    /// `<'a, T: Bound, U>`, or nothing.
    fn binders(&mut self) -> PResult<RawParams> {
        let mut params = RawParams::default();
        if !self.eat(&Tok::Lt) {
            return Ok(params);
        }
        loop {
            if self.eat(&Tok::Gt) {
                break;
            }
            if let Tok::Region(r) = self.peek().clone() {
                self.advance();
                params.regions.push(r);
            } else {
                self.expected.insert("region".into());
                let (name, _) = self.ident()?;
                let bounds = if self.eat(&Tok::Colon) { self.bounds()? } else { Vec::new() };
                params.types.push((name, bounds));
            }
            if !self.eat(&Tok::Comma) {
                self.expect(&Tok::Gt)?;
                break;
            }
        }
        Ok(params)
    }

    fn where_list(&mut self) -> PResult<Vec<RawPred>> {
        let mut preds = vec![self.predicate()?];
        while self.eat(&Tok::Comma) {
            if matches!(self.peek(), Tok::LBrace | Tok::Semi | Tok::Eq) {
                break;
            }
            preds.push(self.predicate()?);
        }
        Ok(preds)
    }

    fn predicate(&mut self) -> PResult<RawPred> {
        let start = self.here();
        let ty = self.ty()?;
        if self.eat(&Tok::EqEq) {
            let rhs = self.ty()?;
            return match ty {
                RawType::Proj(proj) => Ok(RawPred::ProjEq { proj: *proj, rhs }),
                _ => Err(self.invalid(&start, "the left side of `==` must be a projection")),
            };
        }
        self.expect(&Tok::Colon)?;
        let bounds = self.bounds()?;
        Ok(RawPred::Bounds { ty, bounds })
    }

    fn bounds(&mut self) -> PResult<Vec<RawBound>> {
        let mut out = vec![self.bound()?];
        while self.eat(&Tok::Plus) {
            out.push(self.bound()?);
        }
        Ok(out)
    }

    fn bound(&mut self) -> PResult<RawBound> {
        if let Tok::Region(r) = self.peek().clone() {
            self.advance();
            return Ok(RawBound::Region(r));
        }
        self.expected.insert("region".into());
        Ok(RawBound::Trait(self.trait_ref()?))
    }

    fn trait_ref(&mut self) -> PResult<RawTraitRef> {
        let path = self.path()?;
        let args = self.generic_args()?;
        Ok(RawTraitRef { path, args })
    }

    fn generic_args(&mut self) -> PResult<Vec<RawArg>> {
        let mut args = Vec::new();
        if !self.eat(&Tok::Lt) {
            return Ok(args);
        }
        loop {
            if self.eat(&Tok::Gt) {
                break;
            }
            if let Tok::Region(r) = self.peek().clone() {
                self.advance();
                args.push(RawArg::Region(r));
            } else {
                self.expected.insert("region".into());
                args.push(RawArg::Type(self.ty()?));
            }
            if !self.eat(&Tok::Comma) {
                self.expect(&Tok::Gt)?;
                break;
            }
        }
        Ok(args)
    }

    fn ty(&mut self) -> PResult<RawType> {
        let pos = self.here();
        match self.peek().clone() {
            Tok::Ident(kw) if kw == "unit" => {
                self.advance();
                Ok(RawType::Unit)
            }
            Tok::Ident(kw) if kw == "Self" => {
                self.advance();
                Ok(RawType::SelfTy(pos))
            }
            Tok::Ident(kw) if kw == "fn" => {
                self.advance();
                self.expect(&Tok::LParen)?;
                let mut params = Vec::new();
                while !self.eat(&Tok::RParen) {
                    params.push(self.ty()?);
                    if !self.eat(&Tok::Comma) {
                        self.expect(&Tok::RParen)?;
                        break;
                    }
                }
                let ret = if self.eat(&Tok::Arrow) { self.ty()? } else { RawType::Unit };
                Ok(RawType::Fn {
                    params,
                    ret: Box::new(ret),
                })
            }
            Tok::Ident(kw) if kw == "dyn" => {
                self.advance();
                Ok(RawType::Dyn(self.bounds()?))
            }
            Tok::Ident(_) | Tok::PathSep => {
                let path = self.path()?;
                let args = self.generic_args()?;
                Ok(RawType::Named { path, args })
            }
            Tok::Infer(n) => {
                self.advance();
                Ok(RawType::Infer(n, pos))
            }
            Tok::Amp => {
                self.advance();
                let region = match self.peek().clone() {
                    Tok::Region(r) => {
                        self.advance();
                        r
                    }
                    _ => "_".to_string(),
                };
                let mutable = self.eat_kw("mut");
                let inner = self.ty()?;
                Ok(RawType::Ref {
                    region,
                    mutable,
                    inner: Box::new(inner),
                })
            }
            Tok::LParen => {
                self.advance();
                if self.eat(&Tok::RParen) {
                    return Ok(RawType::Unit);
                }
                let first = self.ty()?;
                if self.eat(&Tok::RParen) {
                    return Ok(first);
                }
                self.expect(&Tok::Comma)?;
                let second = self.ty()?;
                if self.check(&Tok::Comma) {
                    return Err(self.invalid(&pos, "tuples have exactly two components; nest pairs for more"));
                }
                self.expect(&Tok::RParen)?;
                Ok(RawType::Tuple(Box::new(first), Box::new(second)))
            }
            Tok::Lt => {
                self.advance();
                let self_ty = self.ty()?;
                self.expect_kw("as")?;
                let tr = self.trait_ref()?;
                self.expect(&Tok::Gt)?;
                self.expect(&Tok::PathSep)?;
                let (assoc, _) = self.ident()?;
                let args = self.generic_args()?;
                Ok(RawType::Proj(Box::new(RawProj {
                    self_ty,
                    tr,
                    assoc,
                    args,
                    pos,
                })))
            }
            _ => {
                for e in ["type", "`<`", "`(`", "`&`"] {
                    self.expected.insert(e.to_string());
                }
                Err(self.unexpected())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Name resolution

#[derive(Clone)]
enum SelfMode {
    None,
    Param,
    Concrete(Type),
}

#[derive(Clone)]
struct Scope<'m> {
    module: &'m [String],
    type_params: Vec<String>,
    self_mode: SelfMode,
    allow_infer: bool,
}

struct Resolver {
    file: String,
    default_prov: Provenance,
    symbols: BTreeMap<SymbolId, SymbolInfo>,
    by_path: HashMap<String, SymbolId>,
    assoc_of: HashMap<SymbolId, Vec<(String, SymbolId)>>,
}

fn err_at(pos: &Pos, kind: ParseErrorKind) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        kind,
    }
}

fn qualify(module: &[String], name: &str) -> String {
    if module.is_empty() {
        name.to_string()
    } else {
        format!("{}::{name}", module.join("::"))
    }
}

impl Resolver {
    fn new(file: &str, default_prov: Provenance) -> Self {
        Resolver {
            file: file.to_string(),
            default_prov,
            symbols: BTreeMap::new(),
            by_path: HashMap::new(),
            assoc_of: HashMap::new(),
        }
    }

    fn span(&self, d: &RawDecl) -> Span {
        Span::new(self.file.clone(), d.line_start, d.line_end)
    }

    fn provenance(&self, d: &RawDecl) -> Provenance {
        if d.external {
            Provenance::External
        } else {
            self.default_prov
        }
    }

    fn register(&mut self, path: String, kind: SymbolKind, prov: Provenance, span: Span, pos: &Pos) -> PResult<SymbolId> {
        if self.by_path.contains_key(&path) {
            return Err(err_at(pos, ParseErrorKind::DuplicateSymbol(path)));
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.insert(
            id,
            SymbolInfo {
                kind,
                path: path.clone(),
                provenance: prov,
                span,
            },
        );
        self.by_path.insert(path, id);
        Ok(id)
    }

    fn run(mut self, items: Vec<RawDecl>) -> PResult<Context> {
        // Pass 1: declare every named symbol.
        let mut labels = HashSet::new();
        let mut decl_ids: Vec<Option<SymbolId>> = Vec::with_capacity(items.len());
        for d in &items {
            let span = self.span(d);
            let prov = self.provenance(d);
            let id = match &d.kind {
                RawDeclKind::Newtype { name, pos, .. } => {
                    Some(self.register(qualify(&d.module, name), SymbolKind::Newtype, prov, span, pos)?)
                }
                RawDeclKind::Trait { name, pos, assoc, .. } => {
                    let path = qualify(&d.module, name);
                    let id = self.register(path.clone(), SymbolKind::Trait, prov, span.clone(), pos)?;
                    let mut names = Vec::new();
                    for a in assoc {
                        let aid = self.register(format!("{path}::{}", a.name), SymbolKind::AssocType, prov, span.clone(), &a.pos)?;
                        names.push((a.name.clone(), aid));
                    }
                    self.assoc_of.insert(id, names);
                    Some(id)
                }
                RawDeclKind::Goal { label, pos, .. } => {
                    if !labels.insert(label.clone()) {
                        return Err(err_at(pos, ParseErrorKind::DuplicateSymbol(format!("goal {label}"))));
                    }
                    None
                }
                RawDeclKind::Impl { .. } => None,
            };
            decl_ids.push(id);
        }

        // Pass 2: resolve bodies.
        let mut ctx = Context::default();
        let mut next_impl = 0u32;
        for (d, id) in items.iter().zip(decl_ids) {
            let span = self.span(d);
            let provenance = self.provenance(d);
            let base = Scope {
                module: &d.module,
                type_params: Vec::new(),
                self_mode: SelfMode::None,
                allow_infer: false,
            };
            let kind = match &d.kind {
                RawDeclKind::Newtype { params, body, .. } => {
                    let mut scope = base.clone();
                    scope.type_params = params.types.iter().map(|(n, _)| n.clone()).collect();
                    let params = self.params(params, &scope)?;
                    let body = self.ty(body, &scope)?;
                    DeclKind::Newtype(NewtypeDecl {
                        head: id.expect("newtype registered"),
                        params,
                        body,
                    })
                }
                RawDeclKind::Trait {
                    params,
                    supers,
                    assoc,
                    callable,
                    ..
                } => {
                    let trait_id = id.expect("trait registered");
                    let mut scope = base.clone();
                    scope.type_params = params.types.iter().map(|(n, _)| n.clone()).collect();
                    scope.self_mode = SelfMode::Param;
                    let mut rparams = self.params(params, &scope)?;
                    let self_param = Type::param("Self");
                    let mut supers_resolved = Vec::new();
                    for b in supers {
                        supers_resolved.push(self.bound(&self_param, b, &scope)?);
                    }
                    rparams.where_clauses.splice(0..0, supers_resolved);
                    let trait_self_instance = TraitInstance {
                        trait_id,
                        type_args: rparams.types.iter().map(Type::param).collect(),
                        region_args: rparams.regions.clone(),
                    };
                    let mut assoc_out = Vec::new();
                    let names = self.assoc_of.get(&trait_id).cloned().unwrap_or_default();
                    for (a, (_, aid)) in assoc.iter().zip(names) {
                        let mut ascope = scope.clone();
                        ascope.type_params.extend(a.params.types.iter().map(|(n, _)| n.clone()));
                        let mut aparams = self.params(&a.params, &ascope)?;
                        let proj = Type::Projection(Box::new(Projection {
                            self_ty: self_param.clone(),
                            assoc: aid,
                            instance: trait_self_instance.clone(),
                            type_args: aparams.types.iter().map(Type::param).collect(),
                            region_args: aparams.regions.clone(),
                        }));
                        let mut inline = Vec::new();
                        for b in &a.bounds {
                            inline.push(self.bound(&proj, b, &ascope)?);
                        }
                        aparams.where_clauses.splice(0..0, inline);
                        assoc_out.push(AssocDecl {
                            name: aid,
                            params: aparams,
                        });
                    }
                    DeclKind::Trait(TraitDecl {
                        name: trait_id,
                        params: rparams,
                        assoc: assoc_out,
                        callable: *callable,
                    })
                }
                RawDeclKind::Impl {
                    params,
                    tr,
                    self_ty,
                    bindings,
                } => {
                    let mut scope = base.clone();
                    scope.type_params = params.types.iter().map(|(n, _)| n.clone()).collect();
                    let self_ty = self.ty(self_ty, &scope)?;
                    scope.self_mode = SelfMode::Concrete(self_ty.clone());
                    let rparams = self.params(params, &scope)?;
                    let (instance, trait_path) = self.trait_ref(tr, &scope)?;
                    let known = self.assoc_of.get(&instance.trait_id).cloned().unwrap_or_default();
                    let mut rbindings = Vec::new();
                    for b in bindings {
                        let Some((_, aid)) = known.iter().find(|(n, _)| *n == b.name) else {
                            return Err(err_at(
                                &b.pos,
                                ParseErrorKind::UndeclaredAssoc {
                                    trait_path,
                                    assoc: b.name.clone(),
                                },
                            ));
                        };
                        let mut bscope = scope.clone();
                        bscope.type_params.extend(b.params.types.iter().map(|(n, _)| n.clone()));
                        let bparams = self.params(&b.params, &bscope)?;
                        let ty = self.ty(&b.ty, &bscope)?;
                        rbindings.push(AssocBinding {
                            assoc: *aid,
                            params: bparams,
                            ty,
                        });
                    }
                    let impl_id = ImplId(next_impl);
                    next_impl += 1;
                    DeclKind::Impl(ImplDecl {
                        id: impl_id,
                        params: rparams,
                        instance,
                        self_ty,
                        bindings: rbindings,
                    })
                }
                RawDeclKind::Goal { label, pred, .. } => {
                    let mut scope = base.clone();
                    scope.allow_infer = true;
                    let mut preds = self.predicate(pred, &scope)?;
                    ctx.goals.push(GoalItem {
                        label: label.clone(),
                        predicate: preds.remove(0),
                        span,
                    });
                    continue;
                }
            };
            ctx.declarations.push(Declaration { kind, provenance, span });
        }
        ctx.symbols = self.symbols;
        Ok(ctx)
    }

    fn lookup(&self, path: &RawPath, module: &[String]) -> PResult<SymbolId> {
        let tail = path.joined();
        let module = if path.absolute { &[][..] } else { module };
        for k in (0..=module.len()).rev() {
            let candidate = qualify(&module[..k], &tail);
            if let Some(id) = self.by_path.get(&candidate) {
                return Ok(*id);
            }
        }
        Err(err_at(&path.pos, ParseErrorKind::UnresolvedSymbol(tail)))
    }

    fn params(&self, raw: &RawParams, scope: &Scope<'_>) -> PResult<Params> {
        let mut wheres = Vec::new();
        for (name, bounds) in &raw.types {
            let ty = Type::param(name.clone());
            for b in bounds {
                wheres.push(self.bound(&ty, b, scope)?);
            }
        }
        for p in &raw.wheres {
            wheres.extend(self.predicate(p, scope)?);
        }
        Ok(Params {
            regions: raw.regions.iter().cloned().map(RegionVar).collect(),
            types: raw.types.iter().map(|(n, _)| n.clone()).collect(),
            where_clauses: wheres,
        })
    }

    fn predicate(&self, raw: &RawPred, scope: &Scope<'_>) -> PResult<Vec<Predicate>> {
        match raw {
            RawPred::Bounds { ty, bounds } => {
                let ty = self.ty(ty, scope)?;
                bounds.iter().map(|b| self.bound(&ty, b, scope)).collect()
            }
            RawPred::ProjEq { proj, rhs } => {
                let projection = self.projection(proj, scope)?;
                let rhs = self.ty(rhs, scope)?;
                Ok(vec![Predicate::ProjectionEq { projection, rhs }])
            }
        }
    }

    fn bound(&self, self_ty: &Type, raw: &RawBound, scope: &Scope<'_>) -> PResult<Predicate> {
        match raw {
            RawBound::Region(r) => Ok(Predicate::Outlives {
                self_ty: self_ty.clone(),
                region: RegionVar(r.clone()),
            }),
            RawBound::Trait(tr) => {
                let (instance, _) = self.trait_ref(tr, scope)?;
                Ok(Predicate::TraitBound {
                    self_ty: self_ty.clone(),
                    instance,
                })
            }
        }
    }

    fn trait_ref(&self, raw: &RawTraitRef, scope: &Scope<'_>) -> PResult<(TraitInstance, String)> {
        let id = self.lookup(&raw.path, scope.module)?;
        let info = &self.symbols[&id];
        if info.kind != SymbolKind::Trait {
            return Err(err_at(
                &raw.path.pos,
                ParseErrorKind::WrongSymbolKind {
                    path: raw.path.joined(),
                    expected: "a trait",
                },
            ));
        }
        let (type_args, region_args) = self.args(&raw.args, scope)?;
        Ok((
            TraitInstance {
                trait_id: id,
                type_args,
                region_args,
            },
            info.path.clone(),
        ))
    }

    fn args(&self, raw: &[RawArg], scope: &Scope<'_>) -> PResult<(Vec<Type>, Vec<RegionVar>)> {
        let mut types = Vec::new();
        let mut regions = Vec::new();
        for a in raw {
            match a {
                RawArg::Type(t) => types.push(self.ty(t, scope)?),
                RawArg::Region(r) => regions.push(RegionVar(r.clone())),
            }
        }
        Ok((types, regions))
    }

    fn projection(&self, raw: &RawProj, scope: &Scope<'_>) -> PResult<Projection> {
        let self_ty = self.ty(&raw.self_ty, scope)?;
        let (instance, trait_path) = self.trait_ref(&raw.tr, scope)?;
        let assoc = self
            .assoc_of
            .get(&instance.trait_id)
            .and_then(|names| names.iter().find(|(n, _)| *n == raw.assoc))
            .map(|(_, id)| *id)
            .ok_or_else(|| {
                err_at(
                    &raw.pos,
                    ParseErrorKind::UndeclaredAssoc {
                        trait_path,
                        assoc: raw.assoc.clone(),
                    },
                )
            })?;
        let (type_args, region_args) = self.args(&raw.args, scope)?;
        Ok(Projection {
            self_ty,
            assoc,
            instance,
            type_args,
            region_args,
        })
    }

    fn ty(&self, raw: &RawType, scope: &Scope<'_>) -> PResult<Type> {
        Ok(match raw {
            RawType::Unit => Type::Unit,
            RawType::Named { path, args } => {
                if path.segs.len() == 1 && args.is_empty() && scope.type_params.contains(&path.segs[0]) {
                    return Ok(Type::param(path.segs[0].clone()));
                }
                let id = self.lookup(path, scope.module)?;
                if self.symbols[&id].kind != SymbolKind::Newtype {
                    return Err(err_at(
                        &path.pos,
                        ParseErrorKind::WrongSymbolKind {
                            path: path.joined(),
                            expected: "a type",
                        },
                    ));
                }
                let (types, regions) = self.args(args, scope)?;
                if !regions.is_empty() {
                    return Err(err_at(&path.pos, ParseErrorKind::Invalid("type constructors take no region arguments".into())));
                }
                Type::ctor(id, types)
            }
            RawType::SelfTy(pos) => match &scope.self_mode {
                SelfMode::None => return Err(err_at(pos, ParseErrorKind::Invalid("`Self` is only allowed in traits and impls".into()))),
                SelfMode::Param => Type::param("Self"),
                SelfMode::Concrete(t) => t.clone(),
            },
            RawType::Ref { region, mutable, inner } => Type::Ref {
                region: RegionVar(region.clone()),
                mutable: *mutable,
                inner: Box::new(self.ty(inner, scope)?),
            },
            RawType::Tuple(a, b) => Type::tuple(self.ty(a, scope)?, self.ty(b, scope)?),
            RawType::Fn { params, ret } => {
                let params = params.iter().map(|p| self.ty(p, scope)).collect::<PResult<Vec<_>>>()?;
                Type::function(params, self.ty(ret, scope)?)
            }
            RawType::Proj(p) => Type::Projection(Box::new(self.projection(p, scope)?)),
            RawType::Dyn(bounds) => {
                let binder = Type::param(DYN_BINDER);
                let bounds = bounds.iter().map(|b| self.bound(&binder, b, scope)).collect::<PResult<Vec<_>>>()?;
                Type::Existential {
                    binder: DYN_BINDER.to_string(),
                    bounds,
                }
            }
            RawType::Infer(n, pos) => {
                if !scope.allow_infer {
                    return Err(err_at(pos, ParseErrorKind::InferVarOutsideGoal));
                }
                Type::infer(*n)
            }
        })
    }
}
