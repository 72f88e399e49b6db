//! Recursive-descent parser producing unresolved items. Name resolution and
//! typing happen in [`super::workspace`].

use crate::error::{Diagnostic, SourceSpan};

use super::lexer::{Tok, Token};

#[derive(Clone, Debug)]
pub struct RawSig {
    pub entries: Vec<(String, String)>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug)]
pub enum RawMorph {
    Named(String, SourceSpan),
    Inline {
        source: RawSig,
        target: RawSig,
        map: Vec<(String, String)>,
        span: SourceSpan,
    },
}

impl RawMorph {
    pub fn span(&self) -> &SourceSpan {
        match self {
            RawMorph::Named(_, s) | RawMorph::Inline { span: s, .. } => s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Meet,
    Join,
    Diff,
    Impl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    Exists,
    Forall,
    Subst,
}

#[derive(Clone, Debug)]
pub enum RawExpr {
    Name(String, SourceSpan),
    Top(RawSig),
    Bot(RawSig),
    Neg(Box<RawExpr>),
    Bin(BinOp, Box<RawExpr>, Box<RawExpr>),
    Flow(FlowKind, RawMorph, Box<RawExpr>),
}

#[derive(Clone, Debug)]
pub enum RawConstraint {
    /// `lhs |- rhs`
    Seq(RawExpr, RawExpr),
    /// `source <-[h]- target`
    Flow(RawExpr, RawMorph, RawExpr),
    /// A reference to a named constraint.
    Named(String),
}

#[derive(Clone, Debug)]
pub enum SchemaEntry {
    Sort(String, SourceSpan),
    Entity(String, Option<RawSig>, SourceSpan),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    Entity,
    Sort,
}

#[derive(Clone, Debug)]
pub struct RawKey {
    pub key: String,
    pub entities: Vec<(String, SourceSpan)>,
    pub tuple: Vec<(String, String)>,
    pub span: SourceSpan,
}

pub type Scope = Option<(String, SourceSpan)>;

#[derive(Clone, Debug)]
pub enum Item {
    Include {
        path: String,
        span: SourceSpan,
    },
    Sort {
        name: String,
        span: SourceSpan,
    },
    Entity {
        name: String,
        sig: RawSig,
        span: SourceSpan,
    },
    Schema {
        name: String,
        entries: Vec<SchemaEntry>,
        span: SourceSpan,
    },
    Domain {
        name: String,
        extents: Vec<(String, Vec<String>, SourceSpan)>,
        span: SourceSpan,
    },
    SigMorph {
        name: String,
        source: RawSig,
        target: RawSig,
        map: Vec<(String, String)>,
        span: SourceSpan,
    },
    Morphism {
        name: String,
        source: (String, SourceSpan),
        target: (String, SourceSpan),
        entries: Vec<(MapKind, String, String, SourceSpan)>,
        span: SourceSpan,
    },
    Formula {
        name: String,
        schema: Scope,
        expr: RawExpr,
        span: SourceSpan,
    },
    Constraint {
        name: String,
        schema: Scope,
        body: RawConstraint,
        span: SourceSpan,
    },
    Spec {
        name: String,
        schema: Scope,
        body: Vec<(RawConstraint, SourceSpan)>,
        span: SourceSpan,
    },
    Structure {
        name: String,
        schema: Scope,
        domain: (String, SourceSpan),
        keys: Vec<RawKey>,
        span: SourceSpan,
    },
    Logic {
        name: String,
        structure: (String, SourceSpan),
        spec: (String, SourceSpan),
        span: SourceSpan,
    },
}

type PResult<T> = Result<T, Diagnostic>;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    pub errors: Vec<Diagnostic>,
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser {
            toks,
            pos: 0,
            errors: Vec::new(),
        }
    }

    pub fn at_end(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, what: &str) -> PResult<T> {
        Err(Diagnostic::new(
            self.span(),
            format!("expected {what}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, t: Tok) -> PResult<SourceSpan> {
        if *self.peek() == t {
            Ok(self.bump().span)
        } else {
            let want = t.describe();
            self.error(&want)
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => self.error("a name"),
        }
    }

    fn name_or_string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("a name or string"),
        }
    }

    /// Skips to just past the next `;` at nesting depth zero, or to just past
    /// a `}` that closes the current depth-zero block.
    fn recover_item(&mut self) {
        let mut depth = 0i32;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    depth -= 1;
                    if depth <= 0 {
                        self.bump();
                        return;
                    }
                }
                Tok::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                _ => {}
            }
            self.bump();
        }
    }

    /// Inside a block: skips past the next `;` at this level, stopping in
    /// front of the block's closing `}`.
    fn recover_entry(&mut self) {
        let mut depth = 0i32;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                }
                Tok::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                _ => {}
            }
            self.bump();
        }
    }

    pub fn items(&mut self) -> Vec<Item> {
        let mut out = Vec::new();
        while *self.peek() != Tok::Eof {
            match self.item() {
                Ok(it) => out.push(it),
                Err(d) => {
                    self.errors.push(d);
                    self.recover_item();
                }
            }
        }
        out
    }

    fn block<T>(&mut self, mut entry: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(out);
                }
                Tok::Eof => return self.error("`}`"),
                _ => match entry(self) {
                    Ok(x) => out.push(x),
                    Err(d) => {
                        self.errors.push(d);
                        self.recover_entry();
                    }
                },
            }
        }
    }

    fn scope(&mut self) -> PResult<Scope> {
        if *self.peek() == Tok::Colon {
            self.bump();
            let s = self.ident()?;
            Ok(Some(s))
        } else {
            Ok(None)
        }
    }

    fn item(&mut self) -> PResult<Item> {
        let span = self.span();
        let Tok::Ident(kw) = self.peek().clone() else {
            return self.error("a declaration");
        };
        match kw.as_str() {
            "include" => {
                self.bump();
                let path = match self.peek().clone() {
                    Tok::Str(s) => {
                        self.bump();
                        s
                    }
                    _ => return self.error("a quoted path"),
                };
                self.expect(Tok::Semi)?;
                Ok(Item::Include { path, span })
            }
            "sort" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Semi)?;
                Ok(Item::Sort { name, span })
            }
            "entity" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let sig = self.sig()?;
                self.expect(Tok::Semi)?;
                Ok(Item::Entity { name, sig, span })
            }
            "schema" => {
                self.bump();
                let (name, _) = self.ident()?;
                let entries = self.block(|p| p.schema_entry())?;
                Ok(Item::Schema {
                    name,
                    entries,
                    span,
                })
            }
            "domain" => {
                self.bump();
                let (name, _) = self.ident()?;
                let extents = self.block(|p| {
                    let (sort, sp) = p.ident()?;
                    p.expect(Tok::Eq)?;
                    p.expect(Tok::LBrace)?;
                    let mut vals = Vec::new();
                    if *p.peek() != Tok::RBrace {
                        vals.push(p.name_or_string()?);
                        while p.eat(&Tok::Comma) {
                            vals.push(p.name_or_string()?);
                        }
                    }
                    p.expect(Tok::RBrace)?;
                    p.expect(Tok::Semi)?;
                    Ok((sort, vals, sp))
                })?;
                Ok(Item::Domain {
                    name,
                    extents,
                    span,
                })
            }
            "sigmorph" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let (source, target, map) = self.inline_morph_body()?;
                Ok(Item::SigMorph {
                    name,
                    source,
                    target,
                    map,
                    span,
                })
            }
            "morphism" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let source = self.ident()?;
                self.expect(Tok::FatArrow)?;
                let target = self.ident()?;
                let entries = self.block(|p| {
                    let sp = p.span();
                    let kind = if p.is_keyword("entity") {
                        MapKind::Entity
                    } else if p.is_keyword("sort") {
                        MapKind::Sort
                    } else {
                        return p.error("`entity` or `sort`");
                    };
                    p.bump();
                    let (a, _) = p.ident()?;
                    p.expect(Tok::Arrow)?;
                    let (b, _) = p.ident()?;
                    p.expect(Tok::Semi)?;
                    Ok((kind, a, b, sp))
                })?;
                Ok(Item::Morphism {
                    name,
                    source,
                    target,
                    entries,
                    span,
                })
            }
            "formula" => {
                self.bump();
                let (name, _) = self.ident()?;
                let schema = self.scope()?;
                self.expect(Tok::Eq)?;
                let expr = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Item::Formula {
                    name,
                    schema,
                    expr,
                    span,
                })
            }
            "constraint" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let schema = if matches!(self.peek(), Tok::Ident(_))
                    && *self.peek_at(1) == Tok::Colon
                {
                    let s = self.ident()?;
                    self.bump();
                    Some(s)
                } else {
                    None
                };
                let body = self.constraint_body()?;
                self.expect(Tok::Semi)?;
                Ok(Item::Constraint {
                    name,
                    schema,
                    body,
                    span,
                })
            }
            "spec" => {
                self.bump();
                let (name, _) = self.ident()?;
                let schema = self.scope()?;
                let body = self.block(|p| {
                    let sp = p.span();
                    let c = if p.is_keyword("seq") {
                        p.bump();
                        let lhs = p.expr()?;
                        p.expect(Tok::Turnstile)?;
                        RawConstraint::Seq(lhs, p.expr()?)
                    } else if p.is_keyword("constraint") {
                        p.bump();
                        p.constraint_body()?
                    } else if p.is_keyword("axiom") {
                        p.bump();
                        RawConstraint::Named(p.ident()?.0)
                    } else {
                        return p.error("`seq`, `constraint` or `axiom`");
                    };
                    p.expect(Tok::Semi)?;
                    Ok((c, sp))
                })?;
                Ok(Item::Spec {
                    name,
                    schema,
                    body,
                    span,
                })
            }
            "structure" => {
                self.bump();
                let (name, _) = self.ident()?;
                let schema = self.scope()?;
                self.keyword("over")?;
                let domain = self.ident()?;
                let keys = self.block(|p| p.key_entry())?;
                Ok(Item::Structure {
                    name,
                    schema,
                    domain,
                    keys,
                    span,
                })
            }
            "logic" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::LBrace)?;
                self.keyword("structure")?;
                let structure = self.ident()?;
                self.expect(Tok::Semi)?;
                self.keyword("spec")?;
                let spec = self.ident()?;
                self.expect(Tok::Semi)?;
                self.expect(Tok::RBrace)?;
                Ok(Item::Logic {
                    name,
                    structure,
                    spec,
                    span,
                })
            }
            _ => self.error("a declaration"),
        }
    }

    fn schema_entry(&mut self) -> PResult<SchemaEntry> {
        let sp = self.span();
        if self.is_keyword("sort") {
            self.bump();
            let (n, _) = self.ident()?;
            self.expect(Tok::Semi)?;
            Ok(SchemaEntry::Sort(n, sp))
        } else if self.is_keyword("entity") {
            self.bump();
            let (n, _) = self.ident()?;
            let sig = if self.eat(&Tok::Colon) {
                Some(self.sig()?)
            } else {
                None
            };
            self.expect(Tok::Semi)?;
            Ok(SchemaEntry::Entity(n, sig, sp))
        } else {
            self.error("`sort` or `entity`")
        }
    }

    fn key_entry(&mut self) -> PResult<RawKey> {
        let span = self.span();
        self.keyword("key")?;
        let key = self.name_or_string()?;
        let mut entities = Vec::new();
        if self.eat(&Tok::Colon) {
            entities.push(self.ident()?);
            while self.eat(&Tok::Comma) {
                entities.push(self.ident()?);
            }
        }
        self.expect(Tok::Eq)?;
        self.expect(Tok::LParen)?;
        let mut tuple = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (i, _) = self.ident()?;
                self.expect(Tok::Eq)?;
                tuple.push((i, self.name_or_string()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Semi)?;
        Ok(RawKey {
            key,
            entities,
            tuple,
            span,
        })
    }

    pub fn sig(&mut self) -> PResult<RawSig> {
        let span = self.expect(Tok::LParen)?;
        let mut entries = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (i, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let (s, _) = self.ident()?;
                entries.push((i, s));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(RawSig { entries, span })
    }

    fn inline_morph_body(&mut self) -> PResult<(RawSig, RawSig, Vec<(String, String)>)> {
        let source = self.sig()?;
        self.expect(Tok::Arrow)?;
        let target = self.sig()?;
        self.expect(Tok::LBrace)?;
        let mut map = Vec::new();
        while *self.peek() != Tok::RBrace {
            let (a, _) = self.ident()?;
            self.expect(Tok::Arrow)?;
            let (b, _) = self.ident()?;
            self.expect(Tok::Semi)?;
            map.push((a, b));
        }
        self.bump();
        Ok((source, target, map))
    }

    fn morph(&mut self) -> PResult<RawMorph> {
        let span = self.span();
        if *self.peek() == Tok::LParen {
            let (source, target, map) = self.inline_morph_body()?;
            Ok(RawMorph::Inline {
                source,
                target,
                map,
                span,
            })
        } else {
            let (n, sp) = self.ident()?;
            Ok(RawMorph::Named(n, sp))
        }
    }

    pub fn constraint_body(&mut self) -> PResult<RawConstraint> {
        let first = self.expr()?;
        match self.peek() {
            Tok::Turnstile => {
                self.bump();
                Ok(RawConstraint::Seq(first, self.expr()?))
            }
            Tok::FlowOpen => {
                self.bump();
                let h = self.morph()?;
                self.expect(Tok::FlowClose)?;
                Ok(RawConstraint::Flow(first, h, self.expr()?))
            }
            _ => self.error("`|-` or `<-[`"),
        }
    }

    pub fn expr(&mut self) -> PResult<RawExpr> {
        self.binary(0)
    }

    // Levels from loosest: `=>`, `\`, `\/`, `/\`.
    fn binary(&mut self, level: usize) -> PResult<RawExpr> {
        const OPS: [(Tok, BinOp); 4] = [
            (Tok::FatArrow, BinOp::Impl),
            (Tok::Diff, BinOp::Diff),
            (Tok::Join, BinOp::Join),
            (Tok::Meet, BinOp::Meet),
        ];
        if level == OPS.len() {
            return self.unary();
        }
        let mut left = self.binary(level + 1)?;
        while *self.peek() == OPS[level].0 {
            self.bump();
            let right = self.binary(level + 1)?;
            left = RawExpr::Bin(OPS[level].1, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<RawExpr> {
        if self.eat(&Tok::Bang) {
            return Ok(RawExpr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(&Tok::LParen) {
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        let (name, span) = self.ident()?;
        let flow = match name.as_str() {
            "exists" => Some(FlowKind::Exists),
            "forall" => Some(FlowKind::Forall),
            "subst" => Some(FlowKind::Subst),
            _ => None,
        };
        match (name.as_str(), self.peek()) {
            ("top", Tok::LParen) => Ok(RawExpr::Top(self.sig()?)),
            ("bot", Tok::LParen) => Ok(RawExpr::Bot(self.sig()?)),
            (_, Tok::LBracket) if flow.is_some() => {
                self.bump();
                let h = self.morph()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::LParen)?;
                let body = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(RawExpr::Flow(flow.unwrap_or(FlowKind::Exists), h, Box::new(body)))
            }
            _ => Ok(RawExpr::Name(name, span)),
        }
    }
}
