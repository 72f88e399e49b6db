use crate::error::{Diagnostic, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Semi,
    Colon,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Arrow,
    FatArrow,
    Meet,
    Join,
    Diff,
    Bang,
    Turnstile,
    /// `<-[`
    FlowOpen,
    /// `]-`
    FlowClose,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Eof => "end of file".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Eq => "=",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Meet => "/\\",
            Tok::Join => "\\/",
            Tok::Diff => "\\",
            Tok::Bang => "!",
            Tok::Turnstile => "|-",
            Tok::FlowOpen => "<-[",
            Tok::FlowClose => "]-",
            Tok::Ident(_) | Tok::Str(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `text` into tokens. Lexical errors are collected and the offending
/// character skipped, so one pass reports all of them.
pub fn lex(file: &str, text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, a, b| SourceSpan::new(file, line, a, b);

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token {
                tok: Tok::Ident(s),
                span: span(line, start, col),
            });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            let mut closed = false;
            while i < chars.len() && chars[i] != '\n' {
                let d = chars[i];
                i += 1;
                col += 1;
                match d {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => {
                        let e = chars.get(i).copied();
                        i += 1;
                        col += 1;
                        match e {
                            Some('n') => s.push('\n'),
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            other => errors.push(Diagnostic::new(
                                span(line, col - 2, col),
                                format!("unknown escape `\\{}`", other.unwrap_or(' ')),
                            )),
                        }
                    }
                    d => s.push(d),
                }
            }
            if !closed {
                errors.push(Diagnostic::new(span(line, start, col), "unterminated string"));
            }
            out.push(Token {
                tok: Tok::Str(s),
                span: span(line, start, col),
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let next2 = chars.get(i + 2).copied();
        let (tok, len) = match (c, next, next2) {
            ('<', Some('-'), Some('[')) => (Tok::FlowOpen, 3),
            (']', Some('-'), _) => (Tok::FlowClose, 2),
            ('-', Some('>'), _) => (Tok::Arrow, 2),
            ('=', Some('>'), _) => (Tok::FatArrow, 2),
            ('/', Some('\\'), _) => (Tok::Meet, 2),
            ('\\', Some('/'), _) => (Tok::Join, 2),
            ('|', Some('-'), _) => (Tok::Turnstile, 2),
            ('\\', _, _) => (Tok::Diff, 1),
            ('!', _, _) => (Tok::Bang, 1),
            (';', _, _) => (Tok::Semi, 1),
            (':', _, _) => (Tok::Colon, 1),
            (',', _, _) => (Tok::Comma, 1),
            ('(', _, _) => (Tok::LParen, 1),
            (')', _, _) => (Tok::RParen, 1),
            ('{', _, _) => (Tok::LBrace, 1),
            ('}', _, _) => (Tok::RBrace, 1),
            ('[', _, _) => (Tok::LBracket, 1),
            (']', _, _) => (Tok::RBracket, 1),
            ('=', _, _) => (Tok::Eq, 1),
            _ => {
                errors.push(Diagnostic::new(
                    span(line, col, col + 1),
                    format!("unexpected character `{c}`"),
                ));
                i += 1;
                col += 1;
                continue;
            }
        };
        i += len;
        col += len;
        out.push(Token {
            tok,
            span: span(line, start, col),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: span(line, col, col),
    });
    (out, errors)
}
