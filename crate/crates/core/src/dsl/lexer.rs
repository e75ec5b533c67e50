use alloc::string::String;
use alloc::vec::Vec;

use super::{ParseError, Pos, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial word: constant, predicate, label or keyword.
    Ident(String),
    /// Uppercase- or underscore-initial word.
    Var(String),
    Int(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Arrow,
    FatArrow,
    Gt,
    Tilde,
    Slash,
    Eq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        use alloc::format;
        match self {
            Tok::Ident(s) | Tok::Int(s) => format!("`{s}`"),
            Tok::Var(s) => format!("variable `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`<-`".into(),
            Tok::FatArrow => "`=>`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

fn word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn lex(text: &str, file: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let span = |a: Pos, b: Pos| SourceSpan::new(file, a, b);

    while i < chars.len() {
        let c = chars[i];
        let start = Pos { line, col };
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
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        if word_char(c) {
            let mut word = String::new();
            loop {
                word.push(chars[i]);
                i += 1;
                col += 1;
                // `.` and `-` continue a word only between word characters,
                // so `attr.a2` and `attribution-text` are single tokens
                // while a trailing `.` still ends the statement.
                let joins = i + 1 < chars.len()
                    && (chars[i] == '.' || chars[i] == '-')
                    && word_char(chars[i + 1]);
                if !(i < chars.len() && (word_char(chars[i]) || joins)) {
                    break;
                }
            }
            let end = Pos { line, col: col - 1 };
            let tok = if word.chars().all(|c| c.is_ascii_digit()) {
                Tok::Int(word)
            } else if word.starts_with(|c: char| c.is_uppercase() || c == '_') {
                Tok::Var(word)
            } else {
                Tok::Ident(word)
            };
            out.push(Token {
                tok,
                span: span(start, end),
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('<', Some('-')) => (Tok::Arrow, 2),
            ('=', Some('>')) => (Tok::FatArrow, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            ('.', _) => (Tok::Dot, 1),
            (':', _) => (Tok::Colon, 1),
            ('>', _) => (Tok::Gt, 1),
            ('~', _) => (Tok::Tilde, 1),
            ('/', _) => (Tok::Slash, 1),
            ('=', _) => (Tok::Eq, 1),
            _ => {
                return Err(ParseError::new(
                    span(start, start),
                    alloc::format!("unexpected character `{c}`"),
                    None,
                ))
            }
        };
        i += len;
        col += len as u32;
        out.push(Token {
            tok,
            span: span(start, Pos { line, col: col - 1 }),
        });
    }
    let here = Pos { line, col };
    out.push(Token {
        tok: Tok::Eof,
        span: span(here, here),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s, "t").unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn dotted_labels_and_terminators() {
        assert_eq!(
            toks("rule attr.a2: p."),
            [
                Tok::Ident("rule".into()),
                Tok::Ident("attr.a2".into()),
                Tok::Colon,
                Tok::Ident("p".into()),
                Tok::Dot,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn arrows_comments_and_crlf() {
        assert_eq!(
            toks("p(X) <- q. % note\r\nexpect 1: p => accepted."),
            [
                Tok::Ident("p".into()),
                Tok::LParen,
                Tok::Var("X".into()),
                Tok::RParen,
                Tok::Arrow,
                Tok::Ident("q".into()),
                Tok::Dot,
                Tok::Ident("expect".into()),
                Tok::Int("1".into()),
                Tok::Colon,
                Tok::Ident("p".into()),
                Tok::FatArrow,
                Tok::Ident("accepted".into()),
                Tok::Dot,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn spans_are_one_based() {
        let t = lex("fact\n  p(a).", "f").unwrap();
        assert_eq!(t[1].span.start, Pos { line: 2, col: 3 });
        assert_eq!(t[1].span.end, Pos { line: 2, col: 3 });
        assert_eq!(t[5].span.start, Pos { line: 2, col: 7 });
    }

    #[test]
    fn bad_character() {
        let e = lex("fact p(a)!", "f").unwrap_err();
        assert_eq!(e.span.start, Pos { line: 1, col: 10 });
    }
}
