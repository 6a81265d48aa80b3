use num_bigint::BigInt;

use super::{DafnyError, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Str(String),
    /// Punctuation and operators, e.g. `==>`, `:=`, `{:`.
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// longest first
const PUNCT: &[&str] = &[
    "<==>", "==>", "{:", ":=", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{", "}", "[", "]",
    "<", ">", ",", ";", ":", "+", "-", "*", "/", "%", "!",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, DafnyError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    let (mut line, mut col) = (1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for &b in &bytes[*i..*i + n] {
            if b == b'\n' {
                *line += 1;
                *col = 1;
            } else if b & 0xC0 != 0x80 {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if src[i..].starts_with("//") {
            let n = src[i..].find('\n').unwrap_or(src.len() - i);
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        if src[i..].starts_with("/*") {
            let span = Span { line, col };
            let Some(n) = src[i + 2..].find("*/") else {
                return Err(DafnyError::syntax(span, "unterminated comment"));
            };
            advance(&mut i, &mut line, &mut col, n + 4);
            continue;
        }
        let span = Span { line, col };
        if c.is_ascii_digit() {
            let n = src[i..].bytes().take_while(u8::is_ascii_digit).count();
            let value = src[i..i + n].parse::<BigInt>().expect("digits");
            advance(&mut i, &mut line, &mut col, n);
            out.push(Token { tok: Tok::Int(value), span });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let n = src[i..]
                .bytes()
                .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_' || *b == b'\'' || *b == b'?')
                .count();
            let word = src[i..i + n].to_string();
            advance(&mut i, &mut line, &mut col, n);
            out.push(Token { tok: Tok::Ident(word), span });
            continue;
        }
        if c == b'"' {
            let mut text = String::new();
            let mut j = i + 1;
            loop {
                let Some(ch) = src[j..].chars().next() else {
                    return Err(DafnyError::syntax(span, "unterminated string literal"));
                };
                match ch {
                    '"' => {
                        j += 1;
                        break;
                    }
                    '\\' => {
                        let esc = src[j + 1..].chars().next();
                        let decoded = match esc {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('\'') => '\'',
                            _ => return Err(DafnyError::syntax(span, "bad escape in string literal")),
                        };
                        text.push(decoded);
                        j += 2;
                    }
                    '\n' => return Err(DafnyError::syntax(span, "newline in string literal")),
                    ch => {
                        text.push(ch);
                        j += ch.len_utf8();
                    }
                }
            }
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            out.push(Token { tok: Tok::Str(text), span });
            continue;
        }
        let Some(p) = PUNCT.iter().find(|p| src[i..].starts_with(**p)) else {
            let ch = src[i..].chars().next().unwrap();
            return Err(DafnyError::syntax(span, format!("unexpected character `{ch}`")));
        };
        advance(&mut i, &mut line, &mut col, p.len());
        out.push(Token { tok: Tok::Punct(p), span });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_longest_match() {
        let toks: Vec<Tok> = tokenize("a <==> b ==> c <= d {:ipm}")
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("a".into()),
                Tok::Punct("<==>"),
                Tok::Ident("b".into()),
                Tok::Punct("==>"),
                Tok::Ident("c".into()),
                Tok::Punct("<="),
                Tok::Ident("d".into()),
                Tok::Punct("{:"),
                Tok::Ident("ipm".into()),
                Tok::Punct("}"),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions_and_comments() {
        let toks = tokenize("// c\n  x /* y */ + 1").unwrap();
        assert_eq!((toks[0].span.line, toks[0].span.col), (2, 3));
        assert_eq!((toks[1].span.line, toks[1].span.col), (2, 13));
    }

    #[test]
    fn string_escapes() {
        let toks = tokenize(r#""a\"b""#).unwrap();
        assert_eq!(toks[0].tok, Tok::Str("a\"b".into()));
    }
}
