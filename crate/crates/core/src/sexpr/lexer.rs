//! Tokenizer for SMT-LIB 2 concrete syntax.

use super::ParseError;

/// A source position, 1-based line and column plus the byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    /// Decimal numeral, possibly with a leading `-`.
    Numeral(String),
    /// `12.5`, `#x1F`, `#b101` kept verbatim.
    SpecConst(String),
    /// Decoded string contents.
    Str(String),
    Symbol(String),
    QuotedSymbol(String),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: Pos,
    /// Byte offset one past the last character.
    pub end: usize,
}

pub(crate) fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c)
}

pub struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn pos(&mut self) -> Pos {
        let offset = self.chars.peek().map(|&(i, _)| i).unwrap_or(self.src.len());
        Pos {
            offset,
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map(|&(i, _)| i).unwrap_or(self.src.len())
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.offset();
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.bump();
        }
        &self.src[start..self.offset()]
    }

    pub fn next_token(&mut self) -> Result<Option<Token>, ParseError> {
        self.skip_trivia();
        let start = self.pos();
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let kind = match c {
            '(' => {
                self.bump();
                TokenKind::LParen
            }
            ')' => {
                self.bump();
                TokenKind::RParen
            }
            '|' => {
                self.bump();
                let body_start = self.offset();
                loop {
                    match self.bump() {
                        Some('|') => break,
                        Some('\\') => {
                            return Err(ParseError::at(
                                start,
                                "backslash is not allowed inside a quoted symbol",
                            ))
                        }
                        Some(_) => {}
                        None => return Err(ParseError::at(start, "unterminated quoted symbol")),
                    }
                }
                let body_end = self.offset() - 1;
                TokenKind::QuotedSymbol(self.src[body_start..body_end].to_string())
            }
            '"' => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        Some('"') => {
                            if self.peek() == Some('"') {
                                self.bump();
                                text.push('"');
                            } else {
                                break;
                            }
                        }
                        Some('\\') => {
                            log::warn!(
                                "line {} column {}: backslash in string literal kept verbatim",
                                start.line,
                                start.col
                            );
                            text.push('\\');
                        }
                        Some(ch) => text.push(ch),
                        None => return Err(ParseError::at(start, "unterminated string literal")),
                    }
                }
                TokenKind::Str(text)
            }
            '#' => {
                self.bump();
                let radix = self.bump();
                let digits = match radix {
                    Some('x') => self.take_while(|c| c.is_ascii_hexdigit()),
                    Some('b') => self.take_while(|c| c == '0' || c == '1'),
                    _ => return Err(ParseError::at(start, "expected `#x` or `#b` literal")),
                };
                if digits.is_empty() {
                    return Err(ParseError::at(start, "empty hexadecimal or binary literal"));
                }
                TokenKind::SpecConst(self.src[start.offset..self.offset()].to_string())
            }
            ':' => {
                self.bump();
                let name = self.take_while(is_symbol_char);
                TokenKind::Keyword(format!(":{name}"))
            }
            c if is_symbol_char(c) => {
                let word = self.take_while(is_symbol_char);
                classify_word(word)
            }
            other => {
                return Err(ParseError::at(
                    start,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        Ok(Some(Token {
            kind,
            start,
            end: self.offset(),
        }))
    }
}

fn classify_word(word: &str) -> TokenKind {
    let digits = word.strip_prefix('-').unwrap_or(word);
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        return TokenKind::Numeral(word.to_string());
    }
    if let Some((int, frac)) = word.split_once('.') {
        if !int.is_empty()
            && !frac.is_empty()
            && int.bytes().all(|b| b.is_ascii_digit())
            && frac.bytes().all(|b| b.is_ascii_digit())
        {
            return TokenKind::SpecConst(word.to_string());
        }
    }
    TokenKind::Symbol(word.to_string())
}
