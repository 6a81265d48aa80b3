use num_bigint::BigInt;

use super::lexer::{Lexer, Pos, Token, TokenKind};
use super::{
    Attr, AttrValue, Command, Declaration, Ident, LetBinding, ParseError, QuantifierKind,
    SortedVar, Term,
};

/// Untyped s-expression tree with source spans.
#[derive(Debug, Clone)]
enum SExpr {
    Atom(Token),
    List {
        items: Vec<SExpr>,
        start: Pos,
        end: usize,
    },
}

impl SExpr {
    fn start(&self) -> Pos {
        match self {
            SExpr::Atom(t) => t.start,
            SExpr::List { start, .. } => *start,
        }
    }

    fn end(&self) -> usize {
        match self {
            SExpr::Atom(t) => t.end,
            SExpr::List { end, .. } => *end,
        }
    }

    fn symbol(&self) -> Option<&str> {
        match self {
            SExpr::Atom(Token {
                kind: TokenKind::Symbol(s),
                ..
            }) => Some(s),
            _ => None,
        }
    }

    fn any_symbol(&self) -> Option<Ident> {
        match self {
            SExpr::Atom(Token {
                kind: TokenKind::Symbol(s),
                ..
            }) => Some(Ident {
                name: s.clone(),
                quoted: false,
            }),
            SExpr::Atom(Token {
                kind: TokenKind::QuotedSymbol(s),
                ..
            }) => Some(Ident {
                name: s.clone(),
                quoted: true,
            }),
            _ => None,
        }
    }

    fn keyword(&self) -> Option<&str> {
        match self {
            SExpr::Atom(Token {
                kind: TokenKind::Keyword(k),
                ..
            }) => Some(k),
            _ => None,
        }
    }
}

fn read_all(src: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut lexer = Lexer::new(src);
    let mut stack: Vec<(Pos, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        match tok.kind {
            TokenKind::LParen => stack.push((tok.start, Vec::new())),
            TokenKind::RParen => {
                let Some((start, items)) = stack.pop() else {
                    return Err(ParseError::at(tok.start, "unbalanced `)`"));
                };
                let list = SExpr::List {
                    items,
                    start,
                    end: tok.end,
                };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => match stack.last_mut() {
                Some((_, parent)) => parent.push(SExpr::Atom(tok)),
                None => top.push(SExpr::Atom(tok)),
            },
        }
    }
    if let Some((start, _)) = stack.pop() {
        return Err(ParseError::at(start, "unbalanced `(`: missing `)`"));
    }
    Ok(top)
}

/// Parses a full SMT-LIB script into commands, in file order.
pub fn parse_script(text: &str) -> Result<Vec<Command>, ParseError> {
    read_all(text)?
        .into_iter()
        .map(|e| command(text, &e))
        .collect()
}

/// Parses exactly one term.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut items = read_all(text)?;
    match items.len() {
        1 => term(&items.pop().unwrap()),
        0 => Err(ParseError {
            line: 1,
            col: 1,
            message: "expected a term".into(),
        }),
        _ => Err(ParseError::at(items[1].start(), "trailing input after term")),
    }
}

fn command(src: &str, e: &SExpr) -> Result<Command, ParseError> {
    let raw = || src[e.start().offset..e.end()].to_string();
    let SExpr::List { items, start, .. } = e else {
        return Err(ParseError::at(e.start(), "expected a parenthesised command"));
    };
    let Some(head) = items.first().and_then(SExpr::symbol) else {
        return Err(ParseError::at(*start, "command must start with a symbol"));
    };
    let arity = |n: usize| -> Result<(), ParseError> {
        if items.len() == n + 1 {
            Ok(())
        } else {
            Err(ParseError::at(
                *start,
                format!("`{head}` expects {n} argument(s)"),
            ))
        }
    };
    match head {
        "set-option" => {
            let key = items
                .get(1)
                .and_then(SExpr::keyword)
                .ok_or_else(|| ParseError::at(*start, "set-option needs a keyword"))?
                .to_string();
            let value = match items.get(2) {
                Some(v) => src[v.start().offset..items.last().unwrap().end()].to_string(),
                None => String::new(),
            };
            Ok(Command::SetOption { key, value })
        }
        "declare-fun" | "declare-const" | "declare-sort" | "define-fun" | "define-fun-rec"
        | "define-sort" | "define-const" => {
            let name = items
                .get(1)
                .and_then(SExpr::any_symbol)
                .ok_or_else(|| ParseError::at(*start, format!("`{head}` needs a name")))?
                .name;
            Ok(Command::Declare(Declaration {
                keyword: head.to_string(),
                name,
                text: raw(),
            }))
        }
        "assert" => {
            arity(1)?;
            Ok(Command::Assert(term(&items[1])?))
        }
        "push" | "pop" => {
            let n = match items.get(1) {
                None => 1,
                Some(SExpr::Atom(Token {
                    kind: TokenKind::Numeral(n),
                    start,
                    ..
                })) => n
                    .parse::<u32>()
                    .map_err(|_| ParseError::at(*start, "bad stack level count"))?,
                Some(other) => {
                    return Err(ParseError::at(other.start(), "expected a numeral"))
                }
            };
            if items.len() > 2 {
                return Err(ParseError::at(*start, format!("`{head}` takes one numeral")));
            }
            Ok(if head == "push" {
                Command::Push(n)
            } else {
                Command::Pop(n)
            })
        }
        "check-sat" => {
            arity(0)?;
            Ok(Command::CheckSat)
        }
        _ => Ok(Command::Other(raw())),
    }
}

fn term(e: &SExpr) -> Result<Term, ParseError> {
    match e {
        SExpr::Atom(tok) => atom(tok),
        SExpr::List { items, start, .. } => {
            let Some(first) = items.first() else {
                return Err(ParseError::at(*start, "empty application `()`"));
            };
            match first.symbol() {
                Some("forall") => return quantifier(QuantifierKind::Forall, items, *start),
                Some("exists") => return quantifier(QuantifierKind::Exists, items, *start),
                Some("let") => return let_term(items, *start),
                Some("!") => {
                    let body = items
                        .get(1)
                        .ok_or_else(|| ParseError::at(*start, "`!` needs a body"))?;
                    let attributes = attributes(&items[2..])?;
                    if attributes.is_empty() {
                        return Err(ParseError::at(*start, "`!` needs at least one attribute"));
                    }
                    return Ok(Term::Annotated {
                        body: Box::new(term(body)?),
                        attributes,
                    });
                }
                _ => {}
            }
            if items.len() == 1 {
                return Err(ParseError::at(*start, "application without arguments"));
            }
            let head = term(first)?;
            let args = items[1..].iter().map(term).collect::<Result<Vec<_>, _>>()?;
            // `(- n)` is the SMT spelling of a negative literal.
            if let ([Term::IntLit(n)], Some("-")) = (args.as_slice(), head.symbol_name()) {
                if matches!(head, Term::Symbol(_)) && n.sign() != num_bigint::Sign::Minus {
                    if let SExpr::Atom(Token {
                        kind: TokenKind::Numeral(_),
                        ..
                    }) = &items[1]
                    {
                        return Ok(Term::IntLit(-n.clone()));
                    }
                }
            }
            Ok(Term::App(Box::new(head), args))
        }
    }
}

fn atom(tok: &Token) -> Result<Term, ParseError> {
    Ok(match &tok.kind {
        TokenKind::Numeral(n) => Term::IntLit(
            n.parse::<BigInt>()
                .map_err(|_| ParseError::at(tok.start, "bad numeral"))?,
        ),
        TokenKind::SpecConst(s) => Term::SpecConst(s.clone()),
        TokenKind::Str(s) => Term::StringLit(s.clone()),
        TokenKind::Symbol(s) if s == "true" => Term::BoolLit(true),
        TokenKind::Symbol(s) if s == "false" => Term::BoolLit(false),
        TokenKind::Symbol(s) => Term::Symbol(s.clone()),
        TokenKind::QuotedSymbol(s) => Term::QuotedSymbol(s.clone()),
        TokenKind::Keyword(k) => {
            return Err(ParseError::at(tok.start, format!("unexpected keyword `{k}`")))
        }
        TokenKind::LParen | TokenKind::RParen => unreachable!("parens never become atoms"),
    })
}

fn binding_list(e: &SExpr, what: &str) -> Result<Vec<(Ident, SExpr)>, ParseError> {
    let SExpr::List { items, start, .. } = e else {
        return Err(ParseError::at(e.start(), format!("expected {what} list")));
    };
    if items.is_empty() {
        return Err(ParseError::at(*start, format!("empty {what} list")));
    }
    items
        .iter()
        .map(|b| match b {
            SExpr::List { items, .. } if items.len() == 2 => {
                let name = items[0]
                    .any_symbol()
                    .ok_or_else(|| ParseError::at(items[0].start(), "expected a name"))?;
                Ok((name, items[1].clone()))
            }
            other => Err(ParseError::at(other.start(), format!("malformed {what}"))),
        })
        .collect()
}

fn quantifier(kind: QuantifierKind, items: &[SExpr], start: Pos) -> Result<Term, ParseError> {
    if items.len() != 3 {
        return Err(ParseError::at(
            start,
            format!("`{}` expects bindings and a body", kind.keyword()),
        ));
    }
    let bindings = binding_list(&items[1], "sorted variable")?
        .into_iter()
        .map(|(name, sort)| Ok(SortedVar { name, sort: term(&sort)? }))
        .collect::<Result<Vec<_>, ParseError>>()?;
    let (body, attributes) = match term(&items[2])? {
        Term::Annotated { body, attributes } => (body, attributes),
        other => (Box::new(other), Vec::new()),
    };
    Ok(Term::Quantifier {
        kind,
        bindings,
        body,
        attributes,
    })
}

fn let_term(items: &[SExpr], start: Pos) -> Result<Term, ParseError> {
    if items.len() != 3 {
        return Err(ParseError::at(start, "`let` expects bindings and a body"));
    }
    let bindings = binding_list(&items[1], "let binding")?
        .into_iter()
        .map(|(name, value)| Ok(LetBinding { name, value: term(&value)? }))
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Term::Let {
        bindings,
        body: Box::new(term(&items[2])?),
    })
}

fn attributes(items: &[SExpr]) -> Result<Vec<Attr>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let key = items[i]
            .keyword()
            .ok_or_else(|| ParseError::at(items[i].start(), "expected an attribute keyword"))?
            .to_string();
        i += 1;
        let value = match items.get(i) {
            None => AttrValue::None,
            Some(v) if v.keyword().is_some() => AttrValue::None,
            Some(SExpr::List { items: elems, .. }) => {
                i += 1;
                AttrValue::List(elems.iter().map(term).collect::<Result<_, _>>()?)
            }
            Some(v) => {
                i += 1;
                AttrValue::Term(term(v)?)
            }
        };
        out.push(Attr { key, value });
    }
    Ok(out)
}
