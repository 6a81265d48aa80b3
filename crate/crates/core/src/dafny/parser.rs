use super::ast::*;
use super::instrument::is_ghost_function;
use super::lexer::{tokenize, Tok, Token};
use super::DafnyError;

const KEYWORDS: &[&str] = &[
    "lemma", "method", "function", "ghost", "requires", "ensures", "var", "assert", "assume", "if",
    "then", "else", "true", "false",
];

/// Recognised but outside the supported fragment.
const UNSUPPORTED: &[&str] = &[
    "while", "for", "forall", "exists", "match", "calc", "class", "datatype", "codatatype",
    "module", "import", "returns", "return", "modifies", "reads", "decreases", "invariant", "by",
    "predicate", "new", "old", "fresh", "label", "break", "reveal", "opaque", "twostate", "trait",
    "iterator", "type", "const", "static", "print", "expect", "yield", "multiset", "map", "set",
    "array", "real", "char", "in",
];

pub fn parse_program(src: &str) -> Result<SourceUnit, DafnyError> {
    let mut p = Parser::new(src)?;
    let mut decls = Vec::new();
    while !p.at_eof() {
        decls.push(p.decl()?);
    }
    Ok(SourceUnit { decls })
}

/// Parses a standalone expression, e.g. a tactic argument.
pub fn parse_expression(src: &str) -> Result<Expr, DafnyError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if !p.at_eof() {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Iff,
    Implies,
    Logic,
    Cmp,
    Add,
    Mul,
}

impl Parser {
    fn new(src: &str) -> Result<Self, DafnyError> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        let hit = self.is_punct(p);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(w) => format!("`{w}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn unexpected(&self, wanted: &str) -> DafnyError {
        if let Tok::Ident(w) = self.peek() {
            if UNSUPPORTED.contains(&w.as_str()) {
                return DafnyError::unsupported(self.span(), w.clone());
            }
        }
        DafnyError::syntax(
            self.span(),
            format!("expected {wanted}, found {}", Self::describe(self.peek())),
        )
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), DafnyError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), DafnyError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    /// A user identifier: not a keyword, not reserved.
    fn ident(&mut self) -> Result<String, DafnyError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(w) if KEYWORDS.contains(&w.as_str()) => Err(self.unexpected("identifier")),
            Tok::Ident(w) if UNSUPPORTED.contains(&w.as_str()) => {
                Err(DafnyError::unsupported(span, w))
            }
            Tok::Ident(w) => {
                if w.starts_with('_') && !is_ghost_function(&w) {
                    return Err(DafnyError::ReservedIdentifier {
                        line: span.line,
                        col: span.col,
                        name: w,
                    });
                }
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn decl(&mut self) -> Result<Decl, DafnyError> {
        let span = self.span();
        self.eat_kw("ghost");
        let kind = if self.eat_kw("lemma") {
            DeclKind::Lemma
        } else if self.eat_kw("method") {
            DeclKind::Method
        } else if self.eat_kw("function") {
            self.eat_kw("method");
            DeclKind::Function
        } else {
            return Err(self.unexpected("`lemma`, `method` or `function`"));
        };
        let name = self.ident()?;
        let mut type_params = Vec::new();
        if self.eat_punct("<") {
            loop {
                type_params.push(self.ident()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(">")?;
        }
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            loop {
                let name = self.ident()?;
                self.expect_punct(":")?;
                let ty_span = self.span();
                let ty = self.ty()?;
                let scalar = ty.args.is_empty() && ["int", "nat", "bool"].contains(&ty.name.as_str());
                if kind != DeclKind::Function && !scalar {
                    return Err(DafnyError::unsupported(ty_span, format!("parameter type {}", ty.name)));
                }
                params.push(Param { name, ty });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let result = if kind == DeclKind::Function {
            self.expect_punct(":")?;
            Some(self.ty()?)
        } else {
            None
        };
        let (mut requires, mut ensures) = (Vec::new(), Vec::new());
        loop {
            let span = self.span();
            if self.eat_kw("requires") {
                let attrs = self.attributes()?;
                if has_ipm(&attrs) {
                    return Err(DafnyError::syntax(
                        span,
                        "{:ipm} is only allowed on ensures clauses and assertions",
                    ));
                }
                requires.push(Clause {
                    attrs,
                    expr: self.expr()?,
                    span,
                });
            } else if self.eat_kw("ensures") {
                let attrs = self.attributes()?;
                if kind == DeclKind::Function && has_ipm(&attrs) {
                    return Err(DafnyError::syntax(span, "{:ipm} is not allowed on functions"));
                }
                ensures.push(Clause {
                    attrs,
                    expr: self.expr()?,
                    span,
                });
            } else {
                break;
            }
        }
        self.expect_punct("{")?;
        let body = if kind == DeclKind::Function {
            let e = self.expr()?;
            self.expect_punct("}")?;
            Body::Expr(e)
        } else {
            Body::Stmts(self.block_rest()?)
        };
        Ok(Decl {
            kind,
            name,
            type_params,
            params,
            result,
            requires,
            ensures,
            body,
            span,
        })
    }

    fn ty(&mut self) -> Result<Type, DafnyError> {
        let name = match self.peek().clone() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.pos += 1;
                w
            }
            _ => return Err(self.unexpected("type")),
        };
        let mut args = Vec::new();
        if self.eat_punct("<") {
            loop {
                args.push(self.ty()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(">")?;
        }
        Ok(Type { name, args })
    }

    fn attributes(&mut self) -> Result<Vec<Attribute>, DafnyError> {
        let mut attrs = Vec::new();
        while self.eat_punct("{:") {
            let name = match self.bump().tok {
                Tok::Ident(w) => w,
                _ => return Err(DafnyError::syntax(self.span(), "expected attribute name")),
            };
            let mut args = Vec::new();
            if !self.is_punct("}") {
                loop {
                    args.push(self.expr()?);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct("}")?;
            attrs.push(Attribute { name, args });
        }
        Ok(attrs)
    }

    /// Statements up to and including the closing brace.
    fn block_rest(&mut self) -> Result<Vec<Stmt>, DafnyError> {
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            if self.at_eof() {
                return Err(self.unexpected("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, DafnyError> {
        let span = self.span();
        if self.eat_kw("var") {
            let name = self.ident()?;
            let ty = if self.eat_punct(":") { Some(self.ty()?) } else { None };
            let init = if self.eat_punct(":=") { Some(self.expr()?) } else { None };
            self.expect_punct(";")?;
            return Ok(Stmt::VarDecl { name, ty, init, span });
        }
        if self.eat_kw("assert") {
            let attrs = self.attributes()?;
            let expr = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt::Assert { attrs, expr, span });
        }
        if self.eat_kw("assume") {
            let expr = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt::Assume { expr, span });
        }
        if self.is_kw("if") {
            return self.if_stmt();
        }
        Err(self.unexpected("statement"))
    }

    fn if_stmt(&mut self) -> Result<Stmt, DafnyError> {
        let span = self.span();
        self.expect_kw("if")?;
        let cond = self.expr()?;
        self.expect_punct("{")?;
        let then = self.block_rest()?;
        let els = if self.eat_kw("else") {
            if self.is_kw("if") {
                Some(vec![self.if_stmt()?])
            } else {
                self.expect_punct("{")?;
                Some(self.block_rest()?)
            }
        } else {
            None
        };
        Ok(Stmt::If {
            cond,
            then,
            els,
            span,
        })
    }

    pub fn expr(&mut self) -> Result<Expr, DafnyError> {
        self.level(Level::Iff)
    }

    fn level(&mut self, level: Level) -> Result<Expr, DafnyError> {
        match level {
            Level::Iff => {
                let mut lhs = self.level(Level::Implies)?;
                while self.eat_punct("<==>") {
                    let rhs = self.level(Level::Implies)?;
                    lhs = Expr::bin(BinOp::Iff, lhs, rhs);
                }
                Ok(lhs)
            }
            Level::Implies => {
                let lhs = self.level(Level::Logic)?;
                if self.eat_punct("==>") {
                    let rhs = self.level(Level::Implies)?;
                    return Ok(Expr::bin(BinOp::Implies, lhs, rhs));
                }
                Ok(lhs)
            }
            Level::Logic => {
                let mut lhs = self.level(Level::Cmp)?;
                let mut seen: Option<BinOp> = None;
                loop {
                    let op = if self.is_punct("&&") {
                        BinOp::And
                    } else if self.is_punct("||") {
                        BinOp::Or
                    } else {
                        return Ok(lhs);
                    };
                    if seen.is_some_and(|s| s != op) {
                        return Err(DafnyError::syntax(
                            self.span(),
                            "`&&` and `||` cannot be mixed without parentheses",
                        ));
                    }
                    seen = Some(op);
                    self.pos += 1;
                    let rhs = self.level(Level::Cmp)?;
                    lhs = Expr::bin(op, lhs, rhs);
                }
            }
            Level::Cmp => {
                let lhs = self.level(Level::Add)?;
                let Some(op) = self.cmp_op() else {
                    return Ok(lhs);
                };
                self.pos += 1;
                let rhs = self.level(Level::Add)?;
                if self.cmp_op().is_some() {
                    return Err(DafnyError::syntax(
                        self.span(),
                        "comparison chains need parentheses",
                    ));
                }
                Ok(Expr::bin(op, lhs, rhs))
            }
            Level::Add => {
                let mut lhs = self.level(Level::Mul)?;
                loop {
                    let op = if self.is_punct("+") {
                        BinOp::Add
                    } else if self.is_punct("-") {
                        BinOp::Sub
                    } else {
                        return Ok(lhs);
                    };
                    self.pos += 1;
                    let rhs = self.level(Level::Mul)?;
                    lhs = Expr::bin(op, lhs, rhs);
                }
            }
            Level::Mul => {
                let mut lhs = self.unary()?;
                loop {
                    let op = if self.is_punct("*") {
                        BinOp::Mul
                    } else if self.is_punct("/") {
                        BinOp::Div
                    } else if self.is_punct("%") {
                        BinOp::Mod
                    } else {
                        return Ok(lhs);
                    };
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::bin(op, lhs, rhs);
                }
            }
        }
    }

    fn cmp_op(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else {
            return None;
        };
        Some(match *p {
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            _ => return None,
        })
    }

    fn unary(&mut self) -> Result<Expr, DafnyError> {
        if self.eat_punct("-") {
            let inner = self.unary()?;
            return Ok(match inner {
                // `-5` is a literal, not a negation
                Expr::Int(n) if matches!(self.toks[self.pos - 1].tok, Tok::Int(_)) => Expr::Int(-n),
                e => Expr::Unary(UnOp::Neg, Box::new(e)),
            });
        }
        if self.eat_punct("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, DafnyError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Tok::Str(s) => {
                self.pos += 1;
                Ok(Expr::Str(s))
            }
            Tok::Punct("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("[") => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.is_punct("]") {
                    loop {
                        items.push(self.expr()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct("]")?;
                Ok(Expr::SeqDisplay(items))
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.pos += 1;
                Ok(Expr::Bool(w == "true"))
            }
            Tok::Ident(w) if w == "if" => {
                self.pos += 1;
                let c = self.expr()?;
                self.expect_kw("then")?;
                let a = self.expr()?;
                self.expect_kw("else")?;
                let b = self.expr()?;
                Ok(Expr::Ite(Box::new(c), Box::new(a), Box::new(b)))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.is_punct("(") && !matches!(self.peek_at(1), Tok::Eof) {
                    self.pos += 1;
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    return Ok(Expr::Call(name, args));
                }
                Ok(Expr::Var(name))
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::var(n)
    }

    #[test]
    fn precedence() {
        let e = parse_expression("x * (x + 1) % 2 == 0").unwrap();
        let lhs = Expr::bin(
            BinOp::Mod,
            Expr::bin(BinOp::Mul, v("x"), Expr::bin(BinOp::Add, v("x"), Expr::int(1))),
            Expr::int(2),
        );
        assert_eq!(e, Expr::bin(BinOp::Eq, lhs, Expr::int(0)));
    }

    #[test]
    fn implication_is_right_associative() {
        let e = parse_expression("a ==> b ==> c").unwrap();
        assert_eq!(
            e,
            Expr::bin(BinOp::Implies, v("a"), Expr::bin(BinOp::Implies, v("b"), v("c")))
        );
        let e = parse_expression("a <==> b || c ==> d").unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Iff, ..)));
    }

    #[test]
    fn negative_literal_vs_negation() {
        assert_eq!(parse_expression("-5").unwrap(), Expr::int(-5));
        assert_eq!(
            parse_expression("-x").unwrap(),
            Expr::Unary(UnOp::Neg, Box::new(v("x")))
        );
        assert_eq!(
            parse_expression("-(5)").unwrap(),
            Expr::Unary(UnOp::Neg, Box::new(Expr::int(5)))
        );
    }

    #[test]
    fn mixing_and_or_needs_parens() {
        assert!(parse_expression("a && b || c").is_err());
        assert!(parse_expression("(a && b) || c").is_ok());
        assert!(parse_expression("a < b < c").is_err());
    }

    #[test]
    fn program_with_statements() {
        let src = "lemma L(x: int)\n  requires x > 0\n  ensures {:ipm} x >= 0\n{\n  var y: int := x;\n  if y > 0 { assert {:ipm} y > 0; } else if y == 0 { assume false; } else { }\n}\n";
        let unit = parse_program(src).unwrap();
        assert_eq!(unit.decls.len(), 1);
        assert_eq!(unit.ipm_count(), 2);
        let Body::Stmts(body) = &unit.decls[0].body else {
            panic!()
        };
        assert_eq!(body.len(), 2);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_program("lemma L(x: int)\n  ensures x >\n{ }").unwrap_err();
        assert!(matches!(err, DafnyError::Syntax { line: 3, col: 1, .. }), "{err:?}");
        let err = parse_program("lemma L(_x: int) { }").unwrap_err();
        assert!(matches!(err, DafnyError::ReservedIdentifier { .. }));
        let err = parse_program("lemma L(x: int) { while true { } }").unwrap_err();
        assert!(matches!(err, DafnyError::Unsupported { ref construct, .. } if construct == "while"));
        let err = parse_program("lemma L(x: int) requires {:ipm} x > 0 { }").unwrap_err();
        assert!(err.to_string().contains("{:ipm}"));
        let err = parse_program("method M(s: seq<int>) { }").unwrap_err();
        assert!(matches!(err, DafnyError::Unsupported { .. }));
    }
}
