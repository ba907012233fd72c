//! Recursive-descent parser for the Java-like subset.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::LangError;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, LangError>;

pub fn parse_functions(src: &str) -> PResult<Vec<FunctionDef>> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut fns = Vec::new();
    while p.peek() != &Tok::Eof {
        fns.push(p.function()?);
    }
    Ok(fns)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn line(&self) -> Line {
        self.toks[self.pos].line
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(LangError::Parse {
            line: self.line(),
            message: message.into(),
        })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.err(format!("expected '{p}', found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn at_type(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if matches!(s.as_str(), "int" | "boolean" | "bool" | "char" | "void"))
    }

    fn ty(&mut self) -> PResult<Type> {
        let base = match self.bump() {
            Tok::Ident(s) => match s.as_str() {
                "int" => Type::Int,
                "boolean" | "bool" => Type::Bool,
                "char" => Type::Char,
                "void" => Type::Void,
                _ => return self.err(format!("unknown type '{s}'")),
            },
            other => return self.err(format!("expected type, found {}", describe(&other))),
        };
        if self.is_punct("[") && matches!(self.peek_at(1), Tok::Punct("]")) {
            self.bump();
            self.bump();
            return match base.array_of() {
                Some(t) => Ok(t),
                None => self.err(format!("arrays of {base} are not supported")),
            };
        }
        Ok(base)
    }

    fn function(&mut self) -> PResult<FunctionDef> {
        let line = self.line();
        if !self.at_type() {
            return self.err(format!(
                "expected function definition, found {}",
                describe(self.peek())
            ));
        }
        let return_type = self.ty()?;
        let name = self.ident()?;
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            loop {
                let t = self.ty()?;
                if t == Type::Void {
                    return self.err("parameter of type void");
                }
                let n = self.ident()?;
                params.push((n, t));
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        let body = self.block()?;
        Ok(FunctionDef {
            name,
            params,
            return_type,
            body,
            line,
        })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect("{")?;
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if self.peek() == &Tok::Eof {
                return self.err("unexpected end of input, missing '}'");
            }
            out.push(self.statement()?);
        }
        self.bump();
        Ok(out)
    }

    fn body(&mut self) -> PResult<Vec<Stmt>> {
        if self.is_punct("{") {
            self.block()
        } else {
            Ok(vec![self.statement()?])
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let loc = self.line();
        let kind = if self.is_kw("if") {
            self.bump();
            self.expect("(")?;
            let cond = self.expr()?;
            self.expect(")")?;
            let then_body = self.body()?;
            let else_body = if self.is_kw("else") {
                self.bump();
                Some(self.body()?)
            } else {
                None
            };
            StmtKind::If {
                cond,
                then_body,
                else_body,
            }
        } else if self.is_kw("while") {
            self.bump();
            self.expect("(")?;
            let cond = self.expr()?;
            self.expect(")")?;
            StmtKind::While {
                cond,
                body: self.body()?,
            }
        } else if self.is_kw("for") {
            self.bump();
            self.expect("(")?;
            let init = if self.is_punct(";") {
                None
            } else {
                Some(Box::new(self.simple(loc)?))
            };
            self.expect(";")?;
            let cond = if self.is_punct(";") {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect(";")?;
            let update = if self.is_punct(")") {
                None
            } else {
                Some(Box::new(self.simple(loc)?))
            };
            self.expect(")")?;
            StmtKind::For {
                init,
                cond,
                update,
                body: self.body()?,
            }
        } else if self.is_kw("return") {
            self.bump();
            let e = if self.is_punct(";") {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect(";")?;
            StmtKind::Return(e)
        } else {
            let s = self.simple(loc)?;
            self.expect(";")?;
            return Ok(s);
        };
        Ok(Stmt { loc, kind })
    }

    /// Declaration, assignment or call, without the trailing `;`.
    fn simple(&mut self, loc: Line) -> PResult<Stmt> {
        if self.at_type() {
            let ty = self.ty()?;
            if ty == Type::Void {
                return self.err("variable of type void");
            }
            let name = self.ident()?;
            let init = if self.eat_punct("=") {
                Some(self.expr()?)
            } else {
                None
            };
            return Ok(Stmt {
                loc,
                kind: StmtKind::Decl { ty, name, init },
            });
        }
        let start = self.pos;
        let e = self.expr()?;
        let target = match &e {
            Expr::Var(n) => Some(LValue::Var(n.clone())),
            Expr::Index(n, i) => Some(LValue::Index(n.clone(), (**i).clone())),
            _ => None,
        };
        let op = match self.peek() {
            Tok::Punct("=") => Some(AssignOp::Set),
            Tok::Punct("+=") => Some(AssignOp::Add),
            Tok::Punct("-=") => Some(AssignOp::Sub),
            Tok::Punct("*=") => Some(AssignOp::Mul),
            Tok::Punct("++") | Tok::Punct("--") => None,
            _ => {
                if matches!(e, Expr::Call(..)) {
                    return Ok(Stmt {
                        loc,
                        kind: StmtKind::Expr(e),
                    });
                }
                self.pos = start;
                return self.err("expected assignment or call statement");
            }
        };
        let Some(target) = target else {
            return self.err("left-hand side is not assignable");
        };
        let (op, value) = match op {
            Some(op) => {
                self.bump();
                (op, self.expr()?)
            }
            None => {
                let op = if self.bump() == Tok::Punct("++") {
                    AssignOp::Add
                } else {
                    AssignOp::Sub
                };
                (op, Expr::Int(1))
            }
        };
        Ok(Stmt {
            loc,
            kind: StmtKind::Assign { target, op, value },
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop_here(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else {
            return None;
        };
        Some(match *p {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Mod,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop_here() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_punct("-") {
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Int(n) => Expr::Int(n.wrapping_neg()),
                e => Expr::Unary(UnOp::Neg, Box::new(e)),
            });
        }
        if self.eat_punct("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.bump() {
            Tok::Int(n) => Ok(Expr::Int(n)),
            Tok::Char(c) => Ok(Expr::Char(c)),
            Tok::Punct("(") => {
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Punct("{") => {
                let mut items = Vec::new();
                if !self.is_punct("}") {
                    loop {
                        items.push(self.expr()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect("}")?;
                Ok(Expr::ArrayLit(items))
            }
            Tok::Ident(s) if s == "true" => Ok(Expr::Bool(true)),
            Tok::Ident(s) if s == "false" => Ok(Expr::Bool(false)),
            Tok::Ident(s) if s == "new" => {
                let elem = match self.bump() {
                    Tok::Ident(t) if t == "int" => Type::Int,
                    Tok::Ident(t) if t == "char" => Type::Char,
                    other => return self.err(format!("cannot allocate {}", describe(&other))),
                };
                self.expect("[")?;
                let size = self.expr()?;
                self.expect("]")?;
                Ok(Expr::NewArray(elem, Box::new(size)))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                if self.is_punct(".") {
                    self.bump();
                    let member = self.ident()?;
                    if member == "length" && !self.is_punct("(") {
                        return Ok(Expr::Length(s));
                    }
                    self.expect("(")?;
                    let args = self.args()?;
                    return Ok(Expr::Call(format!("{s}.{member}"), args));
                }
                if self.eat_punct("(") {
                    let args = self.args()?;
                    return Ok(Expr::Call(s, args));
                }
                if self.eat_punct("[") {
                    let idx = self.expr()?;
                    self.expect("]")?;
                    return Ok(Expr::Index(s, Box::new(idx)));
                }
                Ok(Expr::Var(s))
            }
            other => {
                self.pos -= 1;
                self.err(format!("expected expression, found {}", describe(&other)))
            }
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if !self.is_punct(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(args)
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "int"
            | "boolean"
            | "bool"
            | "char"
            | "void"
            | "if"
            | "else"
            | "for"
            | "while"
            | "return"
            | "true"
            | "false"
            | "new"
    )
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("'{n}'"),
        Tok::Char(c) => format!("'{c:?}'"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Punct(p) => format!("'{p}'"),
        Tok::Eof => "end of input".into(),
    }
}
