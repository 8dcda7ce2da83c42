//! Arithmetic expressions over the coordinates x1..xd and named per-atom
//! constants.
//!
//! Grammar: `+ - * /` with the usual precedences, `^` binding tightest and
//! associating to the right, unary minus, parentheses, and the calls
//! sin, cos, exp, log, abs, sqrt (one argument), min, max (two arguments),
//! clamp (three: value, low, high). Identifiers resolve at parse time, so
//! an undefined name is a parse error, not a runtime one. All error
//! positions are 1-based columns.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

fn err<T>(column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { column, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
    Min,
    Max,
    Clamp,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "exp" => (Func::Exp, 1),
            "log" => (Func::Log, 1),
            "abs" => (Func::Abs, 1),
            "sqrt" => (Func::Sqrt, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "clamp" => (Func::Clamp, 3),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// 0-based coordinate index into the input vector.
    Var(usize),
    /// Index into the per-atom constant table.
    Const(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Evaluates at one atom. `consts[k][atom]` is the value of the k-th
    /// named constant. Never panics on math domain issues; those surface
    /// as NaN or infinity for the caller's finiteness check.
    pub fn eval(&self, x: &[f64], consts: &[Vec<f64>], atom: usize) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Const(k) => consts[*k][atom],
            Expr::Neg(e) => -e.eval(x, consts, atom),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x, consts, atom), b.eval(x, consts, atom));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let v: Vec<f64> = args.iter().map(|e| e.eval(x, consts, atom)).collect();
                match f {
                    Func::Sin => v[0].sin(),
                    Func::Cos => v[0].cos(),
                    Func::Exp => v[0].exp(),
                    Func::Log => v[0].ln(),
                    Func::Abs => v[0].abs(),
                    Func::Sqrt => v[0].sqrt(),
                    Func::Min => v[0].min(v[1]),
                    Func::Max => v[0].max(v[1]),
                    Func::Clamp => v[0].clamp(v[1].min(v[2]), v[2].max(v[1])),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

/// One token with its 1-based start column.
#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                out.push(Spanned { tok: Tok::Plus, col });
                i += 1;
            }
            b'-' => {
                out.push(Spanned { tok: Tok::Minus, col });
                i += 1;
            }
            b'*' => {
                out.push(Spanned { tok: Tok::Star, col });
                i += 1;
            }
            b'/' => {
                out.push(Spanned { tok: Tok::Slash, col });
                i += 1;
            }
            b'^' => {
                out.push(Spanned { tok: Tok::Caret, col });
                i += 1;
            }
            b'(' => {
                out.push(Spanned { tok: Tok::LParen, col });
                i += 1;
            }
            b')' => {
                out.push(Spanned { tok: Tok::RParen, col });
                i += 1;
            }
            b',' => {
                out.push(Spanned { tok: Tok::Comma, col });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                match text.parse::<f64>() {
                    Ok(v) => out.push(Spanned { tok: Tok::Num(v), col }),
                    Err(_) => return err(col, format!("malformed number `{text}`")),
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Spanned { tok: Tok::Ident(src[start..i].to_string()), col });
            }
            _ => return err(col, format!("unexpected character `{}`", c as char)),
        }
    }
    out.push(Spanned { tok: Tok::Eof, col: src.len() + 1 });
    Ok(out)
}

/// Parsing context: the input dimension and the declared constant names,
/// in table order.
pub struct Scope<'a> {
    pub dim: usize,
    pub constants: &'a [String],
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    scope: &'a Scope<'a>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.bump();
        if t.tok == want {
            Ok(())
        } else {
            err(t.col, format!("expected {what}"))
        }
    }

    /// Pratt loop. `min_bp` is the minimum left binding power to consume.
    fn parse_expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let (op, lbp, rbp) = match self.peek().tok {
                Tok::Plus => (BinOp::Add, 1, 2),
                Tok::Minus => (BinOp::Sub, 1, 2),
                Tok::Star => (BinOp::Mul, 3, 4),
                Tok::Slash => (BinOp::Div, 3, 4),
                // Right-associative: lbp above rbp.
                Tok::Caret => (BinOp::Pow, 8, 7),
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.parse_expr(rbp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Minus => {
                // Binds tighter than * and /, looser than ^.
                let inner = self.parse_expr(5)?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Tok::LParen => {
                let inner = self.parse_expr(0)?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => self.resolve_ident(&name, t.col),
            _ => err(t.col, "expected a value"),
        }
    }

    fn resolve_ident(&mut self, name: &str, col: usize) -> Result<Expr, ParseError> {
        if let Some((func, arity)) = Func::lookup(name) {
            self.expect(Tok::LParen, &format!("`(` after function `{name}`"))?;
            let mut args = Vec::with_capacity(arity);
            loop {
                args.push(self.parse_expr(0)?);
                let t = self.bump();
                match t.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    _ => return err(t.col, "expected `,` or `)` in argument list"),
                }
            }
            if args.len() != arity {
                return err(
                    col,
                    format!("`{name}` takes {arity} argument(s), got {}", args.len()),
                );
            }
            return Ok(Expr::Call(func, args));
        }
        // Coordinate variables x1..xd.
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(idx) = rest.parse::<usize>() {
                if idx >= 1 && idx <= self.scope.dim {
                    return Ok(Expr::Var(idx - 1));
                }
                return err(
                    col,
                    format!("`{name}` is out of range; coordinates are x1..x{}", self.scope.dim),
                );
            }
        }
        if let Some(k) = self.scope.constants.iter().position(|c| c == name) {
            return Ok(Expr::Const(k));
        }
        err(col, format!("unknown identifier `{name}`"))
    }
}

/// Parses one expression against the scope. The whole input must be
/// consumed; trailing tokens are an error at their column.
pub fn parse(src: &str, scope: &Scope<'_>) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, scope };
    let e = p.parse_expr(0)?;
    let t = p.peek();
    if t.tok != Tok::Eof {
        return err(t.col, "unexpected trailing input");
    }
    Ok(e)
}
