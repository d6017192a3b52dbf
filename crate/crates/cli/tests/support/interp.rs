//! Interpreter for the nested-conditional functions the emitter writes, in
//! either dialect. It knows nothing of the tree types: it parses the text.

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
}

fn lex(src: &str) -> Vec<Tok> {
    const SYMS: [&str; 12] = ["<=", "->", "{", "}", "(", ")", ";", ",", ":", "#", "[", "]"];
    let b = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    'outer: while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("/*") {
            i += src[i..].find("*/").expect("closed comment") + 2;
            continue;
        }
        if src[i..].starts_with("//") {
            i += src[i..].find('\n').unwrap_or(src.len() - i);
            continue;
        }
        for s in SYMS {
            if src[i..].starts_with(s) {
                out.push(Tok::Sym(s));
                i += s.len();
                continue 'outer;
            }
        }
        if c.is_ascii_digit() || c == '-' || c == '.' {
            let start = i;
            i += 1;
            while i < b.len() {
                let d = b[i] as char;
                let exp_sign = (d == '-' || d == '+') && matches!(b[i - 1], b'e' | b'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(Tok::Num(src[start..i].to_string()));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(Tok::Ident(src[start..i].to_string()));
            continue;
        }
        panic!("unexpected character {c:?} at byte {i}");
    }
    out
}

#[derive(Debug)]
enum Stmt {
    Return(usize),
    If {
        param: usize,
        threshold: f64,
        then: Box<Stmt>,
        otherwise: Box<Stmt>,
    },
}

#[derive(Debug)]
pub struct Function {
    pub name: String,
    pub params: Vec<String>,
    body: Stmt,
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].clone();
        self.pos += 1;
        t
    }
    fn sym(&mut self, s: &str) {
        match self.next() {
            Tok::Sym(x) if x == s => {}
            other => panic!("expected {s:?}, found {other:?}"),
        }
    }
    fn eat_sym(&mut self, s: &'static str) -> bool {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn ident(&mut self) -> String {
        match self.next() {
            Tok::Ident(s) => s,
            other => panic!("expected identifier, found {other:?}"),
        }
    }
    fn keyword(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn function(&mut self) -> Function {
        while self.eat_sym("#") {
            self.sym("[");
            while self.next() != Tok::Sym("]") {}
        }
        let rust = if self.keyword("pub") {
            assert!(self.keyword("fn"));
            true
        } else {
            assert!(self.keyword("static") && self.keyword("inline") && self.keyword("int"));
            false
        };
        let name = self.ident();
        self.sym("(");
        let mut params = Vec::new();
        while !self.eat_sym(")") {
            if rust {
                params.push(self.ident());
                self.sym(":");
                assert_eq!(self.ident(), "f64");
            } else {
                assert_eq!(self.ident(), "double");
                params.push(self.ident());
            }
            if self.peek() == Some(&Tok::Sym(",")) {
                self.pos += 1;
            }
        }
        if self.eat_sym("->") {
            assert_eq!(self.ident(), "usize");
        }
        let body = self.block(&params);
        Function { name, params, body }
    }

    fn block(&mut self, params: &[String]) -> Stmt {
        self.sym("{");
        let s = self.stmt(params);
        self.sym("}");
        s
    }

    fn stmt(&mut self, params: &[String]) -> Stmt {
        if self.keyword("return") {
            let v = self.number();
            self.sym(";");
            return Stmt::Return(v as usize);
        }
        if self.keyword("if") {
            let paren = self.eat_sym("(");
            let var = self.ident();
            let param = params.iter().position(|p| *p == var).unwrap_or_else(|| panic!("unknown variable {var}"));
            self.sym("<=");
            let threshold = self.number();
            if paren {
                self.sym(")");
            }
            let then = Box::new(self.block(params));
            assert!(self.keyword("else"), "if without else");
            let otherwise = Box::new(self.block(params));
            return Stmt::If {
                param,
                threshold,
                then,
                otherwise,
            };
        }
        // tail expression
        Stmt::Return(self.number() as usize)
    }

    fn number(&mut self) -> f64 {
        match self.next() {
            Tok::Num(s) => s.parse().unwrap_or_else(|_| panic!("bad literal {s}")),
            other => panic!("expected number, found {other:?}"),
        }
    }
}

/// Parses the single function in `src`.
pub fn parse(src: &str) -> Function {
    let mut p = Parser { toks: lex(src), pos: 0 };
    let f = p.function();
    assert_eq!(p.pos, p.toks.len(), "trailing tokens after function");
    f
}

impl Function {
    pub fn call(&self, args: &[f64]) -> usize {
        assert_eq!(args.len(), self.params.len());
        let mut s = &self.body;
        loop {
            match s {
                Stmt::Return(v) => return *v,
                Stmt::If {
                    param,
                    threshold,
                    then,
                    otherwise,
                } => s = if args[*param] <= *threshold { then } else { otherwise },
            }
        }
    }
}
