use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Symbol(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }
}

pub fn syntax(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Syntax { line: pos.line, col: pos.col, msg: msg.into() }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|c| *c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<SExpr>> {
        self.skip_blank();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else { return Ok(None) };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return Err(syntax(start, "unclosed parenthesis")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(SExpr::List(items, start)));
                        }
                        Some(_) => items.extend(self.read()?),
                    }
                }
            }
            ')' => Err(syntax(start, "unexpected `)`")),
            '|' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(syntax(start, "unterminated quoted symbol")),
                        Some('|') => return Ok(Some(SExpr::Symbol(s, start))),
                        Some(c) => s.push(c),
                    }
                }
            }
            '"' => {
                self.bump();
                let mut s = String::from('"');
                loop {
                    match self.bump() {
                        None => return Err(syntax(start, "unterminated string")),
                        Some('"') if self.chars.peek() == Some(&'"') => {
                            self.bump();
                            s.push('"');
                        }
                        Some('"') => {
                            s.push('"');
                            return Ok(Some(SExpr::Symbol(s, start)));
                        }
                        Some(c) => s.push(c),
                    }
                }
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '|' | '"') {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Some(SExpr::Symbol(s, start)))
            }
        }
    }
}

/// Read every top-level S-expression of `text`.
pub fn read_all(text: &str) -> Result<Vec<SExpr>> {
    let mut r = Reader { chars: text.chars().peekable(), pos: Pos { line: 1, col: 1 } };
    let mut out = Vec::new();
    while let Some(e) = r.read()? {
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_comments() {
        let es = read_all("; header\n(a (b c))\n  |x y|").unwrap();
        assert_eq!(es.len(), 2);
        assert_eq!(es[0].pos(), Pos { line: 2, col: 1 });
        assert_eq!(es[1], SExpr::Symbol("x y".into(), Pos { line: 3, col: 3 }));
    }

    #[test]
    fn unbalanced() {
        match read_all("(a\n (b)").unwrap_err() {
            Error::Syntax { line, col, .. } => assert_eq!((line, col), (1, 1)),
            e => panic!("{e}"),
        }
        match read_all("a )").unwrap_err() {
            Error::Syntax { line, col, .. } => assert_eq!((line, col), (1, 3)),
            e => panic!("{e}"),
        }
    }
}
