use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    S,
    Np,
    N,
    Pp,
}

impl Prim {
    fn as_str(self) -> &'static str {
        match self {
            Prim::S => "S",
            Prim::Np => "NP",
            Prim::N => "N",
            Prim::Pp => "PP",
        }
    }
}

/// A syntactic category. `Fwd(res, arg)` is `res/arg` (argument to the
/// right); `Bwd(res, arg)` is `res\arg` (argument to the left).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Prim(Prim),
    Fwd(Box<Category>, Box<Category>),
    Bwd(Box<Category>, Box<Category>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad category {input:?} at offset {offset}: {message}")]
pub struct CategoryError {
    pub input: String,
    pub offset: usize,
    pub message: String,
}

impl Category {
    pub const S: Category = Category::Prim(Prim::S);
    pub const NP: Category = Category::Prim(Prim::Np);
    pub const N: Category = Category::Prim(Prim::N);
    pub const PP: Category = Category::Prim(Prim::Pp);

    pub fn fwd(res: Category, arg: Category) -> Category {
        Category::Fwd(Box::new(res), Box::new(arg))
    }

    pub fn bwd(res: Category, arg: Category) -> Category {
        Category::Bwd(Box::new(res), Box::new(arg))
    }

    /// Number of arguments the category takes before becoming primitive.
    pub fn arity(&self) -> usize {
        match self {
            Category::Prim(_) => 0,
            Category::Fwd(r, _) | Category::Bwd(r, _) => 1 + r.arity(),
        }
    }

    pub fn is_s(&self) -> bool {
        *self == Category::S
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        match self {
            Category::Prim(p) => f.write_str(p.as_str()),
            Category::Fwd(r, a) | Category::Bwd(r, a) => {
                let slash = if matches!(self, Category::Fwd(..)) { '/' } else { '\\' };
                if nested {
                    f.write_str("(")?;
                }
                r.write(f, true)?;
                write!(f, "{slash}")?;
                a.write(f, true)?;
                if nested {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, false)
    }
}

struct CatParser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl<'a> CatParser<'a> {
    fn err(&self, message: impl Into<String>) -> CategoryError {
        let offset = self.chars.get(self.pos).map_or(self.src.len(), |c| c.0);
        CategoryError { input: self.src.to_string(), offset, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    // Slashes are left-associative: S\NP/NP == (S\NP)/NP.
    fn expr(&mut self) -> Result<Category, CategoryError> {
        let mut left = self.atom()?;
        while let Some(c @ ('/' | '\\')) = self.peek() {
            self.pos += 1;
            let right = self.atom()?;
            left = if c == '/' { Category::fwd(left, right) } else { Category::bwd(left, right) };
        }
        Ok(left)
    }

    fn atom(&mut self) -> Result<Category, CategoryError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                let prim = match name.as_str() {
                    "S" => Prim::S,
                    "NP" => Prim::Np,
                    "N" => Prim::N,
                    "PP" => Prim::Pp,
                    _ => {
                        self.pos = start;
                        return Err(self.err(format!("unknown primitive {name:?}")));
                    }
                };
                Ok(Category::Prim(prim))
            }
            Some(c) => Err(self.err(format!("unexpected {c:?}"))),
            None => Err(self.err("unexpected end")),
        }
    }
}

impl FromStr for Category {
    type Err = CategoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = CatParser { src: s, chars: s.char_indices().collect(), pos: 0 };
        let cat = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(cat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let c: Category = "(S\\NP)/NP".parse().unwrap();
        assert_eq!(c, Category::fwd(Category::bwd(Category::S, Category::NP), Category::NP));
        assert_eq!(c.to_string(), "(S\\NP)/NP");
        assert_eq!(c.arity(), 2);
        assert_eq!("S\\NP/NP".parse::<Category>().unwrap(), c);
        let pp: Category = "(PP/NP)\\(PP/NP)".parse().unwrap();
        assert_eq!(pp.to_string(), "(PP/NP)\\(PP/NP)");
        assert_eq!(pp.arity(), 2);
    }

    #[test]
    fn malformed() {
        assert!("(S\\NP".parse::<Category>().is_err());
        assert!("S/".parse::<Category>().is_err());
        assert!("VP".parse::<Category>().is_err());
        assert!("".parse::<Category>().is_err());
        assert!("S NP".parse::<Category>().is_err());
    }
}
