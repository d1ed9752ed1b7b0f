//! Tokenizer for PGN import format.

use super::PgnError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    LBracket,
    RBracket,
    LParen,
    RParen,
    Period,
    Str(String),
    /// Move text, tag names, move numbers and result markers.
    Symbol(String),
    Nag,
    Comment(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_+#=:-/!?".contains(c)
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, PgnError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, col) = (cur.line, cur.col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, col });
        match c {
            _ if c.is_whitespace() => {
                cur.bump();
            }
            '%' if col == 1 => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            ';' => {
                cur.bump();
                let mut s = String::new();
                while let Some(c) = cur.peek().filter(|&c| c != '\n') {
                    s.push(c);
                    cur.bump();
                }
                push(&mut out, Tok::Comment(s));
            }
            '{' => {
                cur.bump();
                let mut s = String::new();
                loop {
                    match cur.bump() {
                        Some('}') => break,
                        Some(c) => s.push(c),
                        None => {
                            return Err(PgnError::syntax(line, col, "unterminated comment"));
                        }
                    }
                }
                push(&mut out, Tok::Comment(s));
            }
            '"' => {
                cur.bump();
                let mut s = String::new();
                loop {
                    match cur.bump() {
                        Some('"') => break,
                        Some('\\') => match cur.bump() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            _ => {
                                return Err(PgnError::syntax(
                                    cur.line,
                                    cur.col,
                                    "bad string escape",
                                ))
                            }
                        },
                        Some('\n') | None => {
                            return Err(PgnError::syntax(line, col, "unterminated string"));
                        }
                        Some(c) => s.push(c),
                    }
                }
                push(&mut out, Tok::Str(s));
            }
            '$' => {
                cur.bump();
                let mut n = 0;
                while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                    n += 1;
                }
                if n == 0 {
                    return Err(PgnError::syntax(line, col, "`$` without a number"));
                }
                push(&mut out, Tok::Nag);
            }
            '[' | ']' | '(' | ')' | '.' | '*' => {
                cur.bump();
                let tok = match c {
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '.' => Tok::Period,
                    _ => Tok::Symbol("*".into()),
                };
                push(&mut out, tok);
            }
            _ if symbol_char(c) => {
                let mut s = String::new();
                while let Some(c) = cur.peek().filter(|&c| symbol_char(c)) {
                    s.push(c);
                    cur.bump();
                }
                push(&mut out, Tok::Symbol(s));
            }
            _ => {
                return Err(PgnError::syntax(
                    line,
                    col,
                    format!("unexpected character `{c}`"),
                ))
            }
        }
    }
    Ok(out)
}
