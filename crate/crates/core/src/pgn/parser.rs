use std::collections::BTreeMap;

use super::lexer::{tokenize, Tok, Token};
use super::{
    DrawOffer, GameRecord, GameResult, PgnError, PgnMove, Termination, DRAW_OFFER_COMMENT,
};
use crate::board::{self, START_FEN};

/// Parses every game in `text`.
pub fn parse_pgn(text: &str) -> Result<Vec<GameRecord>, PgnError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut games = Vec::new();
    while p.pos < p.tokens.len() {
        games.push(p.game()?);
    }
    Ok(games)
}

/// Tag name to value, and tag name to the line and column it was read at.
type Tags = BTreeMap<String, String>;
type TagPositions = BTreeMap<String, (usize, usize)>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eof_error(&self, msg: &str) -> PgnError {
        let (line, col) = self.tokens.last().map_or((1, 1), |t| (t.line, t.col));
        PgnError::syntax(line, col, format!("unexpected end of input: {msg}"))
    }

    fn tags(&mut self) -> Result<(Tags, TagPositions), PgnError> {
        let mut tags = BTreeMap::new();
        let mut at = BTreeMap::new();
        while matches!(
            self.peek(),
            Some(Token {
                tok: Tok::LBracket,
                ..
            })
        ) {
            let open = self.next().expect("peeked");
            let name = match self.next() {
                Some(Token {
                    tok: Tok::Symbol(s),
                    ..
                }) => s,
                Some(t) => return Err(PgnError::syntax(t.line, t.col, "expected tag name")),
                None => return Err(self.eof_error("tag name")),
            };
            let value = match self.next() {
                Some(Token {
                    tok: Tok::Str(s), ..
                }) => s,
                Some(t) => {
                    return Err(PgnError::syntax(t.line, t.col, "expected tag value string"))
                }
                None => return Err(self.eof_error("tag value")),
            };
            match self.next() {
                Some(Token {
                    tok: Tok::RBracket, ..
                }) => {}
                Some(t) => return Err(PgnError::syntax(t.line, t.col, "expected `]`")),
                None => return Err(self.eof_error("`]`")),
            }
            if tags.insert(name.clone(), value).is_some() {
                return Err(PgnError::syntax(
                    open.line,
                    open.col,
                    format!("duplicate tag `{name}`"),
                ));
            }
            at.insert(name, (open.line, open.col));
        }
        Ok((tags, at))
    }

    fn skip_variation(&mut self, open: &Token) -> Result<(), PgnError> {
        let mut depth = 1;
        while depth > 0 {
            match self.next() {
                Some(Token {
                    tok: Tok::LParen, ..
                }) => depth += 1,
                Some(Token {
                    tok: Tok::RParen, ..
                }) => depth -= 1,
                Some(_) => {}
                None => {
                    return Err(PgnError::syntax(
                        open.line,
                        open.col,
                        "unterminated variation",
                    ));
                }
            }
        }
        Ok(())
    }

    fn game(&mut self) -> Result<GameRecord, PgnError> {
        let first = self.peek().cloned().expect("caller checked");
        let (headers, tag_pos) = self.tags()?;
        let tag_at = |name: &str| {
            tag_pos
                .get(name)
                .copied()
                .unwrap_or((first.line, first.col))
        };

        let start_fen = match (headers.get("SetUp").map(String::as_str), headers.get("FEN")) {
            (Some("0"), _) | (None, None) => None,
            (_, Some(fen)) => {
                let (line, col) = tag_at("FEN");
                board::parse_fen(fen).map_err(|e| PgnError::BadFen {
                    line,
                    col,
                    reason: e.to_string(),
                })?;
                Some(fen.clone()).filter(|f| f.as_str() != START_FEN)
            }
            (Some(_), None) => {
                let (line, col) = tag_at("SetUp");
                return Err(PgnError::BadFen {
                    line,
                    col,
                    reason: "SetUp tag without a FEN tag".into(),
                });
            }
        };

        let mut b =
            board::parse_fen(start_fen.as_deref().unwrap_or(START_FEN)).expect("validated above");
        let start_side = board::side_to_move(&b);
        let mut moves: Vec<PgnMove> = Vec::new();
        let mut leading_comments = Vec::new();
        let mut draw_offers: Vec<DrawOffer> = Vec::new();

        let terminator = loop {
            let Some(t) = self.next() else {
                return Err(self.eof_error("missing game terminator"));
            };
            match t.tok {
                Tok::Comment(c) => {
                    if c.trim() == DRAW_OFFER_COMMENT {
                        let ply = moves.len();
                        if ply == 0 {
                            return Err(PgnError::DrawOffer {
                                ply,
                                reason: "offer before the first move".into(),
                            });
                        }
                        if draw_offers.last().map(|o| o.ply) != Some(ply) {
                            let player = if ply % 2 == 1 {
                                start_side
                            } else {
                                start_side.opposite()
                            };
                            draw_offers.push(DrawOffer { ply, player });
                        }
                    }
                    match moves.last_mut() {
                        Some(m) => m.comments.push(c),
                        None => leading_comments.push(c),
                    }
                }
                Tok::Nag | Tok::Period => {}
                Tok::LParen => self.skip_variation(&t)?,
                Tok::RParen => return Err(PgnError::syntax(t.line, t.col, "unmatched `)`")),
                Tok::LBracket => {
                    return Err(PgnError::syntax(t.line, t.col, "tag pair inside movetext"));
                }
                Tok::RBracket | Tok::Str(_) => {
                    return Err(PgnError::syntax(
                        t.line,
                        t.col,
                        "unexpected token in movetext",
                    ));
                }
                Tok::Symbol(s) => {
                    if let Some(r) = GameResult::from_token(&s) {
                        break (r, t.line, t.col);
                    }
                    if s.bytes().all(|c| c.is_ascii_digit()) {
                        continue;
                    }
                    let ply = moves.len() + 1;
                    let mv = board::resolve_san(&b, &s).map_err(|e| PgnError::IllegalMove {
                        line: t.line,
                        col: t.col,
                        ply,
                        san: s.clone(),
                        reason: e.to_string(),
                    })?;
                    moves.push(PgnMove {
                        san: board::san(&b, mv),
                        uci: board::uci_text(mv),
                        comments: Vec::new(),
                    });
                    b = b.make_move_new(mv);
                }
            }
        };

        let (result, line, col) = terminator;
        if let Some(tag) = headers.get("Result") {
            if tag != result.token() {
                return Err(PgnError::ResultMismatch {
                    line,
                    col,
                    tag: tag.clone(),
                    terminator: result.token().into(),
                });
            }
        }
        let termination = headers
            .get("Termination")
            .map_or(Termination::Normal, |v| Termination::from_tag(v));
        Ok(GameRecord {
            headers,
            start_fen,
            moves,
            result,
            termination,
            draw_offers,
            leading_comments,
            line: first.line,
        })
    }
}
