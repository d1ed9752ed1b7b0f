//! Chess positions: strict FEN validation, SAN resolution and rendering,
//! and perft, on top of the `chess` crate's legal move generator.

use std::fmt;
use std::str::FromStr;

use chess::{BoardStatus, File, MoveGen, Piece, Rank, Square};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chess::{Board, ChessMove};

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn opposite(self) -> Self {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Color::White => 0,
            Color::Black => 1,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::White => "white",
            Color::Black => "black",
        })
    }
}

impl From<chess::Color> for Color {
    fn from(c: chess::Color) -> Self {
        match c {
            chess::Color::White => Color::White,
            chess::Color::Black => Color::Black,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("invalid FEN `{fen}`: {reason}")]
    InvalidFen { fen: String, reason: String },
    #[error("illegal move `{mv}` in position {fen}")]
    IllegalMove { mv: String, fen: String },
    #[error("ambiguous move `{mv}` in position {fen}")]
    AmbiguousMove { mv: String, fen: String },
    #[error("malformed move `{0}`")]
    MalformedMove(String),
}

fn fen_err(fen: &str, reason: impl Into<String>) -> BoardError {
    BoardError::InvalidFen {
        fen: fen.to_string(),
        reason: reason.into(),
    }
}

/// Parses a FEN string, rejecting anything the move generator cannot
/// safely handle. Move counters are optional.
pub fn parse_fen(fen: &str) -> Result<Board, BoardError> {
    let fields: Vec<&str> = fen.split_whitespace().collect();
    if !(4..=6).contains(&fields.len()) {
        return Err(fen_err(fen, "expected 4 to 6 fields"));
    }
    let ranks: Vec<&str> = fields[0].split('/').collect();
    if ranks.len() != 8 {
        return Err(fen_err(fen, "placement must have 8 ranks"));
    }
    let (mut white_kings, mut black_kings) = (0, 0);
    // Per side, counts of P N B R Q.
    let mut material = [[0u32; 5]; 2];
    for (i, rank) in ranks.iter().enumerate() {
        let mut width = 0u32;
        for c in rank.chars() {
            if let Some(k) = "pnbrq".find(c.to_ascii_lowercase()) {
                material[usize::from(c.is_ascii_lowercase())][k] += 1;
            }
            match c {
                '1'..='8' => width += c.to_digit(10).unwrap(),
                'p' | 'P' if i == 0 || i == 7 => {
                    return Err(fen_err(fen, "pawn on a back rank"));
                }
                'p' | 'n' | 'b' | 'r' | 'q' | 'P' | 'N' | 'B' | 'R' | 'Q' => width += 1,
                'K' => {
                    white_kings += 1;
                    width += 1
                }
                'k' => {
                    black_kings += 1;
                    width += 1
                }
                _ => return Err(fen_err(fen, format!("unexpected character `{c}`"))),
            }
            if width > 8 {
                return Err(fen_err(fen, format!("rank {} is too wide", 8 - i)));
            }
        }
        if width != 8 {
            return Err(fen_err(fen, format!("rank {} is too short", 8 - i)));
        }
    }
    if white_kings != 1 || black_kings != 1 {
        return Err(fen_err(fen, "each side needs exactly one king"));
    }
    for [p, n, b, r, q] in material {
        // Pieces beyond the starting set must have come from promotions.
        let promoted =
            n.saturating_sub(2) + b.saturating_sub(2) + r.saturating_sub(2) + q.saturating_sub(1);
        if p > 8 || p + promoted > 8 {
            return Err(fen_err(fen, "more material than promotions allow"));
        }
    }
    let white_to_move = match fields[1] {
        "w" => true,
        "b" => false,
        other => return Err(fen_err(fen, format!("bad side to move `{other}`"))),
    };
    let castling = fields[2];
    if castling != "-" {
        let mut last = None;
        for c in castling.chars() {
            let pos = "KQkq"
                .find(c)
                .ok_or_else(|| fen_err(fen, format!("bad castling flag `{c}`")))?;
            if last.is_some_and(|l| pos <= l) {
                return Err(fen_err(fen, "castling flags out of order"));
            }
            last = Some(pos);
        }
    }
    let ep = fields[3];
    if ep != "-" {
        let b = ep.as_bytes();
        let want = if white_to_move { b'6' } else { b'3' };
        if b.len() != 2 || !(b'a'..=b'h').contains(&b[0]) || b[1] != want {
            return Err(fen_err(fen, format!("bad en passant square `{ep}`")));
        }
    }
    for counter in fields.iter().skip(4) {
        counter
            .parse::<u32>()
            .map_err(|_| fen_err(fen, format!("bad move counter `{counter}`")))?;
    }
    let core = fields[..4].join(" ");
    Board::from_str(&core).map_err(|_| fen_err(fen, "position is not reachable"))
}

/// Standard FEN of `board`.
///
/// The en passant field names the target square, and only when an enemy
/// pawn stands ready to capture. Move counters are not tracked and always
/// read `0 1`.
pub fn to_fen(board: &Board) -> String {
    let text = board.to_string();
    let mut fields: Vec<String> = text.split(' ').map(str::to_string).collect();
    if let Some(pawn) = board.en_passant() {
        // The crate stores the square of the pawn that just advanced two.
        let target = match board.side_to_move() {
            chess::Color::White => pawn.up(),
            chess::Color::Black => pawn.down(),
        };
        fields[3] = target.map_or_else(|| "-".to_string(), |sq| sq.to_string());
    }
    fields.join(" ")
}

/// Placement, side, castling and en passant fields of [`to_fen`].
pub fn position_key(board: &Board) -> String {
    to_fen(board)
        .split(' ')
        .take(4)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn side_to_move(board: &Board) -> Color {
    board.side_to_move().into()
}

pub fn is_game_over(board: &Board) -> bool {
    board.status() != BoardStatus::Ongoing
}

pub fn is_checkmate(board: &Board) -> bool {
    board.status() == BoardStatus::Checkmate
}

/// Parses and legality-checks a long-algebraic move such as `e2e4` or `e7e8q`.
pub fn parse_uci_move(board: &Board, text: &str) -> Result<ChessMove, BoardError> {
    let b = text.as_bytes();
    if !(b.len() == 4 || b.len() == 5) {
        return Err(BoardError::MalformedMove(text.to_string()));
    }
    let square = |f: u8, r: u8| -> Option<Square> {
        if (b'a'..=b'h').contains(&f) && (b'1'..=b'8').contains(&r) {
            Some(Square::make_square(
                Rank::from_index((r - b'1') as usize),
                File::from_index((f - b'a') as usize),
            ))
        } else {
            None
        }
    };
    let from = square(b[0], b[1]).ok_or_else(|| BoardError::MalformedMove(text.to_string()))?;
    let to = square(b[2], b[3]).ok_or_else(|| BoardError::MalformedMove(text.to_string()))?;
    let promo = match b.get(4) {
        None => None,
        Some(b'q') => Some(Piece::Queen),
        Some(b'r') => Some(Piece::Rook),
        Some(b'b') => Some(Piece::Bishop),
        Some(b'n') => Some(Piece::Knight),
        Some(_) => return Err(BoardError::MalformedMove(text.to_string())),
    };
    let mv = ChessMove::new(from, to, promo);
    if MoveGen::new_legal(board).any(|m| m == mv) {
        Ok(mv)
    } else {
        Err(BoardError::IllegalMove {
            mv: text.to_string(),
            fen: to_fen(board),
        })
    }
}

/// Long-algebraic text of a move (`e2e4`, `e7e8q`, castling as `e1g1`).
pub fn uci_text(mv: ChessMove) -> String {
    mv.to_string()
}

fn piece_letter(p: Piece) -> Option<char> {
    match p {
        Piece::Pawn => None,
        Piece::Knight => Some('N'),
        Piece::Bishop => Some('B'),
        Piece::Rook => Some('R'),
        Piece::Queen => Some('Q'),
        Piece::King => Some('K'),
    }
}

fn letter_piece(c: char) -> Option<Piece> {
    match c {
        'N' => Some(Piece::Knight),
        'B' => Some(Piece::Bishop),
        'R' => Some(Piece::Rook),
        'Q' => Some(Piece::Queen),
        'K' => Some(Piece::King),
        _ => None,
    }
}

fn is_castle(board: &Board, mv: ChessMove) -> bool {
    board.piece_on(mv.get_source()) == Some(Piece::King)
        && (mv.get_source().get_file().to_index() as i32
            - mv.get_dest().get_file().to_index() as i32)
            .abs()
            == 2
}

/// Resolves a standard-algebraic move against the legal moves of `board`.
///
/// Check, mate and annotation suffixes are ignored, as is a capture marker
/// on a non-capture.
pub fn resolve_san(board: &Board, san: &str) -> Result<ChessMove, BoardError> {
    let malformed = || BoardError::MalformedMove(san.to_string());
    let illegal = || BoardError::IllegalMove {
        mv: san.to_string(),
        fen: to_fen(board),
    };
    let text = san.trim_end_matches(['+', '#', '!', '?']);
    if text.is_empty() || !text.is_ascii() {
        return Err(malformed());
    }

    if matches!(text, "O-O" | "0-0" | "O-O-O" | "0-0-0") {
        let long = text.len() == 5;
        return MoveGen::new_legal(board)
            .find(|&m| {
                is_castle(board, m)
                    && (m.get_dest().get_file() == if long { File::C } else { File::G })
            })
            .ok_or_else(illegal);
    }

    let mut rest = text;
    let piece = match rest.chars().next().and_then(letter_piece) {
        Some(p) => {
            rest = &rest[1..];
            p
        }
        None => Piece::Pawn,
    };

    let mut promotion = None;
    if let Some(idx) = rest.find('=') {
        let (head, tail) = rest.split_at(idx);
        let mut t = tail[1..].chars();
        promotion = Some(t.next().and_then(letter_piece).ok_or_else(malformed)?);
        if t.next().is_some() {
            return Err(malformed());
        }
        rest = head;
    } else if piece == Piece::Pawn && rest.len() >= 3 {
        if let Some(p) = rest.chars().last().and_then(letter_piece) {
            promotion = Some(p);
            rest = &rest[..rest.len() - 1];
        }
    }
    if matches!(promotion, Some(Piece::King)) || (promotion.is_some() && piece != Piece::Pawn) {
        return Err(malformed());
    }

    if rest.len() < 2 {
        return Err(malformed());
    }
    let (head, dest) = rest.split_at(rest.len() - 2);
    let db = dest.as_bytes();
    if !(b'a'..=b'h').contains(&db[0]) || !(b'1'..=b'8').contains(&db[1]) {
        return Err(malformed());
    }
    let dest_sq = Square::make_square(
        Rank::from_index((db[1] - b'1') as usize),
        File::from_index((db[0] - b'a') as usize),
    );
    let head = head.strip_suffix('x').unwrap_or(head);
    let mut from_file = None;
    let mut from_rank = None;
    for c in head.chars() {
        match c {
            'a'..='h' if from_file.is_none() && from_rank.is_none() => {
                from_file = Some(c as usize - 'a' as usize)
            }
            '1'..='8' if from_rank.is_none() => from_rank = Some(c as usize - '1' as usize),
            _ => return Err(malformed()),
        }
    }

    let candidates: Vec<ChessMove> = MoveGen::new_legal(board)
        .filter(|&m| {
            m.get_dest() == dest_sq
                && board.piece_on(m.get_source()) == Some(piece)
                && m.get_promotion() == promotion
                && from_file.is_none_or(|f| m.get_source().get_file().to_index() == f)
                && from_rank.is_none_or(|r| m.get_source().get_rank().to_index() == r)
        })
        .collect();
    match candidates.as_slice() {
        [m] => Ok(*m),
        [] => Err(illegal()),
        _ => Err(BoardError::AmbiguousMove {
            mv: san.to_string(),
            fen: to_fen(board),
        }),
    }
}

/// Standard-algebraic rendering of a legal move, with `+`/`#` suffixes.
pub fn san(board: &Board, mv: ChessMove) -> String {
    let mut out = String::new();
    let piece = board
        .piece_on(mv.get_source())
        .expect("move from an occupied square");
    if is_castle(board, mv) {
        out.push_str(if mv.get_dest().get_file() == File::G {
            "O-O"
        } else {
            "O-O-O"
        });
    } else {
        let capture = board.piece_on(mv.get_dest()).is_some()
            || (piece == Piece::Pawn && mv.get_source().get_file() != mv.get_dest().get_file());
        match piece_letter(piece) {
            None => {
                if capture {
                    out.push((b'a' + mv.get_source().get_file().to_index() as u8) as char);
                }
            }
            Some(letter) => {
                out.push(letter);
                let rivals: Vec<ChessMove> = MoveGen::new_legal(board)
                    .filter(|&m| {
                        m != mv
                            && m.get_dest() == mv.get_dest()
                            && board.piece_on(m.get_source()) == Some(piece)
                    })
                    .collect();
                if !rivals.is_empty() {
                    let src = mv.get_source();
                    let same_file = rivals
                        .iter()
                        .any(|m| m.get_source().get_file() == src.get_file());
                    let same_rank = rivals
                        .iter()
                        .any(|m| m.get_source().get_rank() == src.get_rank());
                    if !same_file {
                        out.push((b'a' + src.get_file().to_index() as u8) as char);
                    } else if !same_rank {
                        out.push((b'1' + src.get_rank().to_index() as u8) as char);
                    } else {
                        out.push_str(&src.to_string());
                    }
                }
            }
        }
        if capture {
            out.push('x');
        }
        out.push_str(&mv.get_dest().to_string());
        if let Some(p) = mv.get_promotion() {
            out.push('=');
            out.push(piece_letter(p).unwrap());
        }
    }
    let after = board.make_move_new(mv);
    match after.status() {
        BoardStatus::Checkmate => out.push('#'),
        _ if *after.checkers() != chess::EMPTY => out.push('+'),
        _ => {}
    }
    out
}

/// Number of legal move sequences of length `depth`.
pub fn perft(board: &Board, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = MoveGen::new_legal(board);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .map(|m| perft(&board.make_move_new(m), depth - 1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    const KIWIPETE: &str = "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1";

    #[test]
    fn impossible_material_is_rejected() {
        let crowded = "r3k2r/pppq1ppp/2NP2N1/PPPQ1PPP/R3P1bq/2NP2N1/PPPQ1PPP/R3K2R w KQkq - 4 8";
        assert!(parse_fen(crowded).is_err());
        assert!(parse_fen("4k3/pppppppp/8/8/8/8/PPPPPPPP/QQQQK3 w - - 0 1").is_err());
        assert!(parse_fen("4k3/8/8/8/8/8/8/QQQQKQQQ w - - 0 1").is_ok());
        assert!(parse_fen("4k3/8/8/8/8/8/8/QQQQKQQQ w - - 0 1").is_ok_and(|b| perft(&b, 1) > 0));
    }

    #[test]
    fn fen_writes_standard_en_passant_target() {
        let mut b = parse_fen(START_FEN).unwrap();
        for m in ["e2e4", "h7h6", "e4e5", "d7d5"] {
            b = b.make_move_new(parse_uci_move(&b, m).unwrap());
        }
        let fen = to_fen(&b);
        assert_eq!(
            fen,
            "rnbqkbnr/ppp1ppp1/7p/3pP3/8/8/PPPP1PPP/RNBQKBNR w KQkq d6 0 1"
        );
        assert_eq!(parse_fen(&fen).unwrap(), b);
        let b = parse_fen(START_FEN).unwrap();
        let b = b.make_move_new(parse_uci_move(&b, "e2e4").unwrap());
        // No black pawn can capture, so no target is written.
        assert_eq!(
            position_key(&b),
            "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq -"
        );
    }

    #[test]
    fn perft_start_position() {
        let b = parse_fen(START_FEN).unwrap();
        assert_eq!(perft(&b, 1), 20);
        assert_eq!(perft(&b, 2), 400);
        assert_eq!(perft(&b, 3), 8_902);
    }

    #[test]
    fn perft_kiwipete() {
        let b = parse_fen(KIWIPETE).unwrap();
        assert_eq!(perft(&b, 1), 48);
        assert_eq!(perft(&b, 2), 2_039);
    }

    #[test]
    fn perft_endgame_with_en_passant_pins() {
        // Position 3 of the standard perft suite.
        let b = parse_fen("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1").unwrap();
        assert_eq!(perft(&b, 1), 14);
        assert_eq!(perft(&b, 2), 191);
        assert_eq!(perft(&b, 3), 2_812);
    }

    #[test]
    fn fen_rejections() {
        for bad in [
            "",
            "8/8/8/8/8/8/8/8 w - -",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR x KQkq -",
            "rnbqkbnr/pppppppp/9/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBN w KQkq -",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkqK -",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq e4",
            "Pnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - x 1",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR/8 w KQkq -",
            // Side not to move is in check.
            "4k3/4R3/8/8/8/8/8/4K3 w - - 0 1",
        ] {
            assert!(parse_fen(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn san_resolution_basics() {
        let b = parse_fen(START_FEN).unwrap();
        assert_eq!(resolve_san(&b, "e4").unwrap().to_string(), "e2e4");
        assert_eq!(resolve_san(&b, "Nf3").unwrap().to_string(), "g1f3");
        assert_eq!(resolve_san(&b, "Nf3!?").unwrap().to_string(), "g1f3");
        assert!(matches!(
            resolve_san(&b, "e5"),
            Err(BoardError::IllegalMove { .. })
        ));
        assert!(matches!(
            resolve_san(&b, "Zz9"),
            Err(BoardError::MalformedMove(_))
        ));
        assert!(resolve_san(&b, "O-O").is_err());
    }

    #[test]
    fn san_castling_promotion_and_disambiguation() {
        let k = parse_fen(KIWIPETE).unwrap();
        assert_eq!(resolve_san(&k, "O-O").unwrap().to_string(), "e1g1");
        assert_eq!(resolve_san(&k, "O-O-O").unwrap().to_string(), "e1c1");
        assert_eq!(resolve_san(&k, "0-0").unwrap().to_string(), "e1g1");

        let promo = parse_fen("8/P6k/8/8/8/8/8/K7 w - - 0 1").unwrap();
        assert_eq!(resolve_san(&promo, "a8=Q").unwrap().to_string(), "a7a8q");
        assert_eq!(resolve_san(&promo, "a8N").unwrap().to_string(), "a7a8n");
        assert!(resolve_san(&promo, "a8").is_err());

        let rooks = parse_fen("1k6/8/8/8/8/8/4K3/R6R w - - 0 1").unwrap();
        assert!(matches!(
            resolve_san(&rooks, "Rd1"),
            Err(BoardError::AmbiguousMove { .. })
        ));
        assert_eq!(resolve_san(&rooks, "Rad1").unwrap().to_string(), "a1d1");
        assert_eq!(san(&rooks, resolve_san(&rooks, "Rhf1").unwrap()), "Rhf1");

        let stacked = parse_fen("1k6/8/8/8/R7/8/8/R3K3 w - - 0 1").unwrap();
        assert_eq!(resolve_san(&stacked, "R1a2").unwrap().to_string(), "a1a2");
        assert_eq!(
            san(&stacked, resolve_san(&stacked, "R4a2").unwrap()),
            "R4a2"
        );
    }

    #[test]
    fn san_rendering_round_trips_over_perft_tree() {
        fn walk(b: &Board, depth: u32) {
            for m in MoveGen::new_legal(b) {
                let text = san(b, m);
                assert_eq!(resolve_san(b, &text).unwrap(), m, "{text} in {b}");
                assert_eq!(parse_uci_move(b, &uci_text(m)).unwrap(), m);
                if depth > 1 {
                    walk(&b.make_move_new(m), depth - 1);
                }
            }
        }
        walk(&parse_fen(KIWIPETE).unwrap(), 2);
        walk(&parse_fen(START_FEN).unwrap(), 2);
    }

    #[test]
    fn check_and_mate_suffixes() {
        let b = parse_fen(START_FEN).unwrap();
        let mut pos = b;
        for mv in ["f3", "e5", "g4"] {
            pos = pos.make_move_new(resolve_san(&pos, mv).unwrap());
        }
        let mate = resolve_san(&pos, "Qh4").unwrap();
        assert_eq!(san(&pos, mate), "Qh4#");
        assert!(is_checkmate(&pos.make_move_new(mate)));
    }

    #[test]
    fn position_key_drops_counters() {
        let a = parse_fen(START_FEN).unwrap();
        let b = parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 7 30").unwrap();
        assert_eq!(position_key(&a), position_key(&b));
        assert_eq!(
            position_key(&a),
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -"
        );
    }
}
