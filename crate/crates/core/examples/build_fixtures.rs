//! Regenerates the files under `fixtures/`.
//!
//! Each game is a seeded random walk over legal moves. Engine scores are then
//! assigned position by position so that every player's pawn losses add up
//! to a chosen total, and the mock table records those scores.
//!
//! Usage: `cargo run -p pawnloss --example build_fixtures [-- <out-dir>]`

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chess::MoveGen;
use pawnloss::board::{self, Board, ChessMove, START_FEN};
use pawnloss::game::toy;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Start-position score, White to move.
const START_CP: i64 = 20;
/// Keeps every score well inside the default mate cap.
const MAX_ABS_CP: i64 = 900;

struct Spec {
    headers: Vec<(&'static str, String)>,
    result: &'static str,
    plies: usize,
    white_cp: i64,
    black_cp: i64,
    /// Score of the final position from White's side.
    final_white_cp: i64,
    offer: bool,
    comment: Option<&'static str>,
}

/// Collects games that share one mock table.
#[derive(Default)]
struct Set {
    table: Vec<String>,
    entries: HashMap<String, (String, i64)>,
    openings: HashSet<(String, String)>,
    pgn: String,
}

fn mover_is_white(ply: usize) -> bool {
    ply % 2 == 1
}

/// Splits `total` into `parts` positive integers, none above `cap`.
fn split(rng: &mut ChaCha8Rng, total: i64, parts: usize, cap: i64) -> Option<Vec<i64>> {
    let k = parts as i64;
    if parts == 0 || total < k || total > k * cap {
        return None;
    }
    let mut v: Vec<i64> = (0..k)
        .map(|i| total / k + i64::from(i < total % k))
        .collect();
    // Random transfers between parts keep the sum and the bounds.
    for _ in 0..parts * 6 {
        let (i, j) = (rng.gen_range(0..parts), rng.gen_range(0..parts));
        let d = rng
            .gen_range(0..=(v[i] - 1) / 2 + 1)
            .min(v[i] - 1)
            .min(cap - v[j]);
        if i != j && d > 0 {
            v[i] -= d;
            v[j] += d;
        }
    }
    Some(v)
}

/// Raw (unclamped) loss per ply, index 0 unused.
fn plan_losses(rng: &mut ChaCha8Rng, spec: &Spec) -> Vec<i64> {
    'retry: loop {
        let mut raw = vec![0i64; spec.plies + 1];
        let mut used = HashSet::new();
        let mut place = |rng: &mut ChaCha8Rng,
                         white: bool,
                         total: i64,
                         per: i64,
                         sign: i64,
                         raw: &mut Vec<i64>|
         -> bool {
            if total == 0 {
                return true;
            }
            let free: Vec<usize> = (2..=spec.plies)
                .filter(|&j| mover_is_white(j) == white && !used.contains(&j))
                .collect();
            // Spread heavy totals over more moves rather than fail.
            let per = per.max((total * 5 / (3 * free.len().max(1) as i64)) + 1);
            let k = ((total + per - 1) / per).max(1) as usize;
            if k > free.len() {
                return false;
            }
            let Some(parts) = split(rng, total, k, 2 * per) else {
                return false;
            };
            for (&j, p) in free.choose_multiple(rng, k).zip(parts) {
                used.insert(j);
                raw[j] = sign * p;
            }
            true
        };
        if !place(rng, true, spec.white_cp, 90, 1, &mut raw)
            || !place(rng, false, spec.black_cp, 90, 1, &mut raw)
        {
            panic!("cannot place losses for {:?}", spec.headers);
        }
        let gap = spec.final_white_cp - (START_CP - spec.white_cp + spec.black_cp);
        // A gain is a move rated above the engine's own best.
        let ok = match gap.signum() {
            1 => place(rng, true, gap, 120, -1, &mut raw),
            -1 => place(rng, false, -gap, 120, -1, &mut raw),
            _ => true,
        };
        if !ok {
            panic!("cannot place gains for {:?}", spec.headers);
        }
        let mut w = START_CP;
        for (j, &r) in raw.iter().enumerate().skip(1) {
            w += if mover_is_white(j) { -r } else { r };
            if w.abs() > MAX_ABS_CP {
                continue 'retry;
            }
        }
        assert_eq!(w, spec.final_white_cp);
        return raw;
    }
}

fn legal(b: &Board) -> Vec<ChessMove> {
    MoveGen::new_legal(b).collect()
}

fn walk(rng: &mut ChaCha8Rng, set: &Set, plies: usize) -> Vec<ChessMove> {
    let start = board::parse_fen(START_FEN).unwrap();
    'restart: loop {
        let mut b = start;
        let mut seen: HashSet<String> = HashSet::new();
        seen.insert(board::position_key(&b));
        let mut moves = Vec::new();
        for ply in 1..=plies {
            let mut cands = legal(&b);
            cands.shuffle(rng);
            let pick = cands.into_iter().find(|&m| {
                let n = b.make_move_new(m);
                let key = board::position_key(&n);
                if board::is_game_over(&n) || legal(&n).len() < 2 || seen.contains(&key) {
                    return false;
                }
                match ply {
                    1 => true,
                    2 => !set
                        .openings
                        .contains(&(board::uci_text(moves[0]), board::uci_text(m))),
                    _ => !set.entries.contains_key(&key),
                }
            });
            let Some(m) = pick else { continue 'restart };
            b = b.make_move_new(m);
            seen.insert(board::position_key(&b));
            moves.push(m);
        }
        return moves;
    }
}

fn add_game(set: &mut Set, rng: &mut ChaCha8Rng, spec: &Spec) {
    let raw = plan_losses(rng, spec);
    let moves = walk(rng, set, spec.plies);
    set.openings
        .insert((board::uci_text(moves[0]), board::uci_text(moves[1])));

    let mut b = board::parse_fen(START_FEN).unwrap();
    let mut w = START_CP;
    let mut boards = vec![b];
    let mut white_view = vec![w];
    for (j, m) in moves.iter().enumerate() {
        let ply = j + 1;
        w += if mover_is_white(ply) {
            -raw[ply]
        } else {
            raw[ply]
        };
        b = b.make_move_new(*m);
        boards.push(b);
        white_view.push(w);
    }
    for (k, b) in boards.iter().enumerate() {
        let s = if k % 2 == 0 {
            white_view[k]
        } else {
            -white_view[k]
        };
        let best = if k < moves.len() && raw[k + 1] == 0 {
            moves[k]
        } else {
            let mut others: Vec<ChessMove> = legal(b)
                .into_iter()
                .filter(|&m| Some(&m) != moves.get(k))
                .collect();
            others.sort_by_key(|m| board::uci_text(*m));
            *others.choose(rng).expect("two legal moves")
        };
        let key = board::position_key(b);
        if let Some((_, prev)) = set.entries.get(&key) {
            assert_eq!(*prev, s, "shared position with two scores");
            continue;
        }
        let best = board::uci_text(best);
        set.table
            .push(format!("{} | {} | cp {}", board::to_fen(b), best, s));
        set.entries.insert(key, (best, s));
    }

    let pgn = &mut set.pgn;
    for (k, v) in &spec.headers {
        let _ = writeln!(pgn, "[{k} \"{v}\"]");
    }
    let _ = writeln!(pgn, "[Result \"{}\"]", spec.result);
    pgn.push('\n');
    let mut tokens = Vec::new();
    if let Some(c) = spec.comment {
        tokens.push(format!("{{{c}}}"));
    }
    let mut b = board::parse_fen(START_FEN).unwrap();
    for (j, m) in moves.iter().enumerate() {
        let san = board::san(&b, *m);
        if j % 2 == 0 {
            tokens.push(format!("{}. {san}", j / 2 + 1));
        } else {
            tokens.push(san);
        }
        b = b.make_move_new(*m);
    }
    if spec.offer {
        tokens.push("{draw offered}".into());
    }
    tokens.push(spec.result.into());
    let mut line = String::new();
    for t in tokens {
        if !line.is_empty() && line.len() + 1 + t.len() > 79 {
            pgn.push_str(&line);
            pgn.push('\n');
            line.clear();
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(&t);
    }
    pgn.push_str(&line);
    pgn.push_str("\n\n");
}

fn write_set(dir: &Path, name: &str, set: &Set, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    let mut table = format!("# Mock engine table for {name}.pgn (generated, seed {seed}).\n# FEN | best move | side-to-move score\n");
    for l in &set.table {
        table.push_str(l);
        table.push('\n');
    }
    std::fs::write(dir.join(format!("{name}.table")), table).unwrap();
    std::fs::write(dir.join(format!("{name}.pgn")), &set.pgn).unwrap();
}

fn h(pairs: &[(&'static str, &str)]) -> Vec<(&'static str, String)> {
    pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
}

const SYNTHETIC: &str = "Synthetic moves; engine scores reproduce the published TPLV totals.";

fn game12(out: &Path) {
    let seed = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = Set::default();
    let spec = Spec {
        headers: h(&[
            ("Event", "World Championship Match"),
            ("Site", "London ENG"),
            ("Date", "2018.11.26"),
            ("Round", "12"),
            ("White", "Caruana, Fabiano"),
            ("Black", "Carlsen, Magnus"),
        ]),
        result: "1/2-1/2",
        plies: 124,
        white_cp: 590,
        black_cp: 520,
        final_white_cp: -100,
        offer: true,
        comment: Some(SYNTHETIC),
    };
    add_game(&mut set, &mut rng, &spec);
    write_set(&out.join("game12"), "game12", &set, seed);
}

fn topalov(out: &Path) {
    let seed = 2022;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = Set::default();
    let spec = Spec {
        headers: h(&[
            ("Event", "Norway Chess"),
            ("Site", "Stavanger NOR"),
            ("Date", "2022.??.??"),
            ("Round", "?"),
            ("White", "Topalov, Veselin"),
            ("Black", "Carlsen, Magnus"),
        ]),
        result: "1/2-1/2",
        plies: 80,
        white_cp: 315,
        black_cp: 340,
        final_white_cp: 0,
        offer: false,
        comment: Some(SYNTHETIC),
    };
    add_game(&mut set, &mut rng, &spec);
    write_set(&out.join("topalov"), "topalov", &set, seed);
}

const KRUSH: [i64; 13] = [
    1505, 2310, 624, 750, 1184, 1353, 1428, 752, 1608, 527, 1560, 1102, 1218,
];
const YU: [i64; 13] = [
    1596, 552, 2146, 900, 2030, 2079, 1922, 666, 616, 2090, 845, 2052, 1368,
];
// Own result per round: 1 win, 0 draw, -1 loss. Both lines total 9 points.
const KRUSH_RESULTS: [i8; 13] = [1, 1, 0, 1, 0, 0, 1, 0, -1, 1, 0, 1, 0];
const YU_RESULTS: [i8; 13] = [1, 0, 1, 1, -1, 0, 1, 1, 0, -1, 1, 0, 1];

fn championship(out: &Path) {
    let seed = 202_213;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = Set::default();
    for round in 0..13 {
        for (name, tag, values, results, white_on_odd) in [
            ("Krush, Irina", "K", &KRUSH, &KRUSH_RESULTS, true),
            ("Yu, Jennifer", "Y", &YU, &YU_RESULTS, false),
        ] {
            let own = values[round];
            let res = results[round];
            let forfeit = tag == "K" && res == -1;
            let opp = match res {
                1 => own + rng.gen_range(200..800),
                -1 if forfeit => own + rng.gen_range(150..400),
                -1 => own - rng.gen_range(100..own.min(400)),
                _ => (own + rng.gen_range(-300..300)).max(150),
            };
            let margin = rng.gen_range(300..700);
            let own_final = match res {
                1 => margin,
                -1 if forfeit => 150,
                -1 => -margin,
                _ => rng.gen_range(-40..=40),
            };
            let own_white = (round % 2 == 0) == white_on_odd;
            let opponent = format!("Field {tag}{:02}", round + 1);
            let (white, black) = if own_white {
                (name.to_string(), opponent)
            } else {
                (opponent, name.to_string())
            };
            let (white_cp, black_cp) = if own_white { (own, opp) } else { (opp, own) };
            let own_won = res == 1;
            let result = match (res, own_white) {
                (0, _) => "1/2-1/2",
                (_, true) if own_won => "1-0",
                (_, false) if own_won => "0-1",
                (_, true) => "0-1",
                (_, false) => "1-0",
            };
            let round_s = (round + 1).to_string();
            let mut headers = vec![
                ("Event", "U.S. Women's Championship".to_string()),
                ("Site", "Saint Louis USA".to_string()),
                ("Date", "2022.??.??".to_string()),
                ("Round", round_s),
                ("White", white),
                ("Black", black),
            ];
            if forfeit {
                headers.push(("Termination", "time forfeit".to_string()));
            }
            let spec = Spec {
                headers,
                result,
                plies: rng.gen_range(84..=130),
                white_cp,
                black_cp,
                final_white_cp: if own_white { own_final } else { -own_final },
                offer: false,
                comment: if round == 0 { Some(SYNTHETIC) } else { None },
            };
            add_game(&mut set, &mut rng, &spec);
        }
    }
    write_set(&out.join("krush-yu"), "championship", &set, seed);
}

fn symmetric(out: &Path) {
    let seed = 7;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = Set::default();
    for (i, (w, b)) in [("Alpha", "Beta"), ("Beta", "Alpha")]
        .into_iter()
        .enumerate()
    {
        let spec = Spec {
            headers: h(&[
                ("Event", "Symmetric pair"),
                ("Round", &(i + 1).to_string()),
                ("White", w),
                ("Black", b),
            ]),
            result: "1/2-1/2",
            plies: 40,
            white_cp: 250,
            black_cp: 250,
            final_white_cp: START_CP,
            offer: false,
            comment: None,
        };
        add_game(&mut set, &mut rng, &spec);
    }
    write_set(&out.join("symmetric"), "pair", &set, seed);
}

const DEPTH_ONE: &str = r#"{
  "num_players": 2,
  "root": 0,
  "players": ["White", "Black"],
  "nodes": [
    { "id": 0, "player": 0, "children": [1, 2], "label": "only decision" },
    { "id": 1, "payoffs": [0.0, 0.0], "label": "draw" },
    { "id": 2, "payoffs": [1.0, -1.0], "label": "White wins" }
  ],
  "evaluations": [[0.5, 0.0, 1.0], [-0.5, 0.0, -1.0]]
}
"#;

fn trees(out: &Path) {
    let dir = out.join("trees");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("draw_offer.json"),
        toy::draw_offer_model().to_json(),
    )
    .unwrap();
    std::fs::write(dir.join("depth_one.json"), DEPTH_ONE).unwrap();
}

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    game12(&out);
    topalov(&out);
    championship(&out);
    symmetric(&out);
    trees(&out);
    println!("fixtures written to {}", out.display());
}
