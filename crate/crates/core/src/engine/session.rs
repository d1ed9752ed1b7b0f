use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mock::{MockEngine, MockTable};
use super::protocol::{parse_engine_line, setoption_command, EngineLine};
use super::score::{EngineScore, DEFAULT_MATE_CAP};
use super::EngineError;
use crate::board::{self, Board, START_FEN};

/// A line-oriented duplex channel to an engine.
pub trait Transport: Send {
    fn send(&mut self, line: &str) -> Result<(), EngineError>;
    /// Next line of output, or [`EngineError::Timeout`] if none arrives in time.
    fn recv(&mut self, timeout: Duration) -> Result<String, EngineError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchLimit {
    Depth(u32),
    MoveTime(u64),
}

impl SearchLimit {
    pub fn go_command(self) -> String {
        match self {
            SearchLimit::Depth(d) => format!("go depth {d}"),
            SearchLimit::MoveTime(ms) => format!("go movetime {ms}"),
        }
    }

    /// Reads the limit back out of `go` arguments.
    pub fn parse_go_args(args: &[&str]) -> Option<Self> {
        let mut it = args.iter();
        while let Some(&tok) = it.next() {
            match tok {
                "depth" => return it.next()?.parse().ok().map(SearchLimit::Depth),
                "movetime" => return it.next()?.parse().ok().map(SearchLimit::MoveTime),
                _ => {}
            }
        }
        None
    }
}

impl std::fmt::Display for SearchLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SearchLimit::Depth(d) => write!(f, "depth {d}"),
            SearchLimit::MoveTime(ms) => write!(f, "movetime {ms}"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum EngineSource {
    Executable { path: PathBuf, args: Vec<String> },
    Mock { id: String, table: Arc<MockTable> },
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub source: EngineSource,
    pub limit: SearchLimit,
    pub options: BTreeMap<String, String>,
    /// Pawn value assigned to a forced mate; also the clamp for centipawns.
    pub mate_cap: f64,
    pub handshake_timeout: Duration,
    /// Extra time allowed beyond the search limit before giving up.
    pub search_timeout: Duration,
}

impl EngineConfig {
    pub fn new(source: EngineSource, limit: SearchLimit) -> Self {
        Self {
            source,
            limit,
            options: BTreeMap::new(),
            mate_cap: DEFAULT_MATE_CAP,
            handshake_timeout: Duration::from_secs(10),
            search_timeout: Duration::from_secs(120),
        }
    }

    pub fn mock(id: impl Into<String>, table: MockTable, limit: SearchLimit) -> Self {
        Self::new(
            EngineSource::Mock {
                id: id.into(),
                table: Arc::new(table),
            },
            limit,
        )
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.mate_cap.is_finite() && self.mate_cap > 0.0) {
            return Err(EngineError::Config("mate cap must be positive".into()));
        }
        match self.limit {
            SearchLimit::Depth(0) => Err(EngineError::Config("depth must be positive".into())),
            SearchLimit::MoveTime(0) => {
                Err(EngineError::Config("movetime must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Canonical text of everything that influences evaluations.
    pub fn settings_text(&self) -> String {
        let mut s = String::new();
        match &self.source {
            EngineSource::Executable { path, args } => {
                let _ = write!(s, "engine={}", path.display());
                for a in args {
                    let _ = write!(s, " {a}");
                }
            }
            EngineSource::Mock { id, table } => {
                let _ = write!(s, "mock={id} sha256={}", table.digest());
            }
        }
        let _ = write!(s, "; limit={}; mate_cap={}", self.limit, self.mate_cap);
        for (k, v) in &self.options {
            let _ = write!(s, "; option {k}={v}");
        }
        s
    }
}

/// Engine identity and settings stamped into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineFingerprint {
    pub name: String,
    pub author: Option<String>,
    pub settings: String,
    /// SHA-256 of `name` and `settings`.
    pub hash: String,
}

impl EngineFingerprint {
    pub fn new(name: String, author: Option<String>, settings: String) -> Self {
        let digest = Sha256::digest(format!("{name}\n{settings}").as_bytes());
        let hash = digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Self {
            name,
            author,
            settings,
            hash,
        }
    }
}

/// A start position plus long-algebraic moves played from it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PositionRef {
    /// `None` means the standard initial position.
    pub start_fen: Option<String>,
    pub moves: Vec<String>,
}

impl PositionRef {
    pub fn startpos(moves: Vec<String>) -> Self {
        Self {
            start_fen: None,
            moves,
        }
    }

    pub fn command(&self) -> String {
        let mut cmd = match &self.start_fen {
            None => "position startpos".to_string(),
            Some(f) => format!("position fen {f}"),
        };
        if !self.moves.is_empty() {
            cmd.push_str(" moves ");
            cmd.push_str(&self.moves.join(" "));
        }
        cmd
    }

    /// Replays the moves and returns the resulting board.
    pub fn board(&self) -> Result<Board, EngineError> {
        let mut b = board::parse_fen(self.start_fen.as_deref().unwrap_or(START_FEN))
            .map_err(|e| EngineError::IllegalPosition(e.to_string()))?;
        for m in &self.moves {
            let mv = board::parse_uci_move(&b, m)
                .map_err(|e| EngineError::IllegalPosition(e.to_string()))?;
            b = b.make_move_new(mv);
        }
        Ok(b)
    }
}

/// Outcome of one search.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub best_move: String,
    /// Side-to-move score from the deepest non-bound `info` line.
    pub score: EngineScore,
    /// Lines exchanged for this search; sent lines start with `> `.
    pub transcript: Vec<String>,
}

struct ProcessTransport {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl ProcessTransport {
    fn spawn(path: &PathBuf, args: &[String]) -> Result<Self, EngineError> {
        let mut child = Command::new(path)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| EngineError::Spawn(format!("{}: {e}", path.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            lines: rx,
        })
    }
}

impl Transport for ProcessTransport {
    fn send(&mut self, line: &str) -> Result<(), EngineError> {
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| EngineError::Crashed(e.to_string()))
    }

    fn recv(&mut self, timeout: Duration) -> Result<String, EngineError> {
        match self.lines.recv_timeout(timeout) {
            Ok(l) => Ok(l),
            Err(RecvTimeoutError::Timeout) => Err(EngineError::Timeout),
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.child.try_wait().ok().flatten();
                Err(EngineError::Crashed(match status {
                    Some(s) => format!("engine exited ({s})"),
                    None => "engine closed its output".into(),
                }))
            }
        }
    }
}

impl Drop for ProcessTransport {
    fn drop(&mut self) {
        let _ = writeln!(self.stdin, "quit");
        let _ = self.stdin.flush();
        let deadline = Instant::now() + Duration::from_millis(200);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A handshaken connection to one engine.
///
/// Requests are strictly sequential; use one session per thread.
pub struct EngineSession {
    transport: Box<dyn Transport>,
    config: EngineConfig,
    fingerprint: EngineFingerprint,
    handshake: Vec<String>,
}

impl std::fmt::Debug for EngineSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EngineSession")
            .field("fingerprint", &self.fingerprint)
            .finish_non_exhaustive()
    }
}

impl EngineSession {
    pub fn start(config: &EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let transport: Box<dyn Transport> = match &config.source {
            EngineSource::Executable { path, args } => {
                Box::new(ProcessTransport::spawn(path, args)?)
            }
            EngineSource::Mock { table, .. } => Box::new(MockEngine::new(table.clone())),
        };
        Self::with_transport(transport, config)
    }

    /// Runs the handshake over an arbitrary transport.
    pub fn with_transport(
        mut transport: Box<dyn Transport>,
        config: &EngineConfig,
    ) -> Result<Self, EngineError> {
        config.validate()?;
        let mut log = Vec::new();
        let deadline = Instant::now() + config.handshake_timeout;
        let mut name = None;
        let mut author = None;
        let mut advertised = Vec::new();

        log.push("> uci".to_string());
        transport.send("uci")?;
        loop {
            let line = recv_before(&mut *transport, deadline, true)?;
            log.push(format!("< {line}"));
            match parse_engine_line(&line) {
                Ok(EngineLine::UciOk) => break,
                Ok(EngineLine::IdName(n)) => name = Some(n),
                Ok(EngineLine::IdAuthor(a)) => author = Some(a),
                Ok(EngineLine::Option { name }) => advertised.push(name),
                // Engines chatter during startup; only the markers above matter.
                _ => {}
            }
        }
        for (k, v) in &config.options {
            if !advertised.iter().any(|a| a.eq_ignore_ascii_case(k)) {
                return Err(EngineError::OptionRejected(k.clone()));
            }
            let cmd = setoption_command(k, v);
            log.push(format!("> {cmd}"));
            transport.send(&cmd)?;
        }
        log.push("> isready".to_string());
        transport.send("isready")?;
        loop {
            let line = recv_before(&mut *transport, deadline, true)?;
            log.push(format!("< {line}"));
            if let Ok(EngineLine::ReadyOk) = parse_engine_line(&line) {
                break;
            }
            let lower = line.to_ascii_lowercase();
            if lower.contains("no such option") || lower.contains("unknown option") {
                return Err(EngineError::OptionRejected(line));
            }
        }
        let name = name.unwrap_or_else(|| "unknown engine".into());
        let fingerprint = EngineFingerprint::new(name, author, config.settings_text());
        Ok(Self {
            transport,
            config: config.clone(),
            fingerprint,
            handshake: log,
        })
    }

    pub fn fingerprint(&self) -> &EngineFingerprint {
        &self.fingerprint
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn handshake_transcript(&self) -> &[String] {
        &self.handshake
    }

    /// Tells the engine a new game starts and waits until it is ready.
    pub fn new_game(&mut self) -> Result<(), EngineError> {
        self.transport.send("ucinewgame")?;
        self.transport.send("isready")?;
        let deadline = Instant::now() + self.config.handshake_timeout;
        loop {
            let line = recv_before(&mut *self.transport, deadline, false)?;
            if let Ok(EngineLine::ReadyOk) = parse_engine_line(&line) {
                return Ok(());
            }
        }
    }

    /// Searches `pos` at the configured limit.
    pub fn evaluate(&mut self, pos: &PositionRef) -> Result<Evaluation, EngineError> {
        let board = pos.board()?;
        self.evaluate_board(pos, &board)
    }

    /// As [`Self::evaluate`], with `board` already known to be the position
    /// `pos` reaches.
    pub fn evaluate_board(
        &mut self,
        pos: &PositionRef,
        board: &Board,
    ) -> Result<Evaluation, EngineError> {
        if board::is_game_over(board) {
            return Err(EngineError::NoLegalMoves);
        }
        let mut transcript = Vec::new();
        let position = pos.command();
        let go = self.config.limit.go_command();
        for cmd in [&position, &go] {
            transcript.push(format!("> {cmd}"));
            self.transport.send(cmd)?;
        }
        let budget = match self.config.limit {
            SearchLimit::MoveTime(ms) => Duration::from_millis(ms) + self.config.search_timeout,
            SearchLimit::Depth(_) => self.config.search_timeout,
        };
        let deadline = Instant::now() + budget;
        let mut best_score: Option<(u32, EngineScore)> = None;
        let mut bound_score = None;
        let mut last_string = None;
        loop {
            let line = recv_before(&mut *self.transport, deadline, false)?;
            transcript.push(format!("< {line}"));
            match parse_engine_line(&line)? {
                EngineLine::Info(info) => {
                    if let Some(s) = info.string {
                        last_string = Some(s);
                    }
                    if info.multipv.unwrap_or(1) != 1 {
                        continue;
                    }
                    if let Some(score) = info.score {
                        let depth = info.depth.unwrap_or(0);
                        if info.bound {
                            bound_score = Some(score);
                        } else if best_score.is_none_or(|(d, _)| depth >= d) {
                            best_score = Some((depth, score));
                        }
                    }
                }
                EngineLine::BestMove { mv: None, .. } => {
                    return Err(match last_string {
                        Some(s) => EngineError::Rejected(s),
                        None => EngineError::NoLegalMoves,
                    });
                }
                EngineLine::BestMove { mv: Some(mv), .. } => {
                    board::parse_uci_move(board, &mv).map_err(|_| EngineError::Malformed {
                        line: line.clone(),
                        reason: "best move is not legal in the searched position".into(),
                    })?;
                    let score = best_score.map(|(_, s)| s).or(bound_score).ok_or_else(|| {
                        EngineError::Malformed {
                            line,
                            reason: "search finished without a score".into(),
                        }
                    })?;
                    return Ok(Evaluation {
                        best_move: mv,
                        score,
                        transcript,
                    });
                }
                _ => {}
            }
        }
    }
}

fn recv_before(
    transport: &mut dyn Transport,
    deadline: Instant,
    handshake: bool,
) -> Result<String, EngineError> {
    let left = deadline.saturating_duration_since(Instant::now());
    match transport.recv(left) {
        Err(EngineError::Timeout) if handshake => Err(EngineError::HandshakeTimeout),
        other => other,
    }
}
