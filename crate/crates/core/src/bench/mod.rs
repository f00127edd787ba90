//! The benchmark suite, its mock upstream and the load and fuzz drivers.

pub mod fuzz;
pub mod load;
pub mod mock;
pub mod stack;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use crate::upstream::Request;

pub type BenchRng = ChaCha8Rng;

pub fn rng(seed: u64) -> BenchRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const MAZE_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Authorize,
    Upload,
    Status,
    Banking,
    Autocomplete,
    Maze,
}

/// A benchmark: guest source plus request generators and an oracle.
#[derive(Debug, Clone)]
pub struct BenchmarkDef {
    pub name: &'static str,
    pub kind: Kind,
    pub source: String,
}

pub const NAMES: [&str; 6] = ["authorize", "upload", "status", "banking", "autocomplete", "maze"];

pub fn all() -> Vec<BenchmarkDef> {
    NAMES.iter().map(|n| by_name(n).expect("known benchmark")).collect()
}

pub fn by_name(name: &str) -> Option<BenchmarkDef> {
    let (kind, source) = match name {
        "authorize" => (Kind::Authorize, include_str!("../../benchmarks/authorize.js").to_string()),
        "upload" => (Kind::Upload, include_str!("../../benchmarks/upload.js").to_string()),
        "status" => (Kind::Status, include_str!("../../benchmarks/status.js").to_string()),
        "banking" => (Kind::Banking, include_str!("../../benchmarks/banking.js").to_string()),
        "autocomplete" => (
            Kind::Autocomplete,
            include_str!("../../benchmarks/autocomplete.js").replace("__WORDS__", &Json::from(words()).to_string()),
        ),
        "maze" => (
            Kind::Maze,
            include_str!("../../benchmarks/maze.js").replace("__GRID__", &Json::from(maze_grid()).to_string()),
        ),
        _ => return None,
    };
    let name = NAMES.iter().find(|n| **n == name).expect("listed");
    Some(BenchmarkDef { name, kind, source })
}

pub const USERS: [(&str, &str); 4] = [("alice", "secret"), ("bob", "hunter2"), ("carol", "pa55"), ("dave", "letmein")];

const SYLLABLES: [&str; 12] = ["ca", "ro", "de", "li", "ma", "to", "ne", "su", "pa", "ki", "bo", "re"];

/// The autocomplete word list: every two- and three-syllable word.
pub fn words() -> Vec<String> {
    let mut out = Vec::new();
    for a in SYLLABLES {
        for b in SYLLABLES {
            out.push(format!("{a}{b}"));
            for c in SYLLABLES.iter().step_by(3) {
                out.push(format!("{a}{b}{c}"));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// A fixed 32x32 maze; `.` is open and `#` is a wall.
pub fn maze_grid() -> Vec<String> {
    let mut r = rng(0x6d617a65);
    (0..MAZE_SIZE)
        .map(|row| {
            (0..MAZE_SIZE)
                .map(|col| {
                    let border = row % 4 == 0 || col % 4 == 0;
                    if border || r.random_bool(0.75) {
                        if r.random_bool(0.12) {
                            '#'
                        } else {
                            '.'
                        }
                    } else {
                        '#'
                    }
                })
                .collect()
        })
        .collect()
}

fn open_cell(r: &mut BenchRng, grid: &[String]) -> [usize; 2] {
    loop {
        let (row, col) = (r.random_range(0..MAZE_SIZE), r.random_range(0..MAZE_SIZE));
        if grid[row].as_bytes()[col] == b'.' {
            return [row, col];
        }
    }
}

fn wall_cell(r: &mut BenchRng, grid: &[String]) -> [usize; 2] {
    loop {
        let (row, col) = (r.random_range(0..MAZE_SIZE), r.random_range(0..MAZE_SIZE));
        if grid[row].as_bytes()[col] == b'#' {
            return [row, col];
        }
    }
}

/// Shortest path length by breadth-first search, or -1.
pub fn bfs(grid: &[String], start: [usize; 2], goal: [usize; 2]) -> i64 {
    let n = grid.len();
    let open = |r: usize, c: usize| grid[r].as_bytes()[c] == b'.';
    if !open(start[0], start[1]) || !open(goal[0], goal[1]) {
        return -1;
    }
    let mut dist = vec![-1i64; n * n];
    let mut queue = std::collections::VecDeque::from([start]);
    dist[start[0] * n + start[1]] = 0;
    while let Some([r, c]) = queue.pop_front() {
        if [r, c] == goal {
            break;
        }
        let d = dist[r * n + c];
        let steps = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
        for (dr, dc) in steps {
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            if nr < 0 || nc < 0 || nr >= n as i64 || nc >= n as i64 {
                continue;
            }
            let (nr, nc) = (nr as usize, nc as usize);
            if open(nr, nc) && dist[nr * n + nc] == -1 {
                dist[nr * n + nc] = d + 1;
                queue.push_back([nr, nc]);
            }
        }
    }
    dist[goal[0] * n + goal[1]]
}

fn text(r: &mut BenchRng, len: usize) -> String {
    (0..len).map(|_| r.random_range(b'a'..=b'z') as char).collect()
}

/// Request bodies for one benchmark, drawn from a seeded stream.
pub struct Generator {
    kind: Kind,
    rng: BenchRng,
    next_tx: u64,
    grid: Vec<String>,
    words: Vec<String>,
}

impl Generator {
    pub fn new(def: &BenchmarkDef, seed: u64) -> Self {
        Generator {
            kind: def.kind,
            rng: rng(seed),
            next_tx: 0,
            grid: maze_grid(),
            words: words(),
        }
    }

    fn txid(&mut self) -> String {
        self.next_tx += 1;
        format!("tx{}", self.next_tx)
    }

    /// A request from the full input distribution.
    pub fn request(&mut self) -> Request {
        Request::post("/", self.body())
    }

    pub fn body(&mut self) -> Json {
        let r = &mut self.rng;
        match self.kind {
            Kind::Authorize => {
                let (u, p) = *USERS.choose(r).expect("users");
                if r.random_bool(0.8) {
                    json!({ "username": u, "password": p })
                } else if r.random_bool(0.5) {
                    json!({ "username": u, "password": text(r, 6) })
                } else {
                    json!({ "username": text(r, 5), "password": p })
                }
            }
            Kind::Upload => {
                let name = format!("{}.txt", text(r, 6));
                if r.random_bool(0.9) {
                    let len = r.random_range(1..200);
                    json!({ "name": name, "content": text(r, len) })
                } else {
                    json!({ "name": name })
                }
            }
            Kind::Status => json!({
                "repo": format!("org/{}", text(r, 4)),
                "sha": format!("{:08x}", r.random::<u32>()),
                "build": r.random_range(1..10_000),
                "ok": r.random_bool(0.7),
            }),
            Kind::Banking => {
                let replay = self.next_tx > 0 && r.random_bool(0.1);
                let txid = if replay {
                    format!("tx{}", r.random_range(1..=self.next_tx))
                } else {
                    self.txid()
                };
                let r = &mut self.rng;
                json!({
                    "account": format!("acct{}", r.random_range(0..5)),
                    "txid": txid,
                    "type": if r.random_bool(0.6) { "deposit" } else { "withdraw" },
                    "amount": r.random_range(1..100),
                })
            }
            Kind::Autocomplete => {
                if r.random_bool(0.05) {
                    return json!({ "prefix": "" });
                }
                let w = self.words.choose(r).expect("words");
                let len = r.random_range(1..=3.min(w.len()));
                let mut prefix = w[..len].to_string();
                if r.random_bool(0.1) {
                    prefix.push('z');
                }
                json!({ "prefix": prefix })
            }
            Kind::Maze => {
                let start = if r.random_bool(0.05) {
                    wall_cell(r, &self.grid)
                } else {
                    open_cell(r, &self.grid)
                };
                let goal = open_cell(r, &self.grid);
                json!({ "start": start, "goal": goal })
            }
        }
    }

    /// A request from a narrowed distribution that leaves one branch of the
    /// program untaken.
    pub fn warmup(&mut self) -> Request {
        let r = &mut self.rng;
        let body = match self.kind {
            Kind::Authorize => {
                let (u, p) = *USERS.choose(r).expect("users");
                json!({ "username": u, "password": p })
            }
            Kind::Upload => {
                let len = r.random_range(1..50);
                json!({ "name": format!("{}.txt", text(r, 6)), "content": text(r, len) })
            }
            Kind::Status => json!({
                "repo": format!("org/{}", text(r, 4)),
                "sha": format!("{:08x}", r.random::<u32>()),
                "build": r.random_range(1..10_000),
                "ok": true,
            }),
            Kind::Banking => {
                let txid = self.txid();
                json!({
                    "account": format!("acct{}", self.rng.random_range(0..5)),
                    "txid": txid,
                    "type": "deposit",
                    "amount": self.rng.random_range(1..100),
                })
            }
            Kind::Autocomplete => {
                let w = self.words.choose(r).expect("words");
                json!({ "prefix": w[..2].to_string() })
            }
            Kind::Maze => {
                let start = open_cell(r, &self.grid);
                let goal = open_cell(r, &self.grid);
                json!({ "start": start, "goal": goal })
            }
        };
        Request::post("/", body)
    }

    /// A request that takes the branch [`Self::warmup`] avoids.
    pub fn adversarial(&mut self) -> Request {
        let r = &mut self.rng;
        let body = match self.kind {
            Kind::Authorize => {
                let (u, _) = *USERS.choose(r).expect("users");
                json!({ "username": u, "password": text(r, 8) })
            }
            Kind::Upload => json!({ "name": format!("{}.txt", text(r, 6)) }),
            Kind::Status => json!({
                "repo": format!("org/{}", text(r, 4)),
                "sha": format!("{:08x}", r.random::<u32>()),
                "build": r.random_range(1..10_000),
                "ok": false,
            }),
            Kind::Banking => {
                let txid = self.txid();
                json!({
                    "account": format!("acct{}", self.rng.random_range(0..5)),
                    "txid": txid,
                    "type": "withdraw",
                    "amount": 1_000_000,
                })
            }
            Kind::Autocomplete => json!({ "prefix": "" }),
            Kind::Maze => {
                let start = wall_cell(r, &self.grid);
                let goal = open_cell(r, &self.grid);
                json!({ "start": start, "goal": goal })
            }
        };
        Request::post("/", body)
    }
}

/// Reference results computed without running any guest code.
#[derive(Debug, Default)]
pub struct Oracle {
    bank: mock::Bank,
}

impl Oracle {
    pub fn new() -> Self {
        Self::default()
    }

    /// The expected response body, for benchmarks that have an oracle.
    pub fn expect(&mut self, kind: Kind, body: &Json) -> Option<Json> {
        match kind {
            Kind::Authorize => {
                let u = body["username"].as_str()?;
                let p = body["password"].as_str()?;
                let ok = USERS.iter().any(|(uu, pp)| *uu == u && *pp == p);
                Some(json!(if ok { "ok" } else { "error" }))
            }
            Kind::Autocomplete => {
                let prefix = body["prefix"].as_str()?;
                if prefix.is_empty() {
                    return Some(json!({ "error": "empty prefix" }));
                }
                let found: Vec<String> = words().into_iter().filter(|w| w.starts_with(prefix)).take(10).collect();
                Some(json!({ "prefix": prefix, "completions": found }))
            }
            Kind::Maze => {
                let cell = |v: &Json| -> Option<[usize; 2]> { Some([v[0].as_u64()? as usize, v[1].as_u64()? as usize]) };
                let d = bfs(&maze_grid(), cell(&body["start"])?, cell(&body["goal"])?);
                Some(json!(d))
            }
            Kind::Banking => Some(self.bank.replay(body)),
            Kind::Upload | Kind::Status => None,
        }
    }

    /// Compares a response with the oracle's expectation.
    pub fn check(&mut self, kind: Kind, req: &Json, resp: &Json) -> Result<(), String> {
        let Some(want) = self.expect(kind, req) else {
            return Ok(());
        };
        let got = match kind {
            Kind::Maze => resp["distance"].clone(),
            _ => resp.clone(),
        };
        if got == want {
            Ok(())
        } else {
            Err(format!("oracle mismatch for {req}: want {want}, got {got}"))
        }
    }
}
