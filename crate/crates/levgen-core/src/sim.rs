//! Deterministic grid platformer simulation.
//!
//! The agent occupies one tile and moves between *standing* cells (an
//! enterable cell with a supporting cell directly below). Legal moves:
//!
//! * walk one column sideways onto a supported cell;
//! * walk off a ledge with horizontal carry 1..=2, then fall straight down
//!   until landing on support (falling out of the bottom row is death);
//! * jump arcs: rise 1..=4 rows straight up, carry 0..=4 columns at the
//!   apex, then fall until support. Every swept cell must be enterable and
//!   non-hazard. Rows above the grid count as open sky; leaving the grid
//!   horizontally or through the bottom invalidates the move.
//!
//! Completion is reaching a standing state in the last column. The search
//! is A* with heuristic `remaining columns`, cost = swept cells, ties by
//! smaller row then insertion order, so results are bit-reproducible. When
//! no completing path exists the result holds the path to the state with
//! the largest column (ties: shortest path), so every level still yields a
//! usable playtrace.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::level::{Level, TileCategory, TileVocabulary};

/// Agent positions in tile units, measured at tile centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Ordered positions the agent occupies, one entry per micro-step.
#[derive(Debug, Clone, PartialEq)]
pub struct Playtrace {
    pub points: Vec<Point>,
}

impl Playtrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub completed: bool,
    pub trace: Playtrace,
    /// Furthest column reached along the returned trace.
    pub progress: usize,
}

const MAX_JUMP_HEIGHT: i32 = 4;
const MAX_JUMP_CARRY: i32 = 4;
const MAX_FALL_CARRY: i32 = 2;

pub(crate) struct GridMap {
    h: i32,
    w: i32,
    enterable: Vec<bool>,
    supports: Vec<bool>,
}

impl GridMap {
    pub(crate) fn new(level: &Level, vocab: &TileVocabulary) -> Self {
        let (h, w) = (level.height(), level.width());
        let mut enterable = vec![false; h * w];
        let mut supports = vec![false; h * w];
        for r in 0..h {
            for c in 0..w {
                let cat = vocab.category(level.get(r, c) as usize);
                enterable[r * w + c] =
                    matches!(cat, TileCategory::Empty | TileCategory::Coin | TileCategory::Platform);
                supports[r * w + c] = matches!(
                    cat,
                    TileCategory::Solid
                        | TileCategory::Breakable
                        | TileCategory::QuestionBox
                        | TileCategory::PipeBody
                        | TileCategory::Platform
                );
            }
        }
        Self { h: h as i32, w: w as i32, enterable, supports }
    }

    /// Rows above the grid are open sky; anything else out of bounds is not
    /// enterable.
    pub(crate) fn enterable(&self, r: i32, c: i32) -> bool {
        if c < 0 || c >= self.w || r >= self.h {
            return false;
        }
        if r < 0 {
            return true;
        }
        self.enterable[(r * self.w + c) as usize]
    }

    fn supports(&self, r: i32, c: i32) -> bool {
        if r < 0 || r >= self.h || c < 0 || c >= self.w {
            return false;
        }
        self.supports[(r * self.w + c) as usize]
    }

    /// A standing cell: in grid, enterable, with support directly below.
    pub(crate) fn standing(&self, r: i32, c: i32) -> bool {
        r >= 0 && r < self.h && self.enterable(r, c) && self.supports(r + 1, c)
    }
}

pub(crate) struct Move {
    pub(crate) dest: (i32, i32),
    pub(crate) swept: Vec<(i32, i32)>,
}

/// Falls straight down from `(r, c)` collecting swept cells; `Some(row)` of
/// the landing cell, or `None` if the fall is blocked or exits the grid.
fn fall_to_support(map: &GridMap, mut r: i32, c: i32, swept: &mut Vec<(i32, i32)>) -> Option<i32> {
    loop {
        if map.standing(r, c) {
            return Some(r);
        }
        r += 1;
        if r >= map.h || !map.enterable(r, c) {
            return None;
        }
        swept.push((r, c));
    }
}

/// Enumerates legal moves in a fixed order (part of the determinism
/// contract: the A* expansion-order tie-break depends on it).
pub(crate) fn enumerate_moves(map: &GridMap, r: i32, c: i32) -> Vec<Move> {
    let mut moves = Vec::new();

    // Walks and walk-off falls.
    for dir in [1i32, -1] {
        'carry: for d in 1..=MAX_FALL_CARRY {
            let mut swept = Vec::new();
            for i in 1..=d {
                let cc = c + dir * i;
                if !map.enterable(r, cc) {
                    break 'carry;
                }
                // an earlier supported cell would already stop the agent
                if i < d && map.standing(r, cc) {
                    break 'carry;
                }
                swept.push((r, cc));
            }
            let cc = c + dir * d;
            if let Some(land) = fall_to_support(map, r, cc, &mut swept) {
                moves.push(Move { dest: (land, cc), swept });
            }
        }
    }

    // Jump arcs: rise, carry at the apex, fall.
    for h in 1..=MAX_JUMP_HEIGHT {
        let mut rise = Vec::new();
        let mut rise_ok = true;
        for dh in 1..=h {
            if !map.enterable(r - dh, c) {
                rise_ok = false;
                break;
            }
            rise.push((r - dh, c));
        }
        if !rise_ok {
            break; // taller jumps are blocked too
        }
        for dir in [1i32, -1] {
            let w_start = if dir == 1 { 0 } else { 1 }; // carry 0 has no direction
            'carry: for w in w_start..=MAX_JUMP_CARRY {
                let apex = r - h;
                let mut swept = rise.clone();
                for i in 1..=w {
                    let cc = c + dir * i;
                    if !map.enterable(apex, cc) {
                        break 'carry;
                    }
                    swept.push((apex, cc));
                }
                let cc = c + dir * w;
                if let Some(land) = fall_to_support(map, apex, cc, &mut swept) {
                    if (land, cc) != (r, c) {
                        moves.push(Move { dest: (land, cc), swept });
                    }
                }
            }
        }
    }

    moves
}

fn center(r: i32, c: i32) -> Point {
    Point { x: c as f64 + 0.5, y: r as f64 + 0.5 }
}

/// Spawn rule: the lowest standing cell in column 0.
fn find_spawn(map: &GridMap) -> Option<(i32, i32)> {
    (0..map.h).rev().map(|r| (r, 0)).find(|&(r, c)| map.standing(r, c))
}

/// Runs the agent on a level. Infallible: levels without a spawn produce a
/// degenerate single-point trace with `completed = false`.
pub fn simulate(level: &Level, vocab: &TileVocabulary) -> SimResult {
    let map = GridMap::new(level, vocab);
    let goal_col = map.w - 1;

    let Some(spawn) = find_spawn(&map) else {
        let r = (0..map.h).rev().find(|&r| map.enterable(r, 0)).unwrap_or(map.h - 1);
        return SimResult {
            completed: false,
            trace: Playtrace { points: vec![center(r, 0)] },
            progress: 0,
        };
    };

    // A*: f = g + remaining columns; pop order (f, row, seq).
    let mut open: BinaryHeap<Reverse<(u32, i32, u64)>> = BinaryHeap::new();
    let mut best_g: HashMap<(i32, i32), u32> = HashMap::new();
    let mut parent: HashMap<(i32, i32), ((i32, i32), Vec<(i32, i32)>)> = HashMap::new();
    let mut key_of: HashMap<u64, (i32, i32)> = HashMap::new();
    let mut seq: u64 = 0;

    let h_of = |c: i32| (goal_col - c) as u32;
    best_g.insert(spawn, 0);
    key_of.insert(seq, spawn);
    open.push(Reverse((h_of(spawn.1), spawn.0, seq)));
    seq += 1;

    let mut goal: Option<(i32, i32)> = None;
    // fallback: (col desc, g asc, row asc) kept as the best reachable state
    let mut best_state = spawn;
    let mut best_rank = (-spawn.1, 0u32, spawn.0);

    let mut closed: HashMap<(i32, i32), ()> = HashMap::new();
    while let Some(Reverse((_, _, id))) = open.pop() {
        let state = key_of[&id];
        if closed.contains_key(&state) {
            continue;
        }
        closed.insert(state, ());
        let g = best_g[&state];

        let rank = (-state.1, g, state.0);
        if rank < best_rank {
            best_rank = rank;
            best_state = state;
        }
        if state.1 == goal_col {
            goal = Some(state);
            break;
        }
        for mv in enumerate_moves(&map, state.0, state.1) {
            let ng = g + mv.swept.len() as u32;
            let dest = mv.dest;
            if closed.contains_key(&dest) {
                continue;
            }
            if best_g.get(&dest).map_or(true, |&old| ng < old) {
                best_g.insert(dest, ng);
                parent.insert(dest, (state, mv.swept));
                key_of.insert(seq, dest);
                open.push(Reverse((ng + h_of(dest.1), dest.0, seq)));
                seq += 1;
            }
        }
    }

    let target = goal.unwrap_or(best_state);
    let mut segments = Vec::new();
    let mut cur = target;
    while cur != spawn {
        let (prev, swept) = parent[&cur].clone();
        segments.push(swept);
        cur = prev;
    }
    segments.reverse();

    let mut points = vec![center(spawn.0, spawn.1)];
    for seg in segments {
        points.extend(seg.into_iter().map(|(r, c)| center(r, c)));
    }
    let progress = points.iter().map(|p| p.x.floor() as usize).max().unwrap_or(0);

    SimResult { completed: goal.is_some(), trace: Playtrace { points }, progress }
}

/// Whether the agent can complete the level.
pub fn is_playable(level: &Level, vocab: &TileVocabulary) -> bool {
    simulate(level, vocab).completed
}

/// Trace dump as `step,x,y` CSV.
pub fn trace_csv(trace: &Playtrace) -> String {
    let mut out = String::from("step,x,y\n");
    for (i, p) in trace.points.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i, p.x, p.y));
    }
    out
}

/// ASCII render of the level with `x` overlaid on every visited cell.
pub fn render_with_trace(
    level: &Level,
    vocab: &TileVocabulary,
    trace: &Playtrace,
) -> String {
    let mut rows: Vec<Vec<char>> = (0..level.height())
        .map(|r| (0..level.width()).map(|c| vocab.symbol(level.get(r, c) as usize)).collect())
        .collect();
    for p in &trace.points {
        let (r, c) = (p.y.floor() as i64, p.x.floor() as i64);
        if r >= 0 && (r as usize) < level.height() && c >= 0 && (c as usize) < level.width() {
            rows[r as usize][c as usize] = 'x';
        }
    }
    rows.into_iter().map(|r| r.into_iter().collect::<String>()).collect::<Vec<_>>().join("\n")
}
