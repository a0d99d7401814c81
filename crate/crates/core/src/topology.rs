//! Builders for common communication patterns.
//!
//! Row convention everywhere: `T[i][j] = 1` means oscillator `i` is
//! influenced by oscillator `j`.

use std::io::Read;
use std::path::Path;

use rand::Rng;

use crate::model::{TopologyError, TopologyMatrix};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Influence flows from lower to higher rank: `i` hears `i − 1`.
    Unidirectional,
    /// `i` hears both `i − 1` and `i + 1`.
    Bidirectional,
}

/// Next-neighbor chain, optionally closed into a ring.
pub fn chain(p: usize, direction: Direction, periodic: bool) -> Result<TopologyMatrix, TopologyError> {
    if p < 2 {
        return Err(TopologyError::TooSmall(p));
    }
    let mut t = TopologyMatrix::empty(p);
    t.set_periodic(periodic);
    for i in 1..p {
        t.set(i, i - 1);
    }
    if periodic {
        t.set(0, p - 1);
    }
    if direction == Direction::Bidirectional {
        for i in 0..p - 1 {
            t.set(i, i + 1);
        }
        if periodic {
            t.set(p - 1, 0);
        }
    }
    Ok(t)
}

/// 4-neighbor grid with row-major numbering, bidirectional. `periodic`
/// wraps both axes.
pub fn mesh2d(rows: usize, cols: usize, periodic: bool) -> Result<TopologyMatrix, TopologyError> {
    let p = rows * cols;
    if rows == 0 || cols == 0 || p < 2 {
        return Err(TopologyError::TooSmall(p));
    }
    let mut t = TopologyMatrix::empty(p);
    t.set_periodic(periodic);
    let idx = |r: usize, c: usize| r * cols + c;
    for r in 0..rows {
        for c in 0..cols {
            let me = idx(r, c);
            let mut link = |other: usize| {
                if other != me {
                    t.set(me, other);
                }
            };
            if r > 0 {
                link(idx(r - 1, c));
            } else if periodic {
                link(idx(rows - 1, c));
            }
            if r + 1 < rows {
                link(idx(r + 1, c));
            } else if periodic {
                link(idx(0, c));
            }
            if c > 0 {
                link(idx(r, c - 1));
            } else if periodic {
                link(idx(r, cols - 1));
            }
            if c + 1 < cols {
                link(idx(r, c + 1));
            } else if periodic {
                link(idx(r, 0));
            }
        }
    }
    Ok(t)
}

/// Erdős–Rényi graph. Directed graphs draw every off-diagonal entry
/// independently; undirected graphs draw the upper triangle and mirror it.
pub fn random_graph(
    p: usize,
    probability: f64,
    directed: bool,
    seed: u64,
) -> Result<TopologyMatrix, TopologyError> {
    if p < 2 {
        return Err(TopologyError::TooSmall(p));
    }
    if !(0.0..=1.0).contains(&probability) {
        return Err(TopologyError::InvalidProbability(probability));
    }
    let mut rng = rng::stream(seed, Purpose::Topology, 0);
    let mut t = TopologyMatrix::empty(p);
    for i in 0..p {
        for j in 0..p {
            if i == j || (!directed && j < i) {
                continue;
            }
            // Draw even at p = 0 or 1 so the stream position never depends on p.
            let u: f64 = rng.random();
            if u < probability {
                t.set(i, j);
                if !directed {
                    t.set(j, i);
                }
            }
        }
    }
    Ok(t)
}

/// All-to-all coupling without self-loops, the classical Kuramoto setting.
pub fn all_to_all(p: usize) -> Result<TopologyMatrix, TopologyError> {
    if p < 2 {
        return Err(TopologyError::TooSmall(p));
    }
    let mut t = TopologyMatrix::empty(p);
    for i in 0..p {
        for j in 0..p {
            if i != j {
                t.set(i, j);
            }
        }
    }
    Ok(t)
}

/// Parses a CSV adjacency matrix: P rows of P comma-separated 0/1 values.
pub fn parse_csv(text: &str) -> Result<TopologyMatrix, TopologyError> {
    let mut rows = Vec::new();
    for (r, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(c, cell)| match cell.trim() {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(TopologyError::NotBinary {
                    row: r,
                    col: c,
                    value: other.to_string(),
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    TopologyMatrix::from_rows(&rows, false)
}

/// Loads a CSV adjacency matrix from disk.
pub fn load_csv(path: &Path) -> Result<TopologyMatrix, TopologyError> {
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| TopologyError::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&text)
}

/// Serializes rows as `0,1,0;1,0,1;...`, the inline form used in config files.
pub fn to_inline(t: &TopologyMatrix) -> String {
    t.rows()
        .iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

/// Inverse of [`to_inline`].
pub fn parse_inline(text: &str) -> Result<TopologyMatrix, TopologyError> {
    parse_csv(&text.replace(';', "\n"))
}
