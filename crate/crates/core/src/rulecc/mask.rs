use std::fmt;

use crate::cube::FrameMap;

/// 2-D binary grid, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                bits.push(f(r, c));
            }
        }
        Self { rows, cols, bits }
    }

    /// Parses rows of `#`/`1` (on) and `.`/`0` (off). Whitespace is ignored.
    pub fn from_art(art: &str) -> Self {
        let lines: Vec<Vec<bool>> = art
            .lines()
            .map(|l| {
                l.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| c == '#' || c == '1')
                    .collect::<Vec<_>>()
            })
            .filter(|l| !l.is_empty())
            .collect();
        let rows = lines.len();
        let cols = lines.first().map_or(0, Vec::len);
        assert!(lines.iter().all(|l| l.len() == cols), "ragged mask art");
        Self {
            rows,
            cols,
            bits: lines.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.cols + c]
    }

    /// Out-of-grid positions read as 0.
    pub fn get_padded(&self, r: isize, c: isize) -> bool {
        r >= 0
            && c >= 0
            && (r as usize) < self.rows
            && (c as usize) < self.cols
            && self.bits[r as usize * self.cols + c as usize]
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.bits[r * self.cols + c] = v;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / self.cols, i % self.cols))
    }

    /// True when every 1 of `self` is also 1 in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMask {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '#' } else { '.' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

const NEIGHBORS_4: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

/// 1 where the value is strictly greater than `threshold`.
pub fn binarize(map: &FrameMap, threshold: f64) -> BinaryMask {
    BinaryMask {
        rows: map.rows(),
        cols: map.cols(),
        bits: map.data().iter().map(|&v| v > threshold).collect(),
    }
}

/// Keeps a pixel only if it and its four edge-neighbors are all 1.
pub fn erode4(mask: &BinaryMask, iterations: usize) -> BinaryMask {
    let mut cur = mask.clone();
    for _ in 0..iterations {
        cur = BinaryMask::from_fn(cur.rows, cur.cols, |r, c| {
            cur.get(r, c)
                && NEIGHBORS_4
                    .iter()
                    .all(|&(dr, dc)| cur.get_padded(r as isize + dr, c as isize + dc))
        });
    }
    cur
}

/// Sets a pixel if it or any of its four edge-neighbors is 1.
pub fn dilate4(mask: &BinaryMask, iterations: usize) -> BinaryMask {
    let mut cur = mask.clone();
    for _ in 0..iterations {
        cur = BinaryMask::from_fn(cur.rows, cur.cols, |r, c| {
            cur.get(r, c)
                || NEIGHBORS_4
                    .iter()
                    .any(|&(dr, dc)| cur.get_padded(r as isize + dr, c as isize + dc))
        });
    }
    cur
}
