//! Peano (Hilbert-type) scan of a `2^k x 2^k` grid and its contextual
//! neighbor map.
//!
//! Scan positions are 0-based inside the crate. The `rank` accessors expose
//! the 1-based numbering used when the scan is drawn on a grid (the first
//! visited pixel has rank 1).

use std::fmt;

use thiserror::Error;

/// Largest supported order. Positions are stored as `u32`, so `4^k` must fit.
pub const MAX_ORDER: u32 = 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScanError {
    #[error("scan order {order} exceeds the supported maximum {MAX_ORDER}")]
    Capacity { order: u32 },
}

/// Square grid of side `2^order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    order: u32,
}

impl GridShape {
    pub fn new(order: u32) -> Result<Self, ScanError> {
        if order > MAX_ORDER {
            return Err(ScanError::Capacity { order });
        }
        Ok(Self { order })
    }

    /// Shape with the given side, if the side is a supported power of two.
    pub fn from_side(side: usize) -> Option<Self> {
        if side == 0 || !side.is_power_of_two() {
            return None;
        }
        Self::new(side.trailing_zeros()).ok()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn side(&self) -> usize {
        1usize << self.order
    }

    pub fn n_pixels(&self) -> usize {
        1usize << (2 * self.order)
    }

    /// Row-major index of a pixel.
    pub fn index(&self, pixel: Pixel) -> usize {
        pixel.row * self.side() + pixel.col
    }

    pub fn pixel(&self, index: usize) -> Pixel {
        Pixel {
            row: index / self.side(),
            col: index % self.side(),
        }
    }

    pub fn contains(&self, row: isize, col: isize) -> bool {
        let side = self.side() as isize;
        (0..side).contains(&row) && (0..side).contains(&col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Pixel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Whether two 4-adjacent pixels share a row or a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    /// Orientation of a pair of 4-adjacent pixels, `None` if they are not adjacent.
    pub fn between(a: Pixel, b: Pixel) -> Option<Self> {
        let dr = a.row.abs_diff(b.row);
        let dc = a.col.abs_diff(b.col);
        match (dr, dc) {
            (0, 1) => Some(Orientation::Horizontal),
            (1, 0) => Some(Orientation::Vertical),
            _ => None,
        }
    }
}

/// Bijection between grid pixels and scan positions, with the orientation of
/// every scan step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanLayout {
    shape: GridShape,
    position_of: Vec<u32>,
    pixel_of: Vec<u32>,
    step_orient: Vec<Orientation>,
}

const UNVISITED: u32 = u32::MAX;

/// Builds the Hilbert scan of a `2^order` square grid.
///
/// The scan starts in the upper-left pixel and ends in the upper-right one.
/// For order 2 the rank grid is
///
/// ```text
///  1  2 15 16
///  4  3 14 13
///  5  8  9 12
///  6  7 10 11
/// ```
pub fn build_scan(order: u32) -> Result<ScanLayout, ScanError> {
    let shape = GridShape::new(order)?;
    let n = shape.n_pixels();
    let side = shape.side();

    let mut pixel_of = Vec::with_capacity(n);
    let mut position_of = vec![0u32; n];
    for pos in 0..n {
        let (col, row) = hilbert_point(side, pos);
        let index = row * side + col;
        pixel_of.push(index as u32);
        position_of[index] = pos as u32;
    }

    let step_orient = pixel_of
        .windows(2)
        .map(|w| {
            let a = shape.pixel(w[0] as usize);
            let b = shape.pixel(w[1] as usize);
            Orientation::between(a, b).expect("hilbert steps are 4-adjacent")
        })
        .collect();

    Ok(ScanLayout {
        shape,
        position_of,
        pixel_of,
        step_orient,
    })
}

// Classic iterative Hilbert index -> (x, y) conversion; x is the column.
fn hilbert_point(side: usize, d: usize) -> (usize, usize) {
    let (mut x, mut y) = (0usize, 0usize);
    let mut t = d;
    let mut s = 1usize;
    while s < side {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    (x, y)
}

impl ScanLayout {
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    /// Number of scanned pixels `N`.
    pub fn len(&self) -> usize {
        self.pixel_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixel_of.is_empty()
    }

    /// Pixel visited at 0-based scan position `pos`.
    pub fn pixel(&self, pos: usize) -> Pixel {
        self.shape.pixel(self.pixel_of[pos] as usize)
    }

    /// 0-based scan position of a pixel.
    ///
    /// # Panics
    /// If the pixel is not visited (see [`ScanLayout::prefix`]).
    pub fn position(&self, pixel: Pixel) -> usize {
        self.try_position(pixel).expect("pixel is not on the scan")
    }

    pub fn try_position(&self, pixel: Pixel) -> Option<usize> {
        let p = self.position_of[self.shape.index(pixel)];
        (p != UNVISITED).then_some(p as usize)
    }

    /// The first `len` positions of this scan as a scan of their own, for
    /// `1 <= len <= self.len()`. Unvisited pixels have no position and never
    /// appear as context.
    pub fn prefix(&self, len: usize) -> Option<ScanLayout> {
        if len == 0 || len > self.len() {
            return None;
        }
        let pixel_of = self.pixel_of[..len].to_vec();
        let mut position_of = vec![UNVISITED; self.position_of.len()];
        for (pos, &i) in pixel_of.iter().enumerate() {
            position_of[i as usize] = pos as u32;
        }
        Some(ScanLayout {
            shape: self.shape,
            position_of,
            pixel_of,
            step_orient: self.step_orient[..len - 1].to_vec(),
        })
    }

    /// 1-based rank of a pixel.
    pub fn rank(&self, pixel: Pixel) -> usize {
        self.position(pixel) + 1
    }

    /// Pixel carrying the 1-based `rank`, if it exists.
    pub fn pixel_at_rank(&self, rank: usize) -> Option<Pixel> {
        (1..=self.len())
            .contains(&rank)
            .then(|| self.pixel(rank - 1))
    }

    /// Orientation of the step from position `step` to `step + 1`.
    pub fn step_orientation(&self, step: usize) -> Orientation {
        self.step_orient[step]
    }

    pub fn step_orientations(&self) -> &[Orientation] {
        &self.step_orient
    }

    /// Row-major grid of 1-based ranks, 0 for unvisited pixels.
    pub fn rank_grid(&self) -> Vec<Vec<usize>> {
        let side = self.shape.side();
        (0..side)
            .map(|row| {
                (0..side)
                    .map(|col| match self.position_of[row * side + col] {
                        UNVISITED => 0,
                        p => p as usize + 1,
                    })
                    .collect()
            })
            .collect()
    }

    /// Reorders row-major pixel values into scan order.
    pub fn to_scan_order<T: Copy>(&self, row_major: &[T]) -> Vec<T> {
        assert_eq!(row_major.len(), self.shape.n_pixels(), "grid size mismatch");
        self.pixel_of
            .iter()
            .map(|&i| row_major[i as usize])
            .collect()
    }

    /// Inverse of [`ScanLayout::to_scan_order`]; needs a scan covering the
    /// whole grid.
    pub fn to_row_major<T: Copy>(&self, scan_order: &[T]) -> Vec<T> {
        assert_eq!(self.len(), self.shape.n_pixels(), "partial scan");
        assert_eq!(scan_order.len(), self.len(), "grid size mismatch");
        self.position_of
            .iter()
            .map(|&p| scan_order[p as usize])
            .collect()
    }
}

/// An off-scan 4-neighbor attached to a scan position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextNeighbor {
    /// 0-based scan position of the neighbor.
    pub position: usize,
    pub pixel: Pixel,
    pub orientation: Orientation,
}

/// For every scan position, the 4-neighbors of its pixel that are not its
/// scan predecessor or successor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextMap {
    offsets: Vec<usize>,
    neighbors: Vec<ContextNeighbor>,
}

pub fn build_context(layout: &ScanLayout) -> ContextMap {
    let n = layout.len();
    let shape = layout.shape();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbors = Vec::with_capacity(2 * n);
    offsets.push(0);
    for pos in 0..n {
        let p = layout.pixel(pos);
        let (r, c) = (p.row as isize, p.col as isize);
        // up, left, right, down
        for (dr, dc) in [(-1isize, 0isize), (0, -1), (0, 1), (1, 0)] {
            let (nr, nc) = (r + dr, c + dc);
            if !shape.contains(nr, nc) {
                continue;
            }
            let q = Pixel::new(nr as usize, nc as usize);
            let Some(qpos) = layout.try_position(q) else {
                continue;
            };
            if qpos + 1 == pos || pos + 1 == qpos {
                continue;
            }
            let orientation = if dr == 0 {
                Orientation::Horizontal
            } else {
                Orientation::Vertical
            };
            neighbors.push(ContextNeighbor {
                position: qpos,
                pixel: q,
                orientation,
            });
        }
        offsets.push(neighbors.len());
    }
    ContextMap { offsets, neighbors }
}

impl ContextMap {
    /// A map with no extras at any of `len` positions; inference over it
    /// reduces the contextual models to their plain-scan counterparts.
    pub fn empty(len: usize) -> Self {
        Self {
            offsets: vec![0; len + 1],
            neighbors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Extras of the 0-based scan position `pos`.
    pub fn extras(&self, pos: usize) -> &[ContextNeighbor] {
        &self.neighbors[self.offsets[pos]..self.offsets[pos + 1]]
    }

    pub fn total_extras(&self) -> usize {
        self.neighbors.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: [[usize; 4]; 4] = [
        [1, 2, 15, 16],
        [4, 3, 14, 13],
        [5, 8, 9, 12],
        [6, 7, 10, 11],
    ];

    fn extras_by_rank(
        layout: &ScanLayout,
        ctx: &ContextMap,
        rank: usize,
    ) -> Vec<(usize, Orientation)> {
        let mut v: Vec<_> = ctx
            .extras(rank - 1)
            .iter()
            .map(|e| (layout.rank(e.pixel), e.orientation))
            .collect();
        v.sort_by_key(|e| e.0);
        v
    }

    #[test]
    fn order_two_matches_reference_grid() {
        let layout = build_scan(2).unwrap();
        let grid = layout.rank_grid();
        for (row, expected) in grid.iter().zip(FIG3.iter()) {
            assert_eq!(row.as_slice(), expected.as_slice());
        }
    }

    #[test]
    fn order_zero_is_a_single_pixel() {
        let layout = build_scan(0).unwrap();
        assert_eq!(layout.len(), 1);
        assert_eq!(layout.rank(Pixel::new(0, 0)), 1);
        assert!(layout.step_orientations().is_empty());
        let ctx = build_context(&layout);
        assert!(ctx.extras(0).is_empty());
    }

    #[test]
    fn capacity_is_enforced() {
        assert_eq!(
            build_scan(MAX_ORDER + 1).unwrap_err(),
            ScanError::Capacity { order: 16 }
        );
    }

    #[test]
    fn order_three_is_an_adjacent_bijection() {
        let layout = build_scan(3).unwrap();
        assert_eq!(layout.len(), 64);
        let mut seen = [false; 64];
        for pos in 0..64 {
            let p = layout.pixel(pos);
            assert_eq!(layout.position(p), pos);
            seen[layout.shape().index(p)] = true;
        }
        assert!(seen.iter().all(|&s| s));
        for pos in 0..63 {
            let (a, b) = (layout.pixel(pos), layout.pixel(pos + 1));
            assert_eq!(a.row.abs_diff(b.row) + a.col.abs_diff(b.col), 1);
        }
    }

    #[test]
    fn context_examples() {
        use Orientation::*;
        let layout = build_scan(2).unwrap();
        let ctx = build_context(&layout);
        assert_eq!(
            extras_by_rank(&layout, &ctx, 3),
            vec![(8, Vertical), (14, Horizontal)]
        );
        assert!(extras_by_rank(&layout, &ctx, 6).is_empty());
        assert_eq!(extras_by_rank(&layout, &ctx, 1), vec![(4, Vertical)]);
    }

    #[test]
    fn scan_order_round_trip() {
        let layout = build_scan(3).unwrap();
        let values: Vec<usize> = (0..64).collect();
        let scanned = layout.to_scan_order(&values);
        assert_eq!(layout.to_row_major(&scanned), values);
        assert_eq!(scanned[0], 0);
    }

    #[test]
    fn prefix_is_the_left_strip() {
        let full = build_scan(2).unwrap();
        let strip = full.prefix(8).unwrap();
        assert_eq!(strip.len(), 8);
        assert_eq!(strip.rank_grid()[2], vec![5, 8, 0, 0]);
        assert_eq!(strip.try_position(Pixel::new(0, 2)), None);
        let ctx = build_context(&strip);
        // rank 3 keeps only its lower neighbor (rank 8)
        let extras: Vec<usize> = ctx.extras(2).iter().map(|e| e.position + 1).collect();
        assert_eq!(extras, vec![8]);
        // pairs 1-4, 3-8 and 5-8, each seen from both ends
        assert_eq!(ctx.total_extras(), 6);
        assert!(full.prefix(0).is_none() && full.prefix(17).is_none());
    }

    #[test]
    fn shape_from_side() {
        assert_eq!(GridShape::from_side(8).unwrap().order(), 3);
        assert!(GridShape::from_side(12).is_none());
        assert!(GridShape::from_side(0).is_none());
    }
}
