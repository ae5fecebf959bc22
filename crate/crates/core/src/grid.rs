//! Lattice primitives shared by the world and the agent's maps.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Edge length of one grid cell in meters. One `MoveForward` crosses one cell.
pub const CELL_SIZE: f64 = 0.25;

/// Area of one grid cell in square meters.
pub const CELL_AREA: f64 = CELL_SIZE * CELL_SIZE;

/// Integer cell coordinate on one floor. `x` is the column, `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellPos {
    pub x: i32,
    pub y: i32,
}

impl CellPos {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// Cell containing the metric point `(x, y)`.
    pub fn containing(x: f64, y: f64) -> Self {
        Self {
            x: (x / CELL_SIZE).floor() as i32,
            y: (y / CELL_SIZE).floor() as i32,
        }
    }

    /// Metric coordinates of the cell center.
    pub fn center(self) -> (f64, f64) {
        (
            (f64::from(self.x) + 0.5) * CELL_SIZE,
            (f64::from(self.y) + 0.5) * CELL_SIZE,
        )
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn chebyshev(self, other: Self) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    /// Euclidean distance between cell centers in meters.
    pub fn metric_distance(self, other: Self) -> f64 {
        let dx = f64::from(self.x - other.x);
        let dy = f64::from(self.y - other.y);
        dx.hypot(dy) * CELL_SIZE
    }

    /// The four orthogonal neighbours in E, S, W, N order.
    pub fn neighbors4(self) -> [CellPos; 4] {
        [
            self.offset(1, 0),
            self.offset(0, 1),
            self.offset(-1, 0),
            self.offset(0, -1),
        ]
    }
}

impl fmt::Display for CellPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The eight lattice moves with their metric cost.
pub const MOVES8: [(i32, i32, f64); 8] = [
    (1, 0, CELL_SIZE),
    (0, 1, CELL_SIZE),
    (-1, 0, CELL_SIZE),
    (0, -1, CELL_SIZE),
    (1, 1, CELL_SIZE * std::f64::consts::SQRT_2),
    (-1, 1, CELL_SIZE * std::f64::consts::SQRT_2),
    (-1, -1, CELL_SIZE * std::f64::consts::SQRT_2),
    (1, -1, CELL_SIZE * std::f64::consts::SQRT_2),
];

/// Octile distance in meters: the exact 8-connected cost on an empty lattice.
pub fn octile_distance(a: CellPos, b: CellPos) -> f64 {
    let dx = f64::from((a.x - b.x).abs());
    let dy = f64::from((a.y - b.y).abs());
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo + lo * std::f64::consts::SQRT_2) * CELL_SIZE
}

/// Dense row-major 2D grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "grid data size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn contains(&self, pos: CellPos) -> bool {
        pos.x >= 0 && pos.y >= 0 && (pos.x as usize) < self.width && (pos.y as usize) < self.height
    }

    fn index(&self, pos: CellPos) -> Option<usize> {
        self.contains(pos)
            .then(|| pos.y as usize * self.width + pos.x as usize)
    }

    pub fn get(&self, pos: CellPos) -> Option<&T> {
        self.index(pos).map(|i| &self.data[i])
    }

    pub fn get_mut(&mut self, pos: CellPos) -> Option<&mut T> {
        self.index(pos).map(move |i| &mut self.data[i])
    }

    /// All positions in row-major order.
    pub fn positions(&self) -> impl Iterator<Item = CellPos> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| CellPos::new(x as i32, y as i32)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (CellPos, &T)> + '_ {
        self.positions().zip(self.data.iter())
    }

    pub fn values(&self) -> impl Iterator<Item = &T> + '_ {
        self.data.iter()
    }
}
