//! Grid ray fan used by the simulated sensor and by the planner's
//! coverage and open-area estimates.

use crate::grid::{CellPos, CELL_SIZE};

/// Angular spacing between rays, in degrees.
pub const RAY_SPACING_DEG: f64 = 0.5;

/// How a cell interacts with a ray that enters it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayHit {
    /// Outside the lattice: the ray ends without recording the cell.
    OutOfBounds,
    /// Recorded, and the ray continues.
    Transparent,
    /// Recorded, and the ray continues; later cells are seen "through" this one.
    Portal,
    /// Recorded, and the ray stops.
    Opaque,
}

/// One recorded cell together with the first portal the ray crossed to reach it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySample {
    pub cell: CellPos,
    pub through: Option<CellPos>,
    pub entry_distance: f64,
}

/// Ray directions (degrees) for a cone of `fov_deg` centred on `heading_deg`.
///
/// Rays are offset by half a spacing from the cone edges so that a ray from a
/// cell centre never passes exactly through a lattice corner at 45°.
pub fn ray_angles(heading_deg: f64, fov_deg: f64) -> Vec<f64> {
    if fov_deg <= 0.0 {
        return Vec::new();
    }
    let fov = fov_deg.min(360.0);
    let count = (fov / RAY_SPACING_DEG).ceil() as usize;
    let step = fov / count as f64;
    (0..count)
        .map(|i| heading_deg - fov / 2.0 + (i as f64 + 0.5) * step)
        .collect()
}

/// Marches one ray with an exact lattice traversal, calling `visit` for every
/// entered cell until the range is exceeded, the grid ends, or an opaque cell
/// is recorded.
pub fn march<F>(origin: (f64, f64), angle_deg: f64, range_m: f64, mut classify: F, out: &mut Vec<RaySample>)
where
    F: FnMut(CellPos) -> RayHit,
{
    let (ox, oy) = origin;
    let rad = angle_deg.to_radians();
    let (dx, dy) = (rad.cos(), rad.sin());
    let mut cell = CellPos::containing(ox, oy);

    let step_x = if dx > 0.0 { 1 } else { -1 };
    let step_y = if dy > 0.0 { 1 } else { -1 };
    let next_boundary = |c: i32, step: i32| f64::from(if step > 0 { c + 1 } else { c }) * CELL_SIZE;
    let mut t_max_x = if dx.abs() < 1e-15 {
        f64::INFINITY
    } else {
        (next_boundary(cell.x, step_x) - ox) / dx
    };
    let mut t_max_y = if dy.abs() < 1e-15 {
        f64::INFINITY
    } else {
        (next_boundary(cell.y, step_y) - oy) / dy
    };
    let t_delta_x = if dx.abs() < 1e-15 { f64::INFINITY } else { CELL_SIZE / dx.abs() };
    let t_delta_y = if dy.abs() < 1e-15 { f64::INFINITY } else { CELL_SIZE / dy.abs() };

    let mut through = None;
    loop {
        let t_enter;
        if t_max_x < t_max_y {
            cell.x += step_x;
            t_enter = t_max_x;
            t_max_x += t_delta_x;
        } else {
            cell.y += step_y;
            t_enter = t_max_y;
            t_max_y += t_delta_y;
        }
        if t_enter > range_m {
            return;
        }
        match classify(cell) {
            RayHit::OutOfBounds => return,
            RayHit::Opaque => {
                out.push(RaySample { cell, through, entry_distance: t_enter });
                return;
            }
            RayHit::Transparent => out.push(RaySample { cell, through, entry_distance: t_enter }),
            RayHit::Portal => {
                out.push(RaySample { cell, through, entry_distance: t_enter });
                through.get_or_insert(cell);
            }
        }
    }
}

/// Casts the full fan and merges the samples per cell.
///
/// The origin cell is always included. When a cell is reached both directly
/// and through a portal, the direct sighting wins; between portals the
/// smallest portal cell wins.
pub fn cast_fan<F>(
    origin: (f64, f64),
    heading_deg: f64,
    fov_deg: f64,
    range_m: f64,
    mut classify: F,
) -> std::collections::BTreeMap<CellPos, Option<CellPos>>
where
    F: FnMut(CellPos) -> RayHit,
{
    let mut seen = std::collections::BTreeMap::new();
    seen.insert(CellPos::containing(origin.0, origin.1), None);
    let mut buf = Vec::new();
    for angle in ray_angles(heading_deg, fov_deg) {
        buf.clear();
        march(origin, angle, range_m, &mut classify, &mut buf);
        for s in &buf {
            seen.entry(s.cell)
                .and_modify(|prev: &mut Option<CellPos>| {
                    *prev = match (*prev, s.through) {
                        (None, _) | (_, None) => None,
                        (Some(a), Some(b)) => Some(a.min(b)),
                    }
                })
                .or_insert(s.through);
        }
    }
    seen
}
