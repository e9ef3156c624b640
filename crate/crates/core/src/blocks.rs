//! Block decomposition of zero sets and dependency sets.
//!
//! A block is a connected cluster of zero cells together with an isolating
//! region: the cell cluster dilated until a zero-free contour surrounds
//! it. One-dimensional zero sets (curves) stay as cell chains; their index
//! is still well-defined through the contour computation, which is the
//! whole point of the construction.

use crate::error::BlockError;
use crate::field::{wedge_at, VectorField};
use crate::flow::FlowConfig;
use crate::geom::{Curve, Vec2};
use crate::index::{vector_field_index, IndexConfig, IndexResult, Region};
use crate::surface::Surface;
use crate::zeros::{find_zeros, GridInfo, PolishedZero, ZeroScan};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A connected cluster of zeros with an isolating region and its index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Block {
    /// Grid cells meeting the zero set.
    pub cells: Vec<(i64, i64)>,
    /// Isolated zeros refined inside this block.
    pub zeros: Vec<PolishedZero>,
    /// Isolating contours (outer counterclockwise, holes clockwise). Parts
    /// may run through the retraction margin outside the surface when the
    /// block touches the boundary.
    pub region: Region,
    pub index: IndexResult,
    pub touches_boundary: bool,
}

/// Cells grouped into components; cells within Chebyshev distance `gap`
/// of each other connect. Block decomposition uses `gap = 2` to bridge
/// single-cell holes in scanned curve-like zero sets.
fn components(cells: &[(i64, i64)], gap: i64) -> Vec<Vec<(i64, i64)>> {
    let set: BTreeSet<(i64, i64)> = cells.iter().copied().collect();
    let mut seen: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut out = Vec::new();
    for &start in &set {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen.insert(start);
        while let Some((x, y)) = stack.pop() {
            comp.push((x, y));
            for dx in -gap..=gap {
                for dy in -gap..=gap {
                    let n = (x + dx, y + dy);
                    if (dx != 0 || dy != 0) && set.contains(&n) && seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort();
    out
}

/// Chebyshev dilation of a cell set by `d` cells.
fn dilate(cells: &[(i64, i64)], d: i64) -> BTreeSet<(i64, i64)> {
    let mut out = BTreeSet::new();
    for &(x, y) in cells {
        for dx in -d..=d {
            for dy in -d..=d {
                out.insert((x + dx, y + dy));
            }
        }
    }
    out
}

/// Fills enclosed complement pockets of at most `max_size` cells. Ragged
/// scans leave single-cell islands inside thick bands; they contribute
/// nothing to the index (their contours enclose no zeros) but clutter the
/// region with spurious hole contours.
fn fill_small_holes(cells: &mut BTreeSet<(i64, i64)>, max_size: usize) {
    let Some(&(x0, _)) = cells.first() else {
        return;
    };
    let _ = x0;
    let min_x = cells.iter().map(|c| c.0).min().unwrap() - 1;
    let max_x = cells.iter().map(|c| c.0).max().unwrap() + 1;
    let min_y = cells.iter().map(|c| c.1).min().unwrap() - 1;
    let max_y = cells.iter().map(|c| c.1).max().unwrap() + 1;

    // flood the complement from the expanded frame; anything unreached is
    // an enclosed pocket
    let mut outside: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut stack: Vec<(i64, i64)> = Vec::new();
    for x in min_x..=max_x {
        for y in [min_y, max_y] {
            if !cells.contains(&(x, y)) {
                stack.push((x, y));
            }
        }
    }
    for y in min_y..=max_y {
        for x in [min_x, max_x] {
            if !cells.contains(&(x, y)) {
                stack.push((x, y));
            }
        }
    }
    while let Some(c) = stack.pop() {
        if !outside.insert(c) {
            continue;
        }
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let n = (c.0 + dx, c.1 + dy);
            if n.0 < min_x || n.0 > max_x || n.1 < min_y || n.1 > max_y {
                continue;
            }
            if !cells.contains(&n) && !outside.contains(&n) {
                stack.push(n);
            }
        }
    }

    let mut pockets: Vec<(i64, i64)> = Vec::new();
    for x in min_x..=max_x {
        for y in min_y..=max_y {
            let c = (x, y);
            if !cells.contains(&c) && !outside.contains(&c) {
                pockets.push(c);
            }
        }
    }
    // group pockets and fill the small ones
    for pocket in components(&pockets, 1) {
        if pocket.len() <= max_size {
            cells.extend(pocket);
        }
    }
}

/// Extracts the oriented boundary loops of a cell set. Directed grid edges
/// keep the cell interior on their left, so outer loops come out
/// counterclockwise and hole loops clockwise. Collinear runs are merged.
fn trace_contours(cells: &BTreeSet<(i64, i64)>, grid: &GridInfo) -> Vec<Curve> {
    // directed edges between grid nodes, keyed by start node; ordered map
    // so loop extraction is deterministic
    let mut edges: BTreeMap<(i64, i64), Vec<(i64, i64)>> = BTreeMap::new();
    let mut push = |a: (i64, i64), b: (i64, i64)| edges.entry(a).or_default().push(b);
    for &(x, y) in cells {
        if !cells.contains(&(x, y - 1)) {
            push((x, y), (x + 1, y)); // bottom, interior above
        }
        if !cells.contains(&(x + 1, y)) {
            push((x + 1, y), (x + 1, y + 1)); // right, interior left
        }
        if !cells.contains(&(x, y + 1)) {
            push((x + 1, y + 1), (x, y + 1)); // top, interior below
        }
        if !cells.contains(&(x - 1, y)) {
            push((x, y + 1), (x, y)); // left, interior right
        }
    }

    let mut loops = Vec::new();
    while let Some((&start, _)) = edges.iter().next() {
        let mut path = vec![start];
        let mut current = start;
        let mut incoming: Option<(i64, i64)> = None;
        loop {
            let outs = match edges.get_mut(&current) {
                Some(v) if !v.is_empty() => v,
                _ => break,
            };
            // at pinch nodes prefer the leftmost turn to keep loops simple
            let pick = if outs.len() == 1 {
                0
            } else {
                let dir_in = incoming.unwrap_or((1, 0));
                let mut best = 0;
                let mut best_angle = f64::NEG_INFINITY;
                for (i, &(nx, ny)) in outs.iter().enumerate() {
                    let d = (nx - current.0, ny - current.1);
                    let cross = (dir_in.0 * d.1 - dir_in.1 * d.0) as f64;
                    let dot = (dir_in.0 * d.0 + dir_in.1 * d.1) as f64;
                    let angle = cross.atan2(dot);
                    if angle > best_angle {
                        best_angle = angle;
                        best = i;
                    }
                }
                best
            };
            let next = outs.swap_remove(pick);
            if edges.get(&current).map(|v| v.is_empty()).unwrap_or(false) {
                edges.remove(&current);
            }
            incoming = Some((next.0 - current.0, next.1 - current.1));
            current = next;
            if current == start {
                break;
            }
            path.push(current);
        }
        if path.len() >= 4 {
            loops.push(path);
        }
    }

    let mut curves = Vec::new();
    for path in loops {
        // merge collinear runs
        let n = path.len();
        let mut vertices = Vec::new();
        for i in 0..n {
            let prev = path[(i + n - 1) % n];
            let here = path[i];
            let next = path[(i + 1) % n];
            let d1 = (here.0 - prev.0, here.1 - prev.1);
            let d2 = (next.0 - here.0, next.1 - here.1);
            if d1 != d2 {
                vertices.push(grid.node(here.0, here.1));
            }
        }
        if vertices.len() >= 3 {
            curves.push(Curve::closed(vertices));
        }
    }
    // deterministic order: outer loops (positive area) first, largest first
    curves.sort_by(|a, b| {
        b.signed_area()
            .partial_cmp(&a.signed_area())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    curves
}

/// Smallest |X| over contour vertices that lie inside the surface away
/// from its boundary; `None` when the field fails to evaluate.
fn contour_min_modulus(
    field: &dyn VectorField,
    surface: &Surface,
    curves: &[Curve],
    boundary_band: f64,
) -> Option<f64> {
    let mut min = f64::INFINITY;
    for c in curves {
        for &v in &c.vertices {
            if surface.contains(v) && surface.distance_to_boundary(v) > boundary_band {
                min = min.min(field.eval(v).ok()?.norm());
            }
        }
    }
    Some(min)
}

/// Decomposes the zero set into blocks with isolating regions and indices.
pub fn decompose_blocks(
    field: &dyn VectorField,
    surface: &Surface,
    resolution: usize,
    flow_cfg: &FlowConfig,
    index_cfg: &IndexConfig,
) -> Result<Vec<Block>, BlockError> {
    let scan = find_zeros(field, surface, resolution)?;
    decompose_blocks_from_scan(field, surface, &scan, flow_cfg, index_cfg)
}

/// Same as [`decompose_blocks`] but reuses an existing scan.
pub fn decompose_blocks_from_scan(
    field: &dyn VectorField,
    surface: &Surface,
    scan: &ZeroScan,
    flow_cfg: &FlowConfig,
    index_cfg: &IndexConfig,
) -> Result<Vec<Block>, BlockError> {
    let grid = scan.grid;
    let cells = scan.zero_cells();
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    let comps = components(&cells, 2);

    // pick one dilation width for all components: large enough to buy room
    // for a zero-free contour, small enough to keep components separate
    let mut chosen: Option<(i64, Vec<BTreeSet<(i64, i64)>>)> = None;
    'dil: for d in (1..=2).rev() {
        let dilated: Vec<BTreeSet<(i64, i64)>> = comps
            .iter()
            .map(|c| {
                let mut set = dilate(c, d);
                fill_small_holes(&mut set, 8);
                set
            })
            .collect();
        for i in 0..dilated.len() {
            for j in (i + 1)..dilated.len() {
                if dilated[i].intersection(&dilated[j]).next().is_some() {
                    continue 'dil;
                }
            }
        }
        chosen = Some((d, dilated));
        break;
    }
    let (base_d, mut dilated) = chosen.ok_or(BlockError::ComponentsMerge)?;

    // extra dilation passes per component until the contour is zero-free
    let band = 2.0 * grid.cell;
    let mut regions: Vec<Vec<Curve>> = Vec::with_capacity(comps.len());
    for (ci, comp) in comps.iter().enumerate() {
        let mut d = base_d;
        let mut passes = 0u32;
        loop {
            let curves = trace_contours(&dilated[ci], &grid);
            let min_mod = contour_min_modulus(field, surface, &curves, band);
            if matches!(min_mod, Some(m) if m > crate::index::VANISH_TOL) && !curves.is_empty() {
                regions.push(curves);
                break;
            }
            passes += 1;
            if passes > 5 {
                return Err(BlockError::NoIsolatingContour { passes });
            }
            d += 1;
            let mut grown = dilate(comp, d);
            fill_small_holes(&mut grown, 8);
            for (cj, other) in dilated.iter().enumerate() {
                if cj != ci && grown.intersection(other).next().is_some() {
                    return Err(BlockError::ComponentsMerge);
                }
            }
            dilated[ci] = grown;
        }
        // the contour must stay reachable by the retraction
        let max_outside = regions[ci]
            .iter()
            .flat_map(|c| c.vertices.iter())
            .map(|&v| surface.distance_outside(v))
            .fold(0.0f64, f64::max);
        if max_outside > surface.retraction_margin() {
            return Err(BlockError::ContourOutsideMargin);
        }
    }

    let mut blocks = Vec::with_capacity(comps.len());
    for (comp, curves) in comps.iter().zip(regions) {
        let region = Region::new(curves);
        let index = vector_field_index(field, surface, &region, flow_cfg, index_cfg)?;
        let zeros: Vec<PolishedZero> = scan
            .zeros
            .iter()
            .filter(|z| comp.binary_search(&z.cell).is_ok())
            .copied()
            .collect();
        let touches_boundary = comp.iter().any(|&(ix, iy)| {
            let c = grid.cell_center(ix, iy);
            surface.distance_to_boundary(c) <= grid.cell
        });
        blocks.push(Block {
            cells: comp.clone(),
            zeros,
            region,
            index,
            touches_boundary,
        });
    }
    Ok(blocks)
}

/// Cells where the two fields are linearly dependent, with connected
/// components labeled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DependencySet {
    pub cells: Vec<(i64, i64)>,
    pub components: Vec<Vec<(i64, i64)>>,
    pub grid: GridInfo,
}

impl DependencySet {
    pub fn contains_cell(&self, cell: (i64, i64)) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    /// Distance from a point to the nearest dependency cell center, in
    /// surface units.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.cells
            .iter()
            .map(|&(ix, iy)| self.grid.cell_center(ix, iy).dist(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Default relative tolerance for the dependency test.
pub const DEPENDENCY_TOL: f64 = 1e-7;

/// Marks cells where `|X ^ Y| <= tol * (1 + |X||Y|)` at any of the five
/// probe points (center and corners). Cells holding polished zeros of
/// either field are always included: a zero of one field forces the wedge
/// to vanish there.
pub fn dependency_set(
    x: &dyn VectorField,
    y: &dyn VectorField,
    surface: &Surface,
    resolution: usize,
    tol: f64,
) -> Result<DependencySet, BlockError> {
    if resolution < 16 {
        return Err(BlockError::ResolutionTooCoarse(resolution));
    }
    let grid = GridInfo::for_surface(surface, resolution);
    let mut cells = BTreeSet::new();
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let center = grid.cell_center(ix, iy);
            let probes = [
                center,
                grid.node(ix, iy),
                grid.node(ix + 1, iy),
                grid.node(ix + 1, iy + 1),
                grid.node(ix, iy + 1),
            ];
            if !probes.iter().any(|&p| surface.contains(p)) {
                continue;
            }
            for p in probes {
                let (Ok(xv), Ok(yv)) = (x.eval(p), y.eval(p)) else {
                    continue;
                };
                let w = wedge_at(xv, yv).abs();
                if w <= tol * (1.0 + xv.norm() * yv.norm()) {
                    cells.insert((ix, iy));
                    break;
                }
            }
        }
    }
    for field in [x, y] {
        if let Ok(scan) = find_zeros(field, surface, resolution) {
            for z in &scan.zeros {
                cells.insert(z.cell);
            }
        }
    }
    let cells: Vec<(i64, i64)> = cells.into_iter().collect();
    let comps = components(&cells, 1);
    Ok(DependencySet {
        cells,
        components: comps,
        grid,
    })
}
