//! Interval meshes and structured rectangular meshes (uniform, nonuniform
//! grid-line, L-shaped), with boundary edge elements carrying essential
//! constraints.
//!
//! Every mesh is a tensor grid of axis-aligned rectangular cells, some of
//! which may be absent (L-shaped domains are unions of rectangles). Boundary
//! conditions attach to geometric segments and are resolved to edge elements
//! (or endpoint constraints in 1D) when the mesh is built or refined.

use thiserror::Error;

use crate::basis::ElementGeometry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("element with dimensions {hx} x {hy} is degenerate")]
    DegenerateElement { hx: f64, hy: f64 },
    #[error("grid lines must be strictly increasing with at least two entries")]
    BadGridLines,
    #[error("element counts must be at least one")]
    EmptyGrid,
    #[error("L-shaped mesh needs an even number of elements per side, got {0}")]
    OddLShapeSubdivision(usize),
    #[error("mesh text format: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Edge,
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    SimplySupported,
    Free,
}

/// Axis-aligned geometric boundary segment with its condition. Segments are
/// mesh-independent; they resolve to edge elements at build time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub condition: BoundaryCondition,
}

impl BoundarySegment {
    pub fn new(a: [f64; 2], b: [f64; 2], condition: BoundaryCondition) -> Self {
        Self { a, b, condition }
    }

    fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        let (lo, hi, fixed_coord, axis) = self.extent();
        let (along, fixed) = match axis {
            Axis::X => (p[0], p[1]),
            Axis::Y => (p[1], p[0]),
        };
        (fixed - fixed_coord).abs() <= tol && along >= lo - tol && along <= hi + tol
    }

    /// (min, max) along the running coordinate, the fixed coordinate, and
    /// the axis the segment is aligned with.
    fn extent(&self) -> (f64, f64, f64, Axis) {
        if (self.a[1] - self.b[1]).abs() <= (self.a[0] - self.b[0]).abs() {
            (
                self.a[0].min(self.b[0]),
                self.a[0].max(self.b[0]),
                self.a[1],
                Axis::X,
            )
        } else {
            (
                self.a[1].min(self.b[1]),
                self.a[1].max(self.b[1]),
                self.a[0],
                Axis::Y,
            )
        }
    }
}

/// Which side of the owning element an edge element lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ElementSide {
    South, // η = −1
    East,  // ξ = +1
    North, // η = +1
    West,  // ξ = −1
}

/// Rectangular element: node ids counter-clockwise from the lower-left
/// corner, plus its dimensions. 1D elements use the first two ids and
/// `hy = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub nodes: [usize; 4],
    pub origin: [f64; 2],
    pub hx: f64,
    pub hy: f64,
}

/// Two-node boundary edge element on a constrained segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeElement {
    pub nodes: [usize; 2],
    pub axis: Axis,
    pub length: f64,
    /// Owning (unique adjacent) element and the side the edge lies on.
    pub element: usize,
    pub side: ElementSide,
}

/// Essential constraint carrier: a 1D endpoint or a 2D edge element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Point { node: usize },
    Edge(EdgeElement),
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: Dim,
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub constraints: Vec<Constraint>,
    pub node_class: Vec<NodeClass>,
    pub boundary: Vec<BoundarySegment>,
    x_lines: Vec<f64>,
    y_lines: Vec<f64>,
    /// Element id per grid cell, row-major over (ix, iy); `None` for cells
    /// outside the domain.
    cell_map: Vec<Option<usize>>,
}

/// Boundary conditions for the four sides of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectBoundary {
    pub south: BoundaryCondition,
    pub east: BoundaryCondition,
    pub north: BoundaryCondition,
    pub west: BoundaryCondition,
}

impl RectBoundary {
    pub fn simply_supported() -> Self {
        Self {
            south: BoundaryCondition::SimplySupported,
            east: BoundaryCondition::SimplySupported,
            north: BoundaryCondition::SimplySupported,
            west: BoundaryCondition::SimplySupported,
        }
    }
}

impl Mesh {
    /// 1D interval mesh on [0, length] with `m` equal elements. Both ends
    /// are constrained when marked simply supported.
    pub fn interval(
        length: f64,
        m: usize,
        left: BoundaryCondition,
        right: BoundaryCondition,
    ) -> Result<Self, MeshError> {
        if m == 0 {
            return Err(MeshError::EmptyGrid);
        }
        if !(length > 0.0) {
            return Err(MeshError::DegenerateElement { hx: length, hy: 0.0 });
        }
        let x_lines: Vec<f64> = (0..=m).map(|i| length * i as f64 / m as f64).collect();
        let mut boundary = Vec::new();
        boundary.push(BoundarySegment::new([0.0, 0.0], [0.0, 0.0], left));
        boundary.push(BoundarySegment::new([length, 0.0], [length, 0.0], right));
        Self::build_1d(x_lines, boundary)
    }

    pub fn interval_from_lines(
        x_lines: Vec<f64>,
        left: BoundaryCondition,
        right: BoundaryCondition,
    ) -> Result<Self, MeshError> {
        check_lines(&x_lines)?;
        let (x0, x1) = (x_lines[0], *x_lines.last().unwrap());
        let boundary = vec![
            BoundarySegment::new([x0, 0.0], [x0, 0.0], left),
            BoundarySegment::new([x1, 0.0], [x1, 0.0], right),
        ];
        Self::build_1d(x_lines, boundary)
    }

    fn build_1d(x_lines: Vec<f64>, boundary: Vec<BoundarySegment>) -> Result<Self, MeshError> {
        check_lines(&x_lines)?;
        let n = x_lines.len();
        let nodes: Vec<[f64; 2]> = x_lines.iter().map(|&x| [x, 0.0]).collect();
        let mut elements = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let hx = x_lines[i + 1] - x_lines[i];
            elements.push(Element {
                nodes: [i, i + 1, usize::MAX, usize::MAX],
                origin: [x_lines[i], 0.0],
                hx,
                hy: 0.0,
            });
        }
        let mut node_class = vec![NodeClass::Internal; n];
        node_class[0] = NodeClass::Edge;
        node_class[n - 1] = NodeClass::Edge;

        let tol = tolerance(&x_lines);
        let mut constraints = Vec::new();
        for seg in &boundary {
            if seg.condition != BoundaryCondition::SimplySupported {
                continue;
            }
            for (i, node) in nodes.iter().enumerate() {
                if (node[0] - seg.a[0]).abs() <= tol && (i == 0 || i == n - 1) {
                    constraints.push(Constraint::Point { node: i });
                }
            }
        }
        let cell_map = (0..n - 1).map(Some).collect();
        Ok(Self {
            dim: Dim::One,
            nodes,
            elements,
            constraints,
            node_class,
            boundary,
            x_lines,
            y_lines: vec![0.0],
            cell_map,
        })
    }

    /// Uniform rectangular mesh of `mx` × `my` identical elements.
    pub fn uniform_rect(
        lx: f64,
        ly: f64,
        mx: usize,
        my: usize,
        bcs: RectBoundary,
    ) -> Result<Self, MeshError> {
        if mx == 0 || my == 0 {
            return Err(MeshError::EmptyGrid);
        }
        if !(lx > 0.0) || !(ly > 0.0) {
            return Err(MeshError::DegenerateElement { hx: lx, hy: ly });
        }
        let xs = (0..=mx).map(|i| lx * i as f64 / mx as f64).collect();
        let ys = (0..=my).map(|j| ly * j as f64 / my as f64).collect();
        Self::from_grid_lines(xs, ys, bcs)
    }

    /// Tensor-product mesh from strictly increasing grid lines.
    pub fn from_grid_lines(
        x_lines: Vec<f64>,
        y_lines: Vec<f64>,
        bcs: RectBoundary,
    ) -> Result<Self, MeshError> {
        check_lines(&x_lines)?;
        check_lines(&y_lines)?;
        let (x0, x1) = (x_lines[0], *x_lines.last().unwrap());
        let (y0, y1) = (y_lines[0], *y_lines.last().unwrap());
        let boundary = vec![
            BoundarySegment::new([x0, y0], [x1, y0], bcs.south),
            BoundarySegment::new([x1, y0], [x1, y1], bcs.east),
            BoundarySegment::new([x0, y1], [x1, y1], bcs.north),
            BoundarySegment::new([x0, y0], [x0, y1], bcs.west),
        ];
        Self::structured(x_lines, y_lines, |_, _, _, _| true, boundary)
    }

    /// Square plate of side `l` meshed with `m` × `m` elements, minus the
    /// quadrant x > l/2, y > l/2. The two full-length edges (south and
    /// west) are simply supported, the remaining four are free.
    pub fn l_shaped(l: f64, m: usize) -> Result<Self, MeshError> {
        if m == 0 {
            return Err(MeshError::EmptyGrid);
        }
        if m % 2 != 0 {
            return Err(MeshError::OddLShapeSubdivision(m));
        }
        if !(l > 0.0) {
            return Err(MeshError::DegenerateElement { hx: l, hy: l });
        }
        let xs: Vec<f64> = (0..=m).map(|i| l * i as f64 / m as f64).collect();
        let ys = xs.clone();
        let half = l / 2.0;
        let ss = BoundaryCondition::SimplySupported;
        let free = BoundaryCondition::Free;
        let boundary = vec![
            BoundarySegment::new([0.0, 0.0], [l, 0.0], ss),
            BoundarySegment::new([0.0, 0.0], [0.0, l], ss),
            BoundarySegment::new([l, 0.0], [l, half], free),
            BoundarySegment::new([half, half], [l, half], free),
            BoundarySegment::new([half, half], [half, l], free),
            BoundarySegment::new([0.0, l], [half, l], free),
        ];
        let keep = move |_: usize, _: usize, cx: f64, cy: f64| !(cx > half && cy > half);
        Self::structured(xs, ys, keep, boundary)
    }

    /// Structured builder: grid lines, a predicate on cells (indices and
    /// centroid) selecting those that belong to the domain, and the
    /// geometric boundary description.
    fn structured(
        x_lines: Vec<f64>,
        y_lines: Vec<f64>,
        keep: impl Fn(usize, usize, f64, f64) -> bool,
        boundary: Vec<BoundarySegment>,
    ) -> Result<Self, MeshError> {
        let nx = x_lines.len();
        let ny = y_lines.len();
        let node_id = |ix: usize, iy: usize| iy * nx + ix;

        let mut cell_map = vec![None; (nx - 1) * (ny - 1)];
        let mut elements = Vec::new();
        let mut node_used = vec![false; nx * ny];
        for iy in 0..ny - 1 {
            for ix in 0..nx - 1 {
                let cx = 0.5 * (x_lines[ix] + x_lines[ix + 1]);
                let cy = 0.5 * (y_lines[iy] + y_lines[iy + 1]);
                if !keep(ix, iy, cx, cy) {
                    continue;
                }
                let corners = [
                    node_id(ix, iy),
                    node_id(ix + 1, iy),
                    node_id(ix + 1, iy + 1),
                    node_id(ix, iy + 1),
                ];
                for c in corners {
                    node_used[c] = true;
                }
                cell_map[iy * (nx - 1) + ix] = Some(elements.len());
                elements.push(Element {
                    nodes: corners,
                    origin: [x_lines[ix], y_lines[iy]],
                    hx: x_lines[ix + 1] - x_lines[ix],
                    hy: y_lines[iy + 1] - y_lines[iy],
                });
            }
        }
        if elements.is_empty() {
            return Err(MeshError::EmptyGrid);
        }

        // Compact node numbering over used grid nodes.
        let mut renumber = vec![usize::MAX; nx * ny];
        let mut nodes = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let g = node_id(ix, iy);
                if node_used[g] {
                    renumber[g] = nodes.len();
                    nodes.push([x_lines[ix], y_lines[iy]]);
                }
            }
        }
        for e in &mut elements {
            for n in &mut e.nodes {
                *n = renumber[*n];
            }
        }

        let mut mesh = Self {
            dim: Dim::Two,
            nodes,
            elements,
            constraints: Vec::new(),
            node_class: Vec::new(),
            boundary,
            x_lines,
            y_lines,
            cell_map,
        };
        mesh.classify_and_constrain();
        Ok(mesh)
    }

    /// Marks boundary nodes (shared-edge counting) and resolves constrained
    /// segments to edge elements.
    fn classify_and_constrain(&mut self) {
        use std::collections::HashMap;
        // An element edge on the domain boundary belongs to exactly one
        // element: count adjacency and remember the last (only) owner.
        let sides = [
            (ElementSide::South, 0, 1),
            (ElementSide::East, 1, 2),
            (ElementSide::North, 3, 2),
            (ElementSide::West, 0, 3),
        ];
        let mut adjacency: HashMap<(usize, usize), (usize, usize, ElementSide)> = HashMap::new();
        for (eid, elem) in self.elements.iter().enumerate() {
            for &(side, a, b) in &sides {
                let key = ordered(elem.nodes[a], elem.nodes[b]);
                adjacency
                    .entry(key)
                    .and_modify(|(count, _, _)| *count += 1)
                    .or_insert((1, eid, side));
            }
        }

        let mut is_boundary = vec![false; self.nodes.len()];
        let mut boundary_edges: Vec<(usize, usize, usize, ElementSide)> = Vec::new();
        for (key, (count, eid, side)) in &adjacency {
            if *count == 1 {
                is_boundary[key.0] = true;
                is_boundary[key.1] = true;
                boundary_edges.push((key.0, key.1, *eid, *side));
            }
        }
        boundary_edges.sort_unstable();

        self.node_class = is_boundary
            .iter()
            .map(|&b| if b { NodeClass::Edge } else { NodeClass::Internal })
            .collect();

        let tol = tolerance(&self.x_lines).max(tolerance(&self.y_lines));
        let mut constraints = Vec::new();
        for &(a, b, eid, side) in &boundary_edges {
            let pa = self.nodes[a];
            let pb = self.nodes[b];
            let axis = if (pa[1] - pb[1]).abs() <= tol {
                Axis::X
            } else {
                Axis::Y
            };
            let constrained = self.boundary.iter().any(|seg| {
                seg.condition == BoundaryCondition::SimplySupported
                    && seg.contains(pa, tol)
                    && seg.contains(pb, tol)
            });
            if constrained {
                let length = match axis {
                    Axis::X => (pb[0] - pa[0]).abs(),
                    Axis::Y => (pb[1] - pa[1]).abs(),
                };
                constraints.push(Constraint::Edge(EdgeElement {
                    nodes: [a, b],
                    axis,
                    length,
                    element: eid,
                    side,
                }));
            }
        }
        self.constraints = constraints;
    }

    /// Splits every element in two (1D) or four (2D) congruent children.
    pub fn refined(&self) -> Self {
        let refine_lines = |lines: &[f64]| -> Vec<f64> {
            let mut out = Vec::with_capacity(lines.len() * 2 - 1);
            for w in lines.windows(2) {
                out.push(w[0]);
                out.push(0.5 * (w[0] + w[1]));
            }
            out.push(*lines.last().unwrap());
            out
        };
        match self.dim {
            Dim::One => {
                let xs = refine_lines(&self.x_lines);
                Self::build_1d(xs, self.boundary.clone()).expect("refinement preserves validity")
            }
            Dim::Two => {
                let xs = refine_lines(&self.x_lines);
                let ys = refine_lines(&self.y_lines);
                let nx1 = self.x_lines.len() - 1;
                let cell_map = self.cell_map.clone();
                // A child cell is kept iff its parent cell exists.
                let keep = move |ix: usize, iy: usize, _: f64, _: f64| {
                    cell_map[(iy / 2) * nx1 + ix / 2].is_some()
                };
                Self::structured(xs, ys, keep, self.boundary.clone())
                    .expect("refinement preserves validity")
            }
        }
    }

    pub fn element_geometry(&self, e: usize) -> ElementGeometry {
        let el = &self.elements[e];
        match self.dim {
            Dim::One => ElementGeometry::segment(el.origin[0], el.hx).expect("valid element"),
            Dim::Two => {
                ElementGeometry::rectangle(el.origin, el.hx, el.hy).expect("valid element")
            }
        }
    }

    /// Node ids of an element (two in 1D, four in 2D).
    pub fn element_nodes(&self, e: usize) -> &[usize] {
        let el = &self.elements[e];
        match self.dim {
            Dim::One => &el.nodes[..2],
            Dim::Two => &el.nodes[..4],
        }
    }

    /// Element containing (x, y); points on shared interfaces resolve to one
    /// of the adjacent elements.
    pub fn locate(&self, x: f64, y: f64) -> Option<usize> {
        let ix = lookup_cell(&self.x_lines, x)?;
        let iy = match self.dim {
            Dim::One => 0,
            Dim::Two => lookup_cell(&self.y_lines, y)?,
        };
        self.cell_map[iy * (self.x_lines.len() - 1) + ix]
    }

    pub fn domain_area(&self) -> f64 {
        match self.dim {
            Dim::One => self.elements.iter().map(|e| e.hx).sum(),
            Dim::Two => self.elements.iter().map(|e| e.hx * e.hy).sum(),
        }
    }

    /// Side length when the mesh is uniform with square elements.
    pub fn uniform_square_size(&self) -> Option<f64> {
        let h = self.elements.first()?.hx;
        let all = self
            .elements
            .iter()
            .all(|e| (e.hx - h).abs() < 1e-12 * h && (e.hy - h).abs() < 1e-12 * h);
        (all && self.dim == Dim::Two).then_some(h)
    }

    pub fn edge_constraints(&self) -> impl Iterator<Item = &EdgeElement> {
        self.constraints.iter().filter_map(|c| match c {
            Constraint::Edge(e) => Some(e),
            Constraint::Point { .. } => None,
        })
    }

    /// Line-oriented text export (node, element and constraint tables).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "dim {}\n",
            match self.dim {
                Dim::One => 1,
                Dim::Two => 2,
            }
        ));
        s.push_str(&format!("nodes {}\n", self.nodes.len()));
        for (i, n) in self.nodes.iter().enumerate() {
            s.push_str(&format!("{} {:.17e} {:.17e}\n", i, n[0], n[1]));
        }
        s.push_str(&format!("elements {}\n", self.elements.len()));
        for (i, e) in self.elements.iter().enumerate() {
            match self.dim {
                Dim::One => s.push_str(&format!("{} {} {}\n", i, e.nodes[0], e.nodes[1])),
                Dim::Two => s.push_str(&format!(
                    "{} {} {} {} {}\n",
                    i, e.nodes[0], e.nodes[1], e.nodes[2], e.nodes[3]
                )),
            }
        }
        let edges: Vec<&EdgeElement> = self.edge_constraints().collect();
        s.push_str(&format!("edges {}\n", edges.len()));
        for e in edges {
            s.push_str(&format!(
                "{} {} {}\n",
                e.nodes[0],
                e.nodes[1],
                match e.axis {
                    Axis::X => "x",
                    Axis::Y => "y",
                }
            ));
        }
        let points: Vec<usize> = self
            .constraints
            .iter()
            .filter_map(|c| match c {
                Constraint::Point { node } => Some(*node),
                _ => None,
            })
            .collect();
        s.push_str(&format!("points {}\n", points.len()));
        for p in points {
            s.push_str(&format!("{}\n", p));
        }
        s
    }

    /// Parses the `to_text` format back into a mesh. The geometric boundary
    /// description is not part of the format, so imported meshes carry their
    /// constraints verbatim but cannot be refined further.
    pub fn from_text(text: &str) -> Result<Self, MeshError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let err = |msg: &str| MeshError::Parse(msg.to_string());

        let dim = match expect_header(&mut lines, "dim")? {
            1 => Dim::One,
            2 => Dim::Two,
            d => return Err(MeshError::Parse(format!("unsupported dimension {d}"))),
        };
        let n_nodes = expect_header(&mut lines, "nodes")?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let line = lines.next().ok_or_else(|| err("truncated node table"))?;
            let vals: Vec<&str> = line.split_whitespace().collect();
            if vals.len() != 3 {
                return Err(err("node rows are 'id x y'"));
            }
            let x: f64 = vals[1].parse().map_err(|_| err("bad node coordinate"))?;
            let y: f64 = vals[2].parse().map_err(|_| err("bad node coordinate"))?;
            nodes.push([x, y]);
        }

        let n_elems = expect_header(&mut lines, "elements")?;
        let mut elements = Vec::with_capacity(n_elems);
        for _ in 0..n_elems {
            let line = lines.next().ok_or_else(|| err("truncated element table"))?;
            let ids: Vec<usize> = line
                .split_whitespace()
                .skip(1)
                .map(|v| v.parse().map_err(|_| err("bad node id")))
                .collect::<Result<_, _>>()?;
            let want = match dim {
                Dim::One => 2,
                Dim::Two => 4,
            };
            if ids.len() != want || ids.iter().any(|&i| i >= nodes.len()) {
                return Err(err("bad element row"));
            }
            let (hx, hy, origin) = match dim {
                Dim::One => (nodes[ids[1]][0] - nodes[ids[0]][0], 0.0, nodes[ids[0]]),
                Dim::Two => (
                    nodes[ids[1]][0] - nodes[ids[0]][0],
                    nodes[ids[3]][1] - nodes[ids[0]][1],
                    nodes[ids[0]],
                ),
            };
            if !(hx > 0.0) || (dim == Dim::Two && !(hy > 0.0)) {
                return Err(MeshError::DegenerateElement { hx, hy });
            }
            let mut node_ids = [usize::MAX; 4];
            node_ids[..ids.len()].copy_from_slice(&ids);
            elements.push(Element {
                nodes: node_ids,
                origin,
                hx,
                hy,
            });
        }

        let x_lines = sorted_coords(nodes.iter().map(|n| n[0]));
        let y_lines = match dim {
            Dim::One => vec![0.0],
            Dim::Two => sorted_coords(nodes.iter().map(|n| n[1])),
        };
        let n_cells_x = x_lines.len().saturating_sub(1).max(1);
        let n_cells_y = y_lines.len().saturating_sub(1).max(1);
        let mut cell_map = vec![None; n_cells_x * n_cells_y];
        for (eid, e) in elements.iter().enumerate() {
            let cx = e.origin[0] + 0.5 * e.hx;
            let cy = e.origin[1] + 0.5 * e.hy;
            let ix = lookup_cell(&x_lines, cx).ok_or_else(|| err("element outside grid"))?;
            let iy = match dim {
                Dim::One => 0,
                Dim::Two => lookup_cell(&y_lines, cy).ok_or_else(|| err("element outside grid"))?,
            };
            cell_map[iy * n_cells_x + ix] = Some(eid);
        }

        let mut mesh = Self {
            dim,
            nodes,
            elements,
            constraints: Vec::new(),
            node_class: Vec::new(),
            boundary: Vec::new(),
            x_lines,
            y_lines,
            cell_map,
        };
        match dim {
            Dim::One => {
                mesh.node_class = vec![NodeClass::Internal; mesh.nodes.len()];
                if let Some(c) = mesh.node_class.first_mut() {
                    *c = NodeClass::Edge;
                }
                if let Some(c) = mesh.node_class.last_mut() {
                    *c = NodeClass::Edge;
                }
            }
            Dim::Two => mesh.classify_and_constrain(),
        }
        // The text format carries the resolved constraints; they replace
        // whatever the classifier derived (it has no boundary conditions).
        mesh.constraints.clear();

        let n_edges = expect_header(&mut lines, "edges")?;
        for _ in 0..n_edges {
            let line = lines.next().ok_or_else(|| err("truncated edge table"))?;
            let vals: Vec<&str> = line.split_whitespace().collect();
            if vals.len() != 3 {
                return Err(err("edge rows are 'a b axis'"));
            }
            let a: usize = vals[0].parse().map_err(|_| err("bad edge node"))?;
            let b: usize = vals[1].parse().map_err(|_| err("bad edge node"))?;
            let axis = match vals[2] {
                "x" => Axis::X,
                "y" => Axis::Y,
                _ => return Err(err("edge axis must be x or y")),
            };
            let (element, side) = mesh
                .find_owner(a, b)
                .ok_or_else(|| err("edge does not lie on any element"))?;
            let pa = mesh.nodes[a];
            let pb = mesh.nodes[b];
            let length = match axis {
                Axis::X => (pb[0] - pa[0]).abs(),
                Axis::Y => (pb[1] - pa[1]).abs(),
            };
            mesh.constraints.push(Constraint::Edge(EdgeElement {
                nodes: [a, b],
                axis,
                length,
                element,
                side,
            }));
        }
        let n_points = expect_header(&mut lines, "points")?;
        for _ in 0..n_points {
            let line = lines.next().ok_or_else(|| err("truncated point table"))?;
            let node: usize = line.trim().parse().map_err(|_| err("bad point node"))?;
            if node >= mesh.nodes.len() {
                return Err(err("point constraint out of range"));
            }
            mesh.constraints.push(Constraint::Point { node });
        }
        Ok(mesh)
    }

    /// Element owning the edge (a, b) together with the side it lies on.
    fn find_owner(&self, a: usize, b: usize) -> Option<(usize, ElementSide)> {
        let key = ordered(a, b);
        let sides = [
            (ElementSide::South, 0, 1),
            (ElementSide::East, 1, 2),
            (ElementSide::North, 3, 2),
            (ElementSide::West, 0, 3),
        ];
        for (eid, elem) in self.elements.iter().enumerate() {
            for &(side, i, j) in &sides {
                if ordered(elem.nodes[i], elem.nodes[j]) == key {
                    return Some((eid, side));
                }
            }
        }
        None
    }
}

fn sorted_coords(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    v
}

fn expect_header<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    name: &str,
) -> Result<usize, MeshError> {
    let line = lines
        .next()
        .ok_or_else(|| MeshError::Parse("unexpected end of input".into()))?;
    let mut it = line.split_whitespace();
    let key = it
        .next()
        .ok_or_else(|| MeshError::Parse("empty header".into()))?;
    if key != name {
        return Err(MeshError::Parse(format!("expected '{name}', got '{key}'")));
    }
    it.next()
        .ok_or_else(|| MeshError::Parse("missing count".into()))?
        .parse()
        .map_err(|_| MeshError::Parse("bad count".into()))
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn check_lines(lines: &[f64]) -> Result<(), MeshError> {
    if lines.len() < 2 || lines.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MeshError::BadGridLines);
    }
    Ok(())
}

fn tolerance(lines: &[f64]) -> f64 {
    let span = (lines.last().unwrap() - lines[0]).abs();
    1e-9 * span.max(1.0)
}

/// Index of the grid cell containing `x`, inclusive of the outer boundary.
fn lookup_cell(lines: &[f64], x: f64) -> Option<usize> {
    let tol = tolerance(lines);
    if x < lines[0] - tol || x > *lines.last().unwrap() + tol {
        return None;
    }
    let m = lines.len() - 1;
    // Binary search for the last line ≤ x.
    let idx = match lines.binary_search_by(|l| l.partial_cmp(&x).unwrap()) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    };
    Some(idx.min(m - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ss() -> RectBoundary {
        RectBoundary::simply_supported()
    }

    #[test]
    fn uniform_mesh_counts_and_classification() {
        let m = Mesh::uniform_rect(0.5, 0.5, 4, 4, ss()).unwrap();
        assert_eq!(m.nodes.len(), 25);
        assert_eq!(m.elements.len(), 16);
        let edge = m
            .node_class
            .iter()
            .filter(|c| **c == NodeClass::Edge)
            .count();
        assert_eq!(edge, 16);
        assert_eq!(m.nodes.len() - edge, 9);
        // All four sides constrained: 16 edge elements.
        assert_eq!(m.edge_constraints().count(), 16);
    }

    #[test]
    fn single_element_grid() {
        let m = Mesh::uniform_rect(1.0, 1.0, 1, 1, ss()).unwrap();
        assert_eq!(m.nodes.len(), 4);
        assert_eq!(m.elements.len(), 1);
    }

    #[test]
    fn gridline_mesh_matches_paper_setup() {
        let l = 0.5;
        let lines: Vec<f64> = [0.0, 0.25, 0.4, 0.7, 1.0].iter().map(|t| t * l).collect();
        let m = Mesh::from_grid_lines(lines.clone(), lines, ss()).unwrap();
        assert_eq!(m.elements.len(), 16);
        let mut hs: Vec<f64> = m.elements.iter().map(|e| e.hx).collect();
        hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(hs[0], 0.15 * l, max_relative = 1e-12);
        assert_relative_eq!(*hs.last().unwrap(), 0.3 * l, max_relative = 1e-12);
        // First cell is 0.25L x 0.25L.
        assert_relative_eq!(m.elements[0].hx, 0.25 * l, max_relative = 1e-12);
        assert_relative_eq!(m.elements[0].hy, 0.25 * l, max_relative = 1e-12);
    }

    #[test]
    fn equal_gridlines_reduce_to_uniform() {
        let lines: Vec<f64> = (0..=4).map(|i| 0.5 * i as f64 / 4.0).collect();
        let a = Mesh::from_grid_lines(lines.clone(), lines, ss()).unwrap();
        let b = Mesh::uniform_rect(0.5, 0.5, 4, 4, ss()).unwrap();
        assert_eq!(a.nodes.len(), b.nodes.len());
        for (na, nb) in a.nodes.iter().zip(&b.nodes) {
            assert_relative_eq!(na[0], nb[0], epsilon = 1e-15);
            assert_relative_eq!(na[1], nb[1], epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_gridlines() {
        assert!(Mesh::from_grid_lines(vec![0.0, 0.0, 1.0], vec![0.0, 1.0], ss()).is_err());
        assert!(Mesh::from_grid_lines(vec![0.0, 0.5, 0.4], vec![0.0, 1.0], ss()).is_err());
        assert!(Mesh::uniform_rect(0.0, 1.0, 2, 2, ss()).is_err());
        assert!(Mesh::uniform_rect(1.0, 1.0, 0, 2, ss()).is_err());
    }

    #[test]
    fn l_shape_counts() {
        let m = Mesh::l_shaped(0.5, 4).unwrap();
        assert_eq!(m.elements.len(), 12);
        assert_eq!(m.nodes.len(), 21);
        assert!(Mesh::l_shaped(0.5, 3).is_err());
        // Re-entrant corner is an edge node.
        let corner = m
            .nodes
            .iter()
            .position(|n| (n[0] - 0.25).abs() < 1e-12 && (n[1] - 0.25).abs() < 1e-12)
            .unwrap();
        assert_eq!(m.node_class[corner], NodeClass::Edge);
        // Simply supported only along the two long edges: 4 + 4 edge elements.
        assert_eq!(m.edge_constraints().count(), 8);
        for e in m.edge_constraints() {
            let pa = m.nodes[e.nodes[0]];
            let pb = m.nodes[e.nodes[1]];
            assert!(
                (pa[1].abs() < 1e-12 && pb[1].abs() < 1e-12)
                    || (pa[0].abs() < 1e-12 && pb[0].abs() < 1e-12)
            );
        }
    }

    #[test]
    fn refinement() {
        let m = Mesh::uniform_rect(0.5, 0.5, 4, 4, ss()).unwrap();
        let r = m.refined();
        assert_eq!(r.elements.len(), 64);
        assert_relative_eq!(r.domain_area(), m.domain_area(), max_relative = 1e-14);
        // Parent nodes survive with identical coordinates.
        for n in &m.nodes {
            assert!(r
                .nodes
                .iter()
                .any(|rn| (rn[0] - n[0]).abs() < 1e-15 && (rn[1] - n[1]).abs() < 1e-15));
        }
        // Refining twice equals a 4x4 split of each parent element.
        let rr = r.refined();
        let direct = Mesh::uniform_rect(0.5, 0.5, 16, 16, ss()).unwrap();
        assert_eq!(rr.nodes.len(), direct.nodes.len());
        assert_eq!(rr.elements.len(), direct.elements.len());
    }

    #[test]
    fn l_shape_refinement_keeps_shape() {
        let m = Mesh::l_shaped(0.5, 4).unwrap();
        let r = m.refined();
        assert_eq!(r.elements.len(), 48);
        assert_relative_eq!(r.domain_area(), m.domain_area(), max_relative = 1e-13);
    }

    #[test]
    fn area_sums_to_domain_area() {
        let m = Mesh::uniform_rect(0.5, 0.7, 5, 3, ss()).unwrap();
        assert_relative_eq!(m.domain_area(), 0.35, max_relative = 1e-13);
        let l = Mesh::l_shaped(0.5, 4).unwrap();
        assert_relative_eq!(l.domain_area(), 0.25 * 0.75, max_relative = 1e-13);
    }

    #[test]
    fn edge_elements_are_consecutive_boundary_segments() {
        let m = Mesh::uniform_rect(0.5, 0.5, 4, 4, ss()).unwrap();
        for e in m.edge_constraints() {
            let pa = m.nodes[e.nodes[0]];
            let pb = m.nodes[e.nodes[1]];
            match e.axis {
                Axis::X => {
                    assert!((pa[1] - pb[1]).abs() < 1e-12);
                    assert_relative_eq!((pb[0] - pa[0]).abs(), 0.125, max_relative = 1e-12);
                }
                Axis::Y => {
                    assert!((pa[0] - pb[0]).abs() < 1e-12);
                    assert_relative_eq!((pb[1] - pa[1]).abs(), 0.125, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn interval_mesh_and_constraints() {
        let m = Mesh::interval(
            0.5,
            4,
            BoundaryCondition::SimplySupported,
            BoundaryCondition::SimplySupported,
        )
        .unwrap();
        assert_eq!(m.nodes.len(), 5);
        assert_eq!(m.elements.len(), 4);
        assert_eq!(m.constraints.len(), 2);
        let r = m.refined();
        assert_eq!(r.elements.len(), 8);
        assert_eq!(r.constraints.len(), 2);
    }

    #[test]
    fn locate_points() {
        let m = Mesh::uniform_rect(1.0, 1.0, 4, 4, ss()).unwrap();
        assert_eq!(m.locate(0.1, 0.1), Some(0));
        assert!(m.locate(0.99, 0.99).is_some());
        assert!(m.locate(1.2, 0.5).is_none());
        let l = Mesh::l_shaped(1.0, 4).unwrap();
        assert!(l.locate(0.9, 0.9).is_none());
        assert!(l.locate(0.9, 0.1).is_some());
    }

    #[test]
    fn text_round_trip() {
        for m in [
            Mesh::uniform_rect(1.0, 0.8, 3, 2, ss()).unwrap(),
            Mesh::l_shaped(0.5, 4).unwrap(),
            Mesh::interval(
                0.5,
                4,
                BoundaryCondition::SimplySupported,
                BoundaryCondition::Free,
            )
            .unwrap(),
        ] {
            let text = m.to_text();
            let back = Mesh::from_text(&text).unwrap();
            assert_eq!(back.nodes.len(), m.nodes.len());
            assert_eq!(back.elements.len(), m.elements.len());
            assert_eq!(back.constraints.len(), m.constraints.len());
            for (a, b) in back.nodes.iter().zip(&m.nodes) {
                assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
            }
            for (eid, (a, b)) in back.elements.iter().zip(&m.elements).enumerate() {
                assert_eq!(a.nodes, b.nodes, "element {eid}");
            }
            assert!(back.locate(0.1, 0.1).is_some());
        }
        assert!(Mesh::from_text("dim 7\n").is_err());
        assert!(Mesh::from_text("nodes 1\n").is_err());
    }

    #[test]
    fn text_export_contains_tables() {
        let m = Mesh::uniform_rect(1.0, 1.0, 2, 2, ss()).unwrap();
        let text = m.to_text();
        assert!(text.contains("nodes 9"));
        assert!(text.contains("elements 4"));
        assert!(text.contains("edges 8"));
    }
}
