//! Cubic Hermite shape functions, their partition-of-unity sub-family, the
//! classical CR plate element basis, and the affine element mapping.
//!
//! Local node numbering is counter-clockwise from (−1, −1):
//! node 0 at (−1,−1), node 1 at (1,−1), node 2 at (1,1), node 3 at (−1,1).
//! In 1D, node 0 sits at ξ=−1 and node 1 at ξ=+1.

use num_complex::Complex64;

use crate::mesh::MeshError;

/// Local corner coordinates (ξ_i, η_i) of the four element nodes.
pub const CORNER_COORDS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

/// Local coordinates ξ_i of the two 1D element nodes.
pub const NODE_COORDS_1D: [f64; 2] = [-1.0, 1.0];

/// Value and derivatives through second order of a scalar basis function.
/// All entries are populated; 1D evaluations leave the η/y slots at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEval<T> {
    pub value: T,
    pub dx: T,
    pub dy: T,
    pub dxx: T,
    pub dxy: T,
    pub dyy: T,
}

impl BasisEval<f64> {
    pub const ZERO: Self = Self {
        value: 0.0,
        dx: 0.0,
        dy: 0.0,
        dxx: 0.0,
        dxy: 0.0,
        dyy: 0.0,
    };

    pub fn lift(self) -> BasisEval<Complex64> {
        BasisEval {
            value: self.value.into(),
            dx: self.dx.into(),
            dy: self.dy.into(),
            dxx: self.dxx.into(),
            dxy: self.dxy.into(),
            dyy: self.dyy.into(),
        }
    }

    /// Product rule through second order: `self · other`.
    pub fn product(&self, other: &BasisEval<Complex64>) -> BasisEval<Complex64> {
        BasisEval {
            value: other.value * self.value,
            dx: other.dx * self.value + other.value * self.dx,
            dy: other.dy * self.value + other.value * self.dy,
            dxx: other.dxx * self.value + other.dx * (2.0 * self.dx) + other.value * self.dxx,
            dxy: other.dxy * self.value
                + other.dx * self.dy
                + other.dy * self.dx
                + other.value * self.dxy,
            dyy: other.dyy * self.value + other.dy * (2.0 * self.dy) + other.value * self.dyy,
        }
    }
}

/// Displacement component of the cubic Hermite pair on [−1, 1]:
/// H_i^w(ξ) = (2 + 3ξ_iξ − ξ_iξ³)/4. Returns (value, d/dξ, d²/dξ²).
///
/// These two functions form a partition of unity and have vanishing
/// derivative at both endpoints, which is what makes the PU expansion C¹.
pub fn hermite_w(node: usize, xi: f64) -> [f64; 3] {
    let s = NODE_COORDS_1D[node];
    [
        (2.0 + 3.0 * s * xi - s * xi * xi * xi) / 4.0,
        (3.0 * s - 3.0 * s * xi * xi) / 4.0,
        (-6.0 * s * xi) / 4.0,
    ]
}

/// Rotation component of the cubic Hermite pair:
/// H_i^θ(ξ) = (−ξ_i − ξ + ξ_iξ² + ξ³)/4. Returns (value, d/dξ, d²/dξ²).
pub fn hermite_theta(node: usize, xi: f64) -> [f64; 3] {
    let s = NODE_COORDS_1D[node];
    [
        (-s - xi + s * xi * xi + xi * xi * xi) / 4.0,
        (-1.0 + 2.0 * s * xi + 3.0 * xi * xi) / 4.0,
        (2.0 * s + 6.0 * xi) / 4.0,
    ]
}

/// 2D partition-of-unity function Ĥ_i^w(ξ,η) = H_i^w(ξ)·H_i^w(η) with all
/// local derivatives through second order.
pub fn pu_2d(node: usize, xi: f64, eta: f64) -> BasisEval<f64> {
    let (sx, sy) = CORNER_COORDS[node];
    let fx = hermite_w(if sx < 0.0 { 0 } else { 1 }, xi);
    let fy = hermite_w(if sy < 0.0 { 0 } else { 1 }, eta);
    BasisEval {
        value: fx[0] * fy[0],
        dx: fx[1] * fy[0],
        dy: fx[0] * fy[1],
        dxx: fx[2] * fy[0],
        dxy: fx[1] * fy[1],
        dyy: fx[0] * fy[2],
    }
}

/// The four CR element shape functions attached to a node, in local
/// derivatives, matching the nodal DOFs [W, θ_y, θ_x, W_xy] with
/// θ_y = −∂W/∂x and θ_x = ∂W/∂y.
pub fn cr_shape_row(node: usize, xi: f64, eta: f64, hx: f64, hy: f64) -> [BasisEval<f64>; 4] {
    let (sx, sy) = CORNER_COORDS[node];
    let ix = if sx < 0.0 { 0 } else { 1 };
    let iy = if sy < 0.0 { 0 } else { 1 };
    let wx = hermite_w(ix, xi);
    let wy = hermite_w(iy, eta);
    let tx = hermite_theta(ix, xi);
    let ty = hermite_theta(iy, eta);
    let tensor = |fx: &[f64; 3], fy: &[f64; 3], scale: f64| BasisEval {
        value: scale * fx[0] * fy[0],
        dx: scale * fx[1] * fy[0],
        dy: scale * fx[0] * fy[1],
        dxx: scale * fx[2] * fy[0],
        dxy: scale * fx[1] * fy[1],
        dyy: scale * fx[0] * fy[2],
    };
    [
        tensor(&wx, &wy, 1.0),
        tensor(&tx, &wy, -hx / 2.0),
        tensor(&wx, &ty, hy / 2.0),
        tensor(&tx, &ty, hx * hy / 4.0),
    ]
}

/// Axis-aligned rectangular element geometry; the mapping to local
/// coordinates is affine with a constant diagonal Jacobian (h_x/2, h_y/2).
/// 1D segments use `hy = 0` and ignore the η direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub origin: [f64; 2],
    pub hx: f64,
    pub hy: f64,
}

impl ElementGeometry {
    pub fn rectangle(origin: [f64; 2], hx: f64, hy: f64) -> Result<Self, MeshError> {
        if !(hx > 0.0) || !(hy > 0.0) {
            return Err(MeshError::DegenerateElement { hx, hy });
        }
        Ok(Self { origin, hx, hy })
    }

    pub fn segment(x0: f64, hx: f64) -> Result<Self, MeshError> {
        if !(hx > 0.0) {
            return Err(MeshError::DegenerateElement { hx, hy: 0.0 });
        }
        Ok(Self {
            origin: [x0, 0.0],
            hx,
            hy: 0.0,
        })
    }

    pub fn is_segment(&self) -> bool {
        self.hy == 0.0
    }

    pub fn map(&self, xi: f64, eta: f64) -> (f64, f64) {
        (
            self.origin[0] + 0.5 * (xi + 1.0) * self.hx,
            self.origin[1] + 0.5 * (eta + 1.0) * self.hy,
        )
    }

    pub fn inverse_map(&self, x: f64, y: f64) -> (f64, f64) {
        let xi = 2.0 * (x - self.origin[0]) / self.hx - 1.0;
        let eta = if self.is_segment() {
            0.0
        } else {
            2.0 * (y - self.origin[1]) / self.hy - 1.0
        };
        (xi, eta)
    }

    /// Measure factor: area h_x·h_y/4 of the local cell (length h_x/2 in 1D).
    pub fn measure_scale(&self) -> f64 {
        if self.is_segment() {
            self.hx / 2.0
        } else {
            self.hx * self.hy / 4.0
        }
    }

    /// Converts local (ξ,η) derivatives to physical (x,y) derivatives:
    /// d/dx = (2/h_x)·d/dξ and so on.
    pub fn to_physical<T: Copy + std::ops::Mul<f64, Output = T>>(
        &self,
        e: BasisEval<T>,
    ) -> BasisEval<T> {
        let ax = 2.0 / self.hx;
        let ay = if self.is_segment() { 0.0 } else { 2.0 / self.hy };
        BasisEval {
            value: e.value,
            dx: e.dx * ax,
            dy: e.dy * ay,
            dxx: e.dxx * (ax * ax),
            dxy: e.dxy * (ax * ay),
            dyy: e.dyy * (ay * ay),
        }
    }
}
