//! Node-attached enrichment families: complete polynomial sets, propagating
//! plane flexural waves, their hybrid unions, and the edge multiplier basis.
//!
//! All enrichment functions are anchored at their node: they are evaluated
//! in the local offsets x̃ = x − x_i, ỹ = y − y_i and equal one (constant
//! term, waves) or zero (higher monomials) at the node itself.

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{hermite_w, BasisEval};
use crate::material::{Frequency, PlateMaterial};
use crate::mesh::{Dim, NodeClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("1D meshes support exactly zero or two propagating waves, got {0}")]
    BadWaveCount1d(usize),
    #[error("multiplier expansion needs at least one term")]
    EmptyMultiplier,
}

/// Per-node enrichment selection: polynomial order (optionally split between
/// boundary and internal nodes), number of plane waves, the common deflection
/// applied to all propagation angles, and the multiplier expansion order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnrichmentPlan {
    pub polynomial_order_edge: usize,
    pub polynomial_order_internal: usize,
    pub wave_count: usize,
    pub deflection_angle: f64,
    /// Number of multiplier polynomial terms per edge node; `None` resolves
    /// to p+8 for hybrid plans and p for pure polynomial plans.
    pub multiplier_terms: Option<usize>,
}

/// Default deflection keeping wave directions off the plate axes.
pub const DEFAULT_DEFLECTION: f64 = std::f64::consts::PI / 50.0;

impl EnrichmentPlan {
    /// Pure polynomial enrichment of order `p` (q = 0).
    pub fn polynomial(p: usize) -> Self {
        Self {
            polynomial_order_edge: p,
            polynomial_order_internal: p,
            wave_count: 0,
            deflection_angle: DEFAULT_DEFLECTION,
            multiplier_terms: None,
        }
    }

    /// Hybrid enrichment: `q` plane waves plus complete polynomials of
    /// order `p`. In 1D, `q` must be 0 or 2.
    pub fn hybrid(p: usize, q: usize) -> Self {
        Self {
            polynomial_order_edge: p,
            polynomial_order_internal: p,
            wave_count: q,
            deflection_angle: DEFAULT_DEFLECTION,
            multiplier_terms: None,
        }
    }

    /// Hybrid plan with a reduced polynomial order at internal nodes.
    pub fn adaptive(p_edge: usize, p_internal: usize, q: usize) -> Self {
        Self {
            polynomial_order_edge: p_edge,
            polynomial_order_internal: p_internal,
            wave_count: q,
            deflection_angle: DEFAULT_DEFLECTION,
            multiplier_terms: None,
        }
    }

    pub fn with_multiplier_terms(mut self, n: usize) -> Self {
        self.multiplier_terms = Some(n);
        self
    }

    pub fn with_deflection(mut self, angle: f64) -> Self {
        self.deflection_angle = angle;
        self
    }

    pub fn polynomial_order(&self, class: NodeClass) -> usize {
        match class {
            NodeClass::Edge => self.polynomial_order_edge,
            NodeClass::Internal => self.polynomial_order_internal,
        }
    }

    /// Resolved multiplier term count N_i: explicit value, or p+8 for wave
    /// plans and p (at least one) for pure polynomial plans.
    pub fn resolved_multiplier_terms(&self) -> Result<usize, PlanError> {
        let n = match self.multiplier_terms {
            Some(n) => n,
            None if self.wave_count > 0 => self.polynomial_order_edge + 8,
            None => self.polynomial_order_edge.max(1),
        };
        if n == 0 {
            return Err(PlanError::EmptyMultiplier);
        }
        Ok(n)
    }

    /// Number of enrichment functions attached to a node of the given class.
    pub fn terms_per_node(&self, dim: Dim, class: NodeClass) -> usize {
        let p = self.polynomial_order(class);
        match dim {
            Dim::One => self.wave_count.min(2) + p + 1,
            Dim::Two => self.wave_count + (p + 1) * (p + 2) / 2,
        }
    }

    pub fn validate(&self, dim: Dim) -> Result<(), PlanError> {
        if dim == Dim::One && !matches!(self.wave_count, 0 | 2) {
            return Err(PlanError::BadWaveCount1d(self.wave_count));
        }
        self.resolved_multiplier_terms().map(|_| ())
    }
}

/// A single enrichment function in node-local offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnrichmentFn {
    /// x̃^ax · ỹ^ay
    Monomial { ax: u32, ay: u32 },
    /// exp[j(k_x x̃ + k_y ỹ)]
    PlaneWave { kx: f64, ky: f64 },
}

impl EnrichmentFn {
    /// Value and physical derivatives through second order at offsets
    /// (x̃, ỹ) from the anchor node.
    pub fn eval(&self, dx: f64, dy: f64) -> BasisEval<Complex64> {
        match *self {
            EnrichmentFn::Monomial { ax, ay } => {
                let (v_x, d1_x, d2_x) = monomial_1d(dx, ax);
                let (v_y, d1_y, d2_y) = monomial_1d(dy, ay);
                BasisEval {
                    value: (v_x * v_y).into(),
                    dx: (d1_x * v_y).into(),
                    dy: (v_x * d1_y).into(),
                    dxx: (d2_x * v_y).into(),
                    dxy: (d1_x * d1_y).into(),
                    dyy: (v_x * d2_y).into(),
                }
            }
            EnrichmentFn::PlaneWave { kx, ky } => {
                let phase = Complex64::new(0.0, kx * dx + ky * dy).exp();
                let jkx = Complex64::new(0.0, kx);
                let jky = Complex64::new(0.0, ky);
                BasisEval {
                    value: phase,
                    dx: jkx * phase,
                    dy: jky * phase,
                    dxx: jkx * jkx * phase,
                    dxy: jkx * jky * phase,
                    dyy: jky * jky * phase,
                }
            }
        }
    }
}

fn monomial_1d(x: f64, a: u32) -> (f64, f64, f64) {
    let af = a as f64;
    let v = x.powi(a as i32);
    let d1 = if a >= 1 { af * x.powi(a as i32 - 1) } else { 0.0 };
    let d2 = if a >= 2 {
        af * (af - 1.0) * x.powi(a as i32 - 2)
    } else {
        0.0
    };
    (v, d1, d2)
}

/// Complete 2D polynomial exponent set up to order `p` in graded
/// lexicographic order: 1; x̃, ỹ; x̃², x̃ỹ, ỹ²; …
/// The count is the Pascal-triangle number (p+1)(p+2)/2.
pub fn polynomial_exponents_2d(p: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity((p + 1) * (p + 2) / 2);
    for degree in 0..=p as u32 {
        for ax in (0..=degree).rev() {
            out.push((ax, degree - ax));
        }
    }
    out
}

/// Plane-wave directions: α_n = 2πn/q + deflection, n = 1..q, so all
/// (k_x, k_y) = k(cos α_n, sin α_n) satisfy (k_x² + k_y²)² = k⁴.
pub fn wave_directions(q: usize, k: f64, deflection: f64) -> Vec<(f64, f64)> {
    (1..=q)
        .map(|n| {
            let alpha = 2.0 * std::f64::consts::PI * n as f64 / q as f64 + deflection;
            (k * alpha.cos(), k * alpha.sin())
        })
        .collect()
}

/// Evaluated polynomial basis rows (the standalone operation; assembly goes
/// through [`node_terms`] instead).
pub fn polynomial_basis(
    p: usize,
    dx: f64,
    dy: f64,
    dim: Dim,
) -> Vec<BasisEval<Complex64>> {
    match dim {
        Dim::One => (0..=p as u32)
            .map(|ax| EnrichmentFn::Monomial { ax, ay: 0 }.eval(dx, 0.0))
            .collect(),
        Dim::Two => polynomial_exponents_2d(p)
            .into_iter()
            .map(|(ax, ay)| EnrichmentFn::Monomial { ax, ay }.eval(dx, dy))
            .collect(),
    }
}

/// Evaluated plane-wave basis rows for `q` evenly distributed directions.
pub fn plane_wave_basis(
    q: usize,
    k: f64,
    deflection: f64,
    dx: f64,
    dy: f64,
) -> Vec<BasisEval<Complex64>> {
    wave_directions(q, k, deflection)
        .into_iter()
        .map(|(kx, ky)| EnrichmentFn::PlaneWave { kx, ky }.eval(dx, dy))
        .collect()
}

/// Ordered enrichment descriptors for one node: waves first, then the
/// polynomial set. The ordering is deterministic for a given plan.
pub fn node_terms(
    plan: &EnrichmentPlan,
    dim: Dim,
    class: NodeClass,
    material: &PlateMaterial,
    frequency: Frequency,
) -> Vec<EnrichmentFn> {
    let p = plan.polynomial_order(class);
    let mut terms = Vec::with_capacity(plan.terms_per_node(dim, class));
    match dim {
        Dim::One => {
            if plan.wave_count > 0 {
                let k = material.flexural_wavenumber(frequency);
                terms.push(EnrichmentFn::PlaneWave { kx: k, ky: 0.0 });
                terms.push(EnrichmentFn::PlaneWave { kx: -k, ky: 0.0 });
            }
            terms.extend((0..=p as u32).map(|ax| EnrichmentFn::Monomial { ax, ay: 0 }));
        }
        Dim::Two => {
            if plan.wave_count > 0 {
                let k = material.flexural_wavenumber(frequency);
                terms.extend(
                    wave_directions(plan.wave_count, k, plan.deflection_angle)
                        .into_iter()
                        .map(|(kx, ky)| EnrichmentFn::PlaneWave { kx, ky }),
                );
            }
            terms.extend(
                polynomial_exponents_2d(p)
                    .into_iter()
                    .map(|(ax, ay)| EnrichmentFn::Monomial { ax, ay }),
            );
        }
    }
    terms
}

/// Multiplier basis over a two-node edge element: Λ is expanded as
/// Σ_i H_i^w(ξ) Σ_l C_i^l t̃_i^l with l = 0..N_i−1 and t̃_i the tangential
/// offset from edge node i. Returns the 2·N_i values ordered node-major.
pub fn multiplier_basis(n_terms: usize, xi: f64, edge_length: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * n_terms);
    for node in 0..2 {
        let pu = hermite_w(node, xi)[0];
        // Tangential coordinate measured from this node.
        let t = 0.5 * (xi - crate::basis::NODE_COORDS_1D[node]) * edge_length;
        let mut power = 1.0;
        for _ in 0..n_terms {
            out.push(pu * power);
            power *= t;
        }
    }
    out
}
