//! Reference-element machinery on the square `[-1,1]²`.
//!
//! Kinematic fields live in the continuous `Q^m` space with nodes at the
//! tensor Gauss–Lobatto points; thermodynamic fields live in the
//! discontinuous `Q^{m-1}` space with nodes at the tensor Gauss–Legendre
//! points. Every 2D ordering in the crate is row-major with the first
//! reference axis varying fastest: index `a + n * b` for point `(x_a, x_b)`.

use crate::error::{Result, SghError};
use crate::linalg::Vec2;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    GaussLegendre,
    GaussLobatto,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    /// Points per reference axis.
    pub n1d: usize,
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over the reference square.
    pub fn integrate(&self, f: impl Fn(Vec2) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // P_n'(±1) = (±1)^{n+1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// 1D Gauss–Legendre points (ascending) and weights on `[-1,1]`.
pub fn gauss_legendre_1d(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 1 {
        return Err(SghError::InvalidOrder {
            got: n,
            expected: "n >= 1 Gauss-Legendre points",
        });
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        // Chebyshev-like initial guess, descending in i
        let mut xi = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre(n, xi);
            let dx = p / dp;
            xi -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        let (_, dp) = legendre(n, xi);
        x[n - 1 - i] = xi;
        w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// 1D Gauss–Lobatto points (ascending, endpoints included) and weights.
pub fn gauss_lobatto_1d(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(SghError::InvalidOrder {
            got: n,
            expected: "n >= 2 Gauss-Lobatto points",
        });
    }
    let deg = n - 1;
    let degf = deg as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut xi = -(std::f64::consts::PI * i as f64 / degf).cos();
        if i > 0 && i < deg {
            // interior points are the roots of P'_deg
            for _ in 0..NEWTON_MAX_ITER {
                let (p, dp) = legendre(deg, xi);
                // d/dx P'_deg from the Legendre ODE: (1-x²)P'' = 2xP' - n(n+1)P
                let d2p = (2.0 * xi * dp - degf * (degf + 1.0) * p) / (1.0 - xi * xi);
                let dx = dp / d2p;
                xi -= dx;
                if dx.abs() < NEWTON_TOL {
                    break;
                }
            }
        }
        let (p, _) = legendre(deg, xi);
        x[i] = xi;
        w[i] = 2.0 / (degf * (degf + 1.0) * p * p);
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

fn tensor_rule(kind: RuleKind, x: &[f64], w: &[f64]) -> QuadratureRule {
    let n = x.len();
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for b in 0..n {
        for a in 0..n {
            points.push([x[a], x[b]]);
            weights.push(w[a] * w[b]);
        }
    }
    QuadratureRule {
        kind,
        n1d: n,
        points,
        weights,
    }
}

pub fn gauss_legendre_2d(n: usize) -> Result<QuadratureRule> {
    let (x, w) = gauss_legendre_1d(n)?;
    Ok(tensor_rule(RuleKind::GaussLegendre, &x, &w))
}

pub fn gauss_lobatto_2d(n: usize) -> Result<QuadratureRule> {
    let (x, w) = gauss_lobatto_1d(n)?;
    Ok(tensor_rule(RuleKind::GaussLobatto, &x, &w))
}

/// 1D Lagrange interpolation basis on a set of distinct nodes.
#[derive(Debug, Clone)]
pub struct Lagrange1d {
    nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl Lagrange1d {
    pub fn new(nodes: Vec<f64>) -> Self {
        let denom = (0..nodes.len())
            .map(|i| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &xj)| nodes[i] - xj)
                    .product()
            })
            .collect();
        Self { nodes, denom }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        (0..self.nodes.len())
            .map(|i| {
                let num: f64 = self
                    .nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &xj)| x - xj)
                    .product();
                num / self.denom[i]
            })
            .collect()
    }

    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let mut sum = 0.0;
                for k in 0..n {
                    if k == i {
                        continue;
                    }
                    let mut prod = 1.0;
                    for j in 0..n {
                        if j != i && j != k {
                            prod *= x - self.nodes[j];
                        }
                    }
                    sum += prod;
                }
                sum / self.denom[i]
            })
            .collect()
    }
}

/// Tensor-product Lagrange basis `L_a(ξ) L_b(η)`, index `a + n * b`.
#[derive(Debug, Clone)]
pub struct TensorBasis {
    line: Lagrange1d,
}

impl TensorBasis {
    pub fn new(nodes_1d: Vec<f64>) -> Self {
        Self {
            line: Lagrange1d::new(nodes_1d),
        }
    }

    pub fn len(&self) -> usize {
        self.line.len() * self.line.len()
    }

    pub fn is_empty(&self) -> bool {
        self.line.is_empty()
    }

    pub fn nodes(&self) -> Vec<Vec2> {
        let x = self.line.nodes();
        let mut out = Vec::with_capacity(self.len());
        for &xb in x {
            for &xa in x {
                out.push([xa, xb]);
            }
        }
        out
    }

    pub fn values(&self, p: Vec2) -> Vec<f64> {
        let lx = self.line.values(p[0]);
        let ly = self.line.values(p[1]);
        let mut out = Vec::with_capacity(self.len());
        for &vb in &ly {
            for &va in &lx {
                out.push(va * vb);
            }
        }
        out
    }

    pub fn gradients(&self, p: Vec2) -> Vec<Vec2> {
        let lx = self.line.values(p[0]);
        let ly = self.line.values(p[1]);
        let dx = self.line.derivatives(p[0]);
        let dy = self.line.derivatives(p[1]);
        let n = self.line.len();
        let mut out = Vec::with_capacity(self.len());
        for b in 0..n {
            for a in 0..n {
                out.push([dx[a] * ly[b], lx[a] * dy[b]]);
            }
        }
        out
    }
}

/// Shape-function values and reference gradients tabulated at the points of
/// one quadrature rule.
#[derive(Debug, Clone)]
pub struct RuleTable {
    pub rule: QuadratureRule,
    n_kin: usize,
    n_thermo: usize,
    shape: Vec<f64>,
    grad: Vec<Vec2>,
    phi: Vec<f64>,
}

impl RuleTable {
    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn weight(&self, q: usize) -> f64 {
        self.rule.weights[q]
    }

    /// Kinematic shape values `N_i(ξ_q)` for all `i`.
    pub fn shape(&self, q: usize) -> &[f64] {
        &self.shape[q * self.n_kin..(q + 1) * self.n_kin]
    }

    /// Reference gradients `∇̂N_i(ξ_q)` for all `i`.
    pub fn grad(&self, q: usize) -> &[Vec2] {
        &self.grad[q * self.n_kin..(q + 1) * self.n_kin]
    }

    /// Thermodynamic shape values `φ_k(ξ_q)` for all `k`.
    pub fn phi(&self, q: usize) -> &[f64] {
        &self.phi[q * self.n_thermo..(q + 1) * self.n_thermo]
    }
}

/// Dense row-major matrix mapping values at the `m²` thermodynamic points
/// to the `(m+1)²` Gauss–Legendre points.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl InterpMatrix {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BasisSet {
    pub order: usize,
    kin: TensorBasis,
    thermo: TensorBasis,
    pub kin_nodes: Vec<Vec2>,
    pub thermo_nodes: Vec<Vec2>,
    /// `m²`-point Gauss–Legendre rule (collocated with thermodynamic DOFs).
    pub low: RuleTable,
    /// `(m+1)²`-point Gauss–Legendre rule used for hourglass and viscosity.
    pub high: RuleTable,
    /// `(m+1)²`-point Gauss–Lobatto rule (collocated with kinematic DOFs).
    pub lobatto: RuleTable,
    pub interp: InterpMatrix,
}

impl BasisSet {
    pub fn n_kin(&self) -> usize {
        self.kin.len()
    }

    pub fn n_thermo(&self) -> usize {
        self.thermo.len()
    }

    pub fn kin_values(&self, p: Vec2) -> Vec<f64> {
        self.kin.values(p)
    }

    pub fn kin_gradients(&self, p: Vec2) -> Vec<Vec2> {
        self.kin.gradients(p)
    }

    pub fn thermo_values(&self, p: Vec2) -> Vec<f64> {
        self.thermo.values(p)
    }

    /// Tabulates both bases at the points of `rule`.
    pub fn table(&self, rule: QuadratureRule) -> RuleTable {
        let (nk, nt) = (self.n_kin(), self.n_thermo());
        let mut shape = Vec::with_capacity(rule.len() * nk);
        let mut grad = Vec::with_capacity(rule.len() * nk);
        let mut phi = Vec::with_capacity(rule.len() * nt);
        for &p in &rule.points {
            shape.extend(self.kin.values(p));
            grad.extend(self.kin.gradients(p));
            phi.extend(self.thermo.values(p));
        }
        RuleTable {
            rule,
            n_kin: nk,
            n_thermo: nt,
            shape,
            grad,
            phi,
        }
    }

    /// Values at the high-order points of the degree `m-1` tensor basis whose
    /// nodes are equispaced and include the element corners (the bilinear
    /// corner basis for `m = 2`). Row-major `(m+1)² × m²`.
    pub fn closed_thermo_at_high(&self) -> InterpMatrix {
        let m = self.order;
        let nodes: Vec<f64> = if m == 1 {
            vec![0.0]
        } else {
            (0..m)
                .map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64)
                .collect()
        };
        let closed = TensorBasis::new(nodes);
        let mut data = Vec::with_capacity(self.high.len() * self.n_thermo());
        for &p in &self.high.rule.points {
            data.extend(closed.values(p));
        }
        InterpMatrix {
            rows: self.high.len(),
            cols: self.n_thermo(),
            data,
        }
    }
}

pub fn build_interp_matrix(m: usize) -> Result<InterpMatrix> {
    if m < 1 {
        return Err(SghError::InvalidOrder {
            got: m,
            expected: "order m >= 1",
        });
    }
    let (gl, _) = gauss_legendre_1d(m)?;
    let thermo = TensorBasis::new(gl);
    let high = gauss_legendre_2d(m + 1)?;
    let mut data = Vec::with_capacity(high.len() * thermo.len());
    for &p in &high.points {
        data.extend(thermo.values(p));
    }
    Ok(InterpMatrix {
        rows: high.len(),
        cols: thermo.len(),
        data,
    })
}

pub fn build_basis(m: usize) -> Result<BasisSet> {
    if m < 1 {
        return Err(SghError::InvalidOrder {
            got: m,
            expected: "order m >= 1",
        });
    }
    let (lob, _) = gauss_lobatto_1d(m + 1)?;
    let (gl, _) = gauss_legendre_1d(m)?;
    let kin = TensorBasis::new(lob);
    let thermo = TensorBasis::new(gl);
    let kin_nodes = kin.nodes();
    let thermo_nodes = thermo.nodes();

    // Tables need a BasisSet to evaluate against; build with placeholders first.
    let empty = |kind| RuleTable {
        rule: QuadratureRule {
            kind,
            n1d: 0,
            points: Vec::new(),
            weights: Vec::new(),
        },
        n_kin: 0,
        n_thermo: 0,
        shape: Vec::new(),
        grad: Vec::new(),
        phi: Vec::new(),
    };
    let mut basis = BasisSet {
        order: m,
        kin,
        thermo,
        kin_nodes,
        thermo_nodes,
        low: empty(RuleKind::GaussLegendre),
        high: empty(RuleKind::GaussLegendre),
        lobatto: empty(RuleKind::GaussLobatto),
        interp: build_interp_matrix(m)?,
    };
    basis.low = basis.table(gauss_legendre_2d(m)?);
    basis.high = basis.table(gauss_legendre_2d(m + 1)?);
    basis.lobatto = basis.table(gauss_lobatto_2d(m + 1)?);
    Ok(basis)
}
