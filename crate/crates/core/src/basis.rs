//! Orthonormal Legendre modal basis on the reference element `[-1, 1]`,
//! Gauss-type quadrature rules, and the L² projections built on them.
//!
//! The basis functions are `phi_n(x) = sqrt((2n + 1) / 2) P_n(x)`, so the
//! reference mass matrix is the identity. On a physical cell of width `dx`
//! the mass matrix is `dx / 2` times the identity, and the projection
//! `P^l` onto polynomials of degree `<= l` is coefficient truncation.
//! Two-dimensional fields use the tensor-product space `Q^k`.

use std::f64::consts::PI;

/// Legendre polynomial `P_n(x)` and `P_{n-1}(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0) * x * p - m * p_prev) / (m + 1.0);
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Orthonormalized Legendre polynomial of the given degree at `x`.
pub fn legendre_eval(degree: usize, x: f64) -> f64 {
    let (p, _) = legendre_pair(degree, x);
    ((2 * degree + 1) as f64 / 2.0).sqrt() * p
}

/// Fills `out[n]` with the orthonormal basis value of degree `n`, for all
/// `n < out.len()`.
pub fn legendre_eval_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let (mut p_prev, mut p) = (0.0, 1.0);
    for (n, slot) in out.iter_mut().enumerate() {
        *slot = ((2 * n + 1) as f64 / 2.0).sqrt() * p;
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
    }
}

/// Quadrature rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `n`-point Gauss-Legendre rule, exact through degree `2n - 1`.
    pub fn gauss(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, p_prev) = legendre_pair(n, x);
                dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (p, p_prev) = legendre_pair(n, x);
            if p != 0.0 {
                dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        symmetrize(&mut nodes, &mut weights);
        Self { nodes, weights }
    }

    /// `n`-point Gauss-Lobatto rule (`n >= 2`), endpoints included, exact
    /// through degree `2n - 3`.
    pub fn gauss_lobatto(n: usize) -> Self {
        assert!(n >= 2, "a Gauss-Lobatto rule needs both endpoints");
        let big_n = n - 1;
        let nn1 = (big_n * (big_n + 1)) as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        nodes[0] = -1.0;
        nodes[n - 1] = 1.0;
        for i in 1..n - 1 {
            // Interior nodes are the roots of P'_N.
            let mut x = -(PI * i as f64 / big_n as f64).cos();
            for _ in 0..100 {
                let (p, p_prev) = legendre_pair(big_n, x);
                let dp = big_n as f64 * (x * p - p_prev) / (x * x - 1.0);
                let d2p = (2.0 * x * dp - nn1 * p) / (1.0 - x * x);
                let step = dp / d2p;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
        }
        for (x, w) in nodes.iter().zip(weights.iter_mut()) {
            let (p, _) = legendre_pair(big_n, *x);
            *w = 2.0 / (nn1 * p * p);
        }
        symmetrize(&mut nodes, &mut weights);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[-1, 1]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integral of `f` over the physical interval `[a, b]`.
    pub fn integrate_on(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|xi| f(mid + half * xi))
    }
}

// Mirror the nodes so the rule is exactly symmetric about 0.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_rule(n: usize) -> QuadratureRule {
    QuadratureRule::gauss(n)
}

/// Gauss points per direction used for degree-`k` volume integrals.
///
/// Exact through degree `3k`, which covers both the pressure part of the
/// volume flux and the bottom source term for polynomial `h` and `b`.
pub fn quadrature_points_for(k: usize) -> usize {
    (k + 1).max((3 * k).div_ceil(2) + 1)
}

/// Modal differentiation matrix in row-major order: `D[m][n]` is the
/// coefficient of `phi_m` in `phi_n'` on the reference element.
pub fn differentiation_matrix(k: usize) -> Vec<f64> {
    let nm = k + 1;
    let mut d = vec![0.0; nm * nm];
    for n in 0..nm {
        for m in (0..n).rev().step_by(2) {
            d[m * nm + n] = (((2 * n + 1) * (2 * m + 1)) as f64).sqrt();
        }
    }
    d
}

fn apply_matrix(d: &[f64], nm: usize, coeffs: &[f64], out: &mut [f64]) {
    for (m, o) in out.iter_mut().enumerate().take(nm) {
        *o = (0..nm).map(|n| d[m * nm + n] * coeffs[n]).sum();
    }
}

/// Polynomial on a 1D reference element in the orthonormal Legendre basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalPoly {
    pub coeffs: Vec<f64>,
}

impl ModalPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a modal polynomial needs at least one mode");
        Self { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![0.0; degree + 1],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value at reference coordinate `xi`.
    pub fn eval(&self, xi: f64) -> f64 {
        eval_modes(&self.coeffs, xi)
    }

    /// Value at physical `x` on the cell `[a, b]`.
    pub fn eval_on(&self, a: f64, b: f64, x: f64) -> f64 {
        self.eval((2.0 * x - a - b) / (b - a))
    }

    /// Cell average on any cell.
    pub fn mean(&self) -> f64 {
        self.coeffs[0] * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Evaluates `sum_m coeffs[m] phi_m(xi)`.
pub fn eval_modes(coeffs: &[f64], xi: f64) -> f64 {
    let (mut p_prev, mut p) = (0.0, 1.0);
    let mut acc = 0.0;
    for (n, &c) in coeffs.iter().enumerate() {
        acc += c * ((2 * n + 1) as f64 / 2.0).sqrt() * p;
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * xi * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
    }
    acc
}

/// L² projection of `f` onto degree-`k` polynomials on the cell `[a, b]`.
pub fn l2_project(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    k: usize,
    rule: &QuadratureRule,
) -> ModalPoly {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut coeffs = vec![0.0; k + 1];
    let mut phi = vec![0.0; k + 1];
    for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
        let fx = f(mid + half * xi);
        legendre_eval_all(xi, &mut phi);
        for (c, p) in coeffs.iter_mut().zip(&phi) {
            *c += w * fx * p;
        }
    }
    ModalPoly { coeffs }
}

/// `P^l p` with the convention `P^{-1} = P^0`; a no-op when `l >= deg p`.
pub fn truncate_projection(p: &ModalPoly, level: isize) -> ModalPoly {
    let keep = level.max(0) as usize;
    let mut out = p.clone();
    for c in out.coeffs.iter_mut().skip(keep + 1) {
        *c = 0.0;
    }
    out
}

/// Physical `order`-th derivative of `p` on a cell of width `dx`.
///
/// The result has degree `deg p - order`, or is the zero constant when the
/// order exceeds the degree.
pub fn poly_derivative(p: &ModalPoly, order: usize, dx: f64) -> ModalPoly {
    let k = p.degree();
    if order > k {
        return ModalPoly::zero(0);
    }
    let nm = k + 1;
    let d = differentiation_matrix(k);
    let mut cur = p.coeffs.clone();
    let mut next = vec![0.0; nm];
    let scale = 2.0 / dx;
    for _ in 0..order {
        apply_matrix(&d, nm, &cur, &mut next);
        for v in next.iter_mut() {
            *v *= scale;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur.truncate(nm - order);
    ModalPoly { coeffs: cur }
}

/// Tensor-product `Q^k` polynomial on the reference square. Mode `(a, b)`
/// (x-degree `a`, y-degree `b`) is stored at `a + (k + 1) * b`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorPoly {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl TensorPoly {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; (degree + 1) * (degree + 1)],
        }
    }

    pub fn mode(&self, a: usize, b: usize) -> f64 {
        self.coeffs[a + (self.degree + 1) * b]
    }

    pub fn eval(&self, xi: f64, eta: f64) -> f64 {
        let nm = self.degree + 1;
        let mut px = vec![0.0; nm];
        let mut py = vec![0.0; nm];
        legendre_eval_all(xi, &mut px);
        legendre_eval_all(eta, &mut py);
        let mut acc = 0.0;
        for b in 0..nm {
            for a in 0..nm {
                acc += self.coeffs[a + nm * b] * px[a] * py[b];
            }
        }
        acc
    }

    pub fn mean(&self) -> f64 {
        0.5 * self.coeffs[0]
    }

    /// Physical derivative `d^ax/dx^ax d^ay/dy^ay` on a `dx` by `dy` cell.
    /// The result keeps the storage degree; vanishing modes are zero.
    pub fn derivative(&self, ax: usize, ay: usize, dx: f64, dy: f64) -> TensorPoly {
        let nm = self.degree + 1;
        let d = differentiation_matrix(self.degree);
        let mut cur = self.coeffs.clone();
        let mut col = vec![0.0; nm];
        let mut out = vec![0.0; nm];
        for _ in 0..ax {
            for b in 0..nm {
                for a in 0..nm {
                    col[a] = cur[a + nm * b];
                }
                apply_matrix(&d, nm, &col, &mut out);
                for a in 0..nm {
                    cur[a + nm * b] = out[a] * 2.0 / dx;
                }
            }
        }
        for _ in 0..ay {
            for a in 0..nm {
                for b in 0..nm {
                    col[b] = cur[a + nm * b];
                }
                apply_matrix(&d, nm, &col, &mut out);
                for b in 0..nm {
                    cur[a + nm * b] = out[b] * 2.0 / dy;
                }
            }
        }
        TensorPoly {
            degree: self.degree,
            coeffs: cur,
        }
    }
}

/// L² projection of `f(x, y)` onto `Q^k` on the rectangle
/// `[x0, x1] x [y0, y1]`, using the tensor rule built from `rule`.
pub fn l2_project_2d(
    f: impl Fn(f64, f64) -> f64,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    k: usize,
    rule: &QuadratureRule,
) -> TensorPoly {
    let nm = k + 1;
    let (hx, mx) = (0.5 * (x1 - x0), 0.5 * (x0 + x1));
    let (hy, my) = (0.5 * (y1 - y0), 0.5 * (y0 + y1));
    let phis: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&xi| {
            let mut p = vec![0.0; nm];
            legendre_eval_all(xi, &mut p);
            p
        })
        .collect();
    let mut coeffs = vec![0.0; nm * nm];
    for (r, &eta) in rule.nodes.iter().enumerate() {
        for (q, &xi) in rule.nodes.iter().enumerate() {
            let w = rule.weights[q] * rule.weights[r] * f(mx + hx * xi, my + hy * eta);
            for b in 0..nm {
                for a in 0..nm {
                    coeffs[a + nm * b] += w * phis[q][a] * phis[r][b];
                }
            }
        }
    }
    TensorPoly { degree: k, coeffs }
}

/// `P^l p` on `Q^k`: zeroes tensor modes with `max(a, b) > max(l, 0)`.
pub fn truncate_projection_2d(p: &TensorPoly, level: isize) -> TensorPoly {
    let keep = level.max(0) as usize;
    let nm = p.degree + 1;
    let mut out = p.clone();
    for b in 0..nm {
        for a in 0..nm {
            if a.max(b) > keep {
                out.coeffs[a + nm * b] = 0.0;
            }
        }
    }
    out
}

/// Basis values and derivatives tabulated at the points a solver needs.
#[derive(Clone, Debug)]
pub struct ReferenceTables {
    pub degree: usize,
    /// Volume rule, [`quadrature_points_for`] points.
    pub rule: QuadratureRule,
    /// `phi[q * nm + m]` at the volume nodes.
    pub phi: Vec<f64>,
    /// Reference derivative `phi_m'` at the volume nodes, same layout.
    pub dphi: Vec<f64>,
    /// `phi_m(0)`, used for edge midpoints.
    pub phi_mid: Vec<f64>,
    /// `trace_derivs[side][l * nm + m]`: `l`-th reference derivative of
    /// `phi_m` at `xi = -1` (side 0) or `xi = +1` (side 1).
    pub trace_derivs: [Vec<f64>; 2],
    /// Positivity check points.
    pub lobatto: QuadratureRule,
    /// `phi_lobatto[p * nm + m]`.
    pub phi_lobatto: Vec<f64>,
}

impl ReferenceTables {
    pub fn new(degree: usize) -> Self {
        let nm = degree + 1;
        let rule = gauss_rule(quadrature_points_for(degree));
        let d = differentiation_matrix(degree);
        let nq = rule.len();
        let mut phi = vec![0.0; nq * nm];
        let mut dphi = vec![0.0; nq * nm];
        let mut tmp = vec![0.0; nm];
        for (q, &xi) in rule.nodes.iter().enumerate() {
            legendre_eval_all(xi, &mut tmp);
            phi[q * nm..(q + 1) * nm].copy_from_slice(&tmp);
            for n in 0..nm {
                dphi[q * nm + n] = (0..nm).map(|m| d[m * nm + n] * tmp[m]).sum();
            }
        }
        let mut phi_mid = vec![0.0; nm];
        legendre_eval_all(0.0, &mut phi_mid);

        let mut trace_derivs = [vec![0.0; nm * nm], vec![0.0; nm * nm]];
        let mut unit = vec![0.0; nm];
        for n in 0..nm {
            // Differentiate phi_n repeatedly in modal space, evaluate at the ends.
            unit.iter_mut().for_each(|v| *v = 0.0);
            unit[n] = 1.0;
            let mut cur = unit.clone();
            let mut next = vec![0.0; nm];
            for l in 0..nm {
                for (side, &xi) in [-1.0, 1.0].iter().enumerate() {
                    trace_derivs[side][l * nm + n] = eval_modes(&cur, xi);
                }
                apply_matrix(&d, nm, &cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
        }

        let lobatto = QuadratureRule::gauss_lobatto(degree + 2);
        let mut phi_lobatto = vec![0.0; lobatto.len() * nm];
        for (p, &xi) in lobatto.nodes.iter().enumerate() {
            legendre_eval_all(xi, &mut phi_lobatto[p * nm..(p + 1) * nm]);
        }

        Self {
            degree,
            rule,
            phi,
            dphi,
            phi_mid,
            trace_derivs,
            lobatto,
            phi_lobatto,
        }
    }

    pub fn modes(&self) -> usize {
        self.degree + 1
    }

    /// Value of the modal expansion at the `side` endpoint.
    pub fn trace(&self, coeffs: &[f64], side: usize) -> f64 {
        let nm = self.modes();
        self.trace_derivs[side][..nm]
            .iter()
            .zip(coeffs)
            .map(|(t, c)| t * c)
            .sum()
    }
}
