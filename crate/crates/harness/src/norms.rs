//! Discrete L1, L2 and L-infinity norms of DG fields and their differences.

use serde::{Deserialize, Serialize};
use swe_ofdg::basis::{gauss_rule, quadrature_points_for, QuadratureRule};
use swe_ofdg::{DGField1D, DGField2D, Mesh1D, Mesh2D};

use crate::HarnessError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl Norms {
    pub fn max(&self) -> f64 {
        self.l1.max(self.l2).max(self.linf)
    }
}

fn rule_for(k: usize) -> QuadratureRule {
    gauss_rule(quadrature_points_for(k).max(k + 2))
}

/// L1 and L2 are averaged over the domain, `|Ω|⁻¹ ∫ |e|` and
/// `(|Ω|⁻¹ ∫ e²)^½`, so they are comparable with the maximum norm.
///
/// Norms of `diff(j, x)` over a 1D mesh. `diff` is evaluated at the Gauss
/// points of each cell and, for the maximum norm, also at both ends.
pub fn norms_1d<const N: usize>(
    mesh: &Mesh1D,
    k: usize,
    diff: impl Fn(usize, f64) -> [f64; N],
) -> [Norms; N] {
    let rule = rule_for(k);
    let mut out = [Norms::default(); N];
    let mut l2 = [0.0; N];
    for j in 0..mesh.cells() {
        let (a, b) = mesh.cell(j);
        let half = 0.5 * (b - a);
        for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let d = diff(j, a + half * (xi + 1.0));
            for s in 0..N {
                out[s].l1 += w * half * d[s].abs();
                l2[s] += w * half * d[s] * d[s];
                out[s].linf = out[s].linf.max(d[s].abs());
            }
        }
        for x in [a, b] {
            let d = diff(j, x);
            for s in 0..N {
                out[s].linf = out[s].linf.max(d[s].abs());
            }
        }
    }
    let (a, b) = mesh.domain();
    normalise(&mut out, &l2, b - a);
    out
}

fn normalise<const N: usize>(out: &mut [Norms; N], l2: &[f64; N], measure: f64) {
    for s in 0..N {
        out[s].l1 /= measure;
        out[s].l2 = (l2[s] / measure).sqrt();
    }
}

/// Norms over a 2D mesh, with the maximum also sampled on cell edges.
pub fn norms_2d<const N: usize>(
    mesh: &Mesh2D,
    k: usize,
    diff: impl Fn(usize, usize, f64, f64) -> [f64; N],
) -> [Norms; N] {
    let rule = rule_for(k);
    let mut out = [Norms::default(); N];
    let mut l2 = [0.0; N];
    let mut extended: Vec<f64> = rule.nodes.clone();
    extended.extend([-1.0, 1.0]);
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let ((x0, x1), (y0, y1)) = mesh.cell_bounds(i, j);
            let (hx, hy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
            let map = |xi: f64, eta: f64| (x0 + hx * (xi + 1.0), y0 + hy * (eta + 1.0));
            for (q, &eta) in extended.iter().enumerate() {
                for (p, &xi) in extended.iter().enumerate() {
                    let (x, y) = map(xi, eta);
                    let d = diff(i, j, x, y);
                    let interior = p < rule.len() && q < rule.len();
                    for s in 0..N {
                        out[s].linf = out[s].linf.max(d[s].abs());
                        if interior {
                            let w = rule.weights[p] * rule.weights[q] * hx * hy;
                            out[s].l1 += w * d[s].abs();
                            l2[s] += w * d[s] * d[s];
                        }
                    }
                }
            }
        }
    }
    let ((x0, x1), (y0, y1)) = (mesh.x_range(), mesh.y_range());
    normalise(&mut out, &l2, (x1 - x0) * (y1 - y0));
    out
}

/// `[h, hu]` errors against a pointwise reference.
pub fn errors_vs_function_1d(field: &DGField1D, exact: impl Fn(f64) -> [f64; 2]) -> [Norms; 2] {
    norms_1d(&field.mesh, field.degree, |j, x| {
        let (h, hu, _) = field.eval_in_cell(j, x);
        let e = exact(x);
        [h - e[0], hu - e[1]]
    })
}

/// Error of the free surface `h + b` against a pointwise reference.
pub fn surface_error_vs_function_1d(field: &DGField1D, exact: impl Fn(f64) -> f64) -> Norms {
    norms_1d(&field.mesh, field.degree, |j, x| {
        let (h, _, b) = field.eval_in_cell(j, x);
        [h + b - exact(x)]
    })[0]
}

/// `[h, hu]` errors between two fields on the same mesh.
pub fn errors_between_same_mesh_1d(a: &DGField1D, b: &DGField1D) -> Result<[Norms; 2], HarnessError> {
    if a.mesh != b.mesh {
        return Err(HarnessError::MeshMismatch("fields live on different meshes".into()));
    }
    Ok(norms_1d(&a.mesh, a.degree.max(b.degree), |j, x| {
        let (h1, q1, _) = a.eval_in_cell(j, x);
        let (h2, q2, _) = b.eval_in_cell(j, x);
        [h1 - h2, q1 - q2]
    }))
}

fn check_nested_1d(coarse: &Mesh1D, fine: &Mesh1D) -> Result<usize, HarnessError> {
    let (nc, nf) = (coarse.cells(), fine.cells());
    if nf < nc || nf % nc != 0 {
        return Err(HarnessError::MeshMismatch(format!("{nf} cells do not refine {nc} cells")));
    }
    let ratio = nf / nc;
    let scale = coarse.dx_max();
    for (j, &x) in coarse.nodes().iter().enumerate() {
        if (fine.nodes()[j * ratio] - x).abs() > 1e-10 * scale {
            return Err(HarnessError::MeshMismatch("meshes are not nested".into()));
        }
    }
    Ok(ratio)
}

/// Value of `fine` at a point of coarse cell `j`, taken from the fine cell
/// that contains it within coarse cell `j`.
fn eval_nested_1d(fine: &DGField1D, ratio: usize, j: usize, x: f64) -> (f64, f64, f64) {
    let first = j * ratio;
    let sub = (first..first + ratio)
        .find(|&s| x <= fine.mesh.cell(s).1)
        .unwrap_or(first + ratio - 1);
    fine.eval_in_cell(sub, x)
}

/// A-posteriori `[h, hu]` errors: `coarse` against a nested finer field,
/// evaluated at the coarse quadrature points.
pub fn errors_between_1d(coarse: &DGField1D, fine: &DGField1D) -> Result<[Norms; 2], HarnessError> {
    let ratio = check_nested_1d(&coarse.mesh, &fine.mesh)?;
    Ok(norms_1d(&coarse.mesh, coarse.degree, |j, x| {
        let (h, q, _) = coarse.eval_in_cell(j, x);
        let (hf, qf, _) = eval_nested_1d(fine, ratio, j, x);
        [h - hf, q - qf]
    }))
}

/// Surface `h + b` difference against a nested finer field.
pub fn surface_error_between_1d(coarse: &DGField1D, fine: &DGField1D) -> Result<Norms, HarnessError> {
    let ratio = check_nested_1d(&coarse.mesh, &fine.mesh)?;
    Ok(norms_1d(&coarse.mesh, coarse.degree, |j, x| {
        let (h, _, b) = coarse.eval_in_cell(j, x);
        let (hf, _, bf) = eval_nested_1d(fine, ratio, j, x);
        [(h + b) - (hf + bf)]
    })[0])
}

/// `[h, hu, hv]` errors between two fields on the same mesh.
pub fn errors_between_same_mesh_2d(a: &DGField2D, b: &DGField2D) -> Result<[Norms; 3], HarnessError> {
    if a.mesh != b.mesh {
        return Err(HarnessError::MeshMismatch("fields live on different meshes".into()));
    }
    Ok(norms_2d(&a.mesh, a.degree.max(b.degree), |i, j, x, y| {
        let u = a.eval_in_cell(i, j, x, y);
        let v = b.eval_in_cell(i, j, x, y);
        [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
    }))
}

/// A-posteriori `[h, hu, hv]` errors against a nested finer 2D field.
pub fn errors_between_2d(coarse: &DGField2D, fine: &DGField2D) -> Result<[Norms; 3], HarnessError> {
    let (c, f) = (&coarse.mesh, &fine.mesh);
    let nested = f.nx() % c.nx() == 0
        && f.ny() % c.ny() == 0
        && f.x_range() == c.x_range()
        && f.y_range() == c.y_range();
    if !nested {
        return Err(HarnessError::MeshMismatch("2D meshes are not nested".into()));
    }
    let (rx, ry) = (f.nx() / c.nx(), f.ny() / c.ny());
    Ok(norms_2d(c, coarse.degree, |i, j, x, y| {
        let u = coarse.eval_in_cell(i, j, x, y);
        let (fi, fj) = f.locate(x, y).expect("point inside the domain");
        let fi = fi.clamp(i * rx, i * rx + rx - 1);
        let fj = fj.clamp(j * ry, j * ry + ry - 1);
        let v = fine.eval_in_cell(fi, fj, x, y);
        [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
    }))
}

/// Empirical order `log2(e_coarse / e_fine)`.
pub fn order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}
