//! Semi-discrete well-balanced OFDG residual on uniform Cartesian meshes.
//!
//! Cell `(i, j)` has index `i + nx * j` and owns `3 * (k + 1)²` consecutive
//! state entries: the tensor modes of `h`, `hu` and `hv` in that order.

use std::sync::Mutex;

use crate::basis::{l2_project_2d, legendre_eval_all, QuadratureRule, ReferenceTables, TensorPoly};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::physics::{
    hydrostatic_reconstruct_2d, interface_average, Axis, Conserved2D, ShallowWater, SideTrace,
};
use crate::solver1d::{damping_prefactor, SchemeOptions};
use crate::timestep::positivity::limit_cell;
use crate::timestep::{dt_2d, SemiDiscrete};

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh2D {
    nx: usize,
    ny: usize,
    x: (f64, f64),
    y: (f64, f64),
}

impl Mesh2D {
    pub fn new(nx: usize, ny: usize, x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidMesh(format!("need at least 2x2 cells, got {nx}x{ny}")));
        }
        if !(x.1 > x.0) || !(y.1 > y.0) {
            return Err(Error::InvalidMesh("empty domain rectangle".into()));
        }
        Ok(Self { nx, ny, x, y })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.y
    }

    pub fn dx(&self) -> f64 {
        (self.x.1 - self.x.0) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y.1 - self.y.0) / self.ny as f64
    }

    /// Cell diameter `sqrt(dx² + dy²)`; the same for every cell.
    pub fn diameter(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    pub fn ij(&self, c: usize) -> (usize, usize) {
        (c % self.nx, c / self.nx)
    }

    pub fn cell_bounds(&self, i: usize, j: usize) -> ((f64, f64), (f64, f64)) {
        let (dx, dy) = (self.dx(), self.dy());
        let x0 = self.x.0 + dx * i as f64;
        let y0 = self.y.0 + dy * j as f64;
        let x1 = if i + 1 == self.nx { self.x.1 } else { x0 + dx };
        let y1 = if j + 1 == self.ny { self.y.1 } else { y0 + dy };
        ((x0, x1), (y0, y1))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let ((x0, x1), (y0, y1)) = self.cell_bounds(i, j);
        (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }

    /// Cell `(i, j)` containing the point, closed on the lower-left.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if x < self.x.0 || x > self.x.1 || y < self.y.0 || y > self.y.1 {
            return None;
        }
        let i = (((x - self.x.0) / self.dx()).floor() as usize).min(self.nx - 1);
        let j = (((y - self.y.0) / self.dy()).floor() as usize).min(self.ny - 1);
        Some((i, j))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCondition2D {
    Periodic,
    Transmissive,
}

/// Modal `Q^k` representation of `(h, hu, hv)` and the bottom.
#[derive(Clone, Debug, PartialEq)]
pub struct DGField2D {
    pub degree: usize,
    pub mesh: Mesh2D,
    /// Cell-major `[h modes, hu modes, hv modes]`.
    pub state: Vec<f64>,
    /// `(k + 1)²` modes of `b_h` per cell.
    pub bottom: Vec<f64>,
}

impl DGField2D {
    pub fn modes(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    /// Modes of variable `var` (0 = h, 1 = hu, 2 = hv) in cell `c`.
    pub fn var(&self, c: usize, var: usize) -> &[f64] {
        let nm = self.modes();
        &self.state[3 * nm * c + nm * var..3 * nm * c + nm * (var + 1)]
    }

    pub fn b(&self, c: usize) -> &[f64] {
        let nm = self.modes();
        &self.bottom[nm * c..nm * (c + 1)]
    }

    fn poly(&self, coeffs: &[f64]) -> TensorPoly {
        TensorPoly {
            degree: self.degree,
            coeffs: coeffs.to_vec(),
        }
    }

    /// `[h, hu, hv, b]` at a physical point of cell `(i, j)`.
    pub fn eval_in_cell(&self, i: usize, j: usize, x: f64, y: f64) -> [f64; 4] {
        let ((x0, x1), (y0, y1)) = self.mesh.cell_bounds(i, j);
        let xi = (2.0 * x - x0 - x1) / (x1 - x0);
        let eta = (2.0 * y - y0 - y1) / (y1 - y0);
        let c = self.mesh.index(i, j);
        [
            self.poly(self.var(c, 0)).eval(xi, eta),
            self.poly(self.var(c, 1)).eval(xi, eta),
            self.poly(self.var(c, 2)).eval(xi, eta),
            self.poly(self.b(c)).eval(xi, eta),
        ]
    }

    pub fn eval(&self, x: f64, y: f64) -> Option<[f64; 4]> {
        let (i, j) = self.mesh.locate(x, y)?;
        Some(self.eval_in_cell(i, j, x, y))
    }

    pub fn total_mass(&self) -> f64 {
        let area = self.mesh.dx() * self.mesh.dy();
        (0..self.mesh.cells()).map(|c| area * 0.5 * self.var(c, 0)[0]).sum()
    }
}

/// How the initial water column is specified in 2D.
pub enum InitialDepth2D<'a> {
    Depth(&'a dyn Fn(f64, f64) -> f64),
    /// Free surface; `h_h` is the projected surface minus `b_h`.
    Surface(&'a dyn Fn(f64, f64) -> f64),
}

/// Cellwise `Q^k` projection of the initial data and the bottom.
pub fn project_initial_data_2d(
    mesh: &Mesh2D,
    degree: usize,
    bottom: impl Fn(f64, f64) -> f64,
    depth: InitialDepth2D<'_>,
    hu: impl Fn(f64, f64) -> f64,
    hv: impl Fn(f64, f64) -> f64,
) -> DGField2D {
    let nm = (degree + 1) * (degree + 1);
    let rule = crate::basis::gauss_rule(crate::basis::quadrature_points_for(degree).max(degree + 2));
    let n = mesh.cells();
    let mut state = vec![0.0; 3 * nm * n];
    let mut bot = vec![0.0; nm * n];
    for c in 0..n {
        let (i, j) = mesh.ij(c);
        let (xr, yr) = mesh.cell_bounds(i, j);
        let bh = l2_project_2d(&bottom, xr, yr, degree, &rule).coeffs;
        let hh: Vec<f64> = match &depth {
            InitialDepth2D::Depth(f) => l2_project_2d(f, xr, yr, degree, &rule).coeffs,
            InitialDepth2D::Surface(f) => l2_project_2d(f, xr, yr, degree, &rule)
                .coeffs
                .iter()
                .zip(&bh)
                .map(|(e, b)| e - b)
                .collect(),
        };
        let base = 3 * nm * c;
        state[base..base + nm].copy_from_slice(&hh);
        state[base + nm..base + 2 * nm].copy_from_slice(&l2_project_2d(&hu, xr, yr, degree, &rule).coeffs);
        state[base + 2 * nm..base + 3 * nm].copy_from_slice(&l2_project_2d(&hv, xr, yr, degree, &rule).coeffs);
        bot[nm * c..nm * (c + 1)].copy_from_slice(&bh);
    }
    DGField2D {
        degree,
        mesh: mesh.clone(),
        state,
        bottom: bot,
    }
}

/// Tensor-product tables on the reference square.
#[derive(Clone, Debug)]
struct Tables2D {
    nm: usize,
    nm2: usize,
    /// 1D Gauss rule shared by volume and edges.
    rule: QuadratureRule,
    /// `[q * nm2 + m]` at volume node `q = qx + nq * qy`.
    phi: Vec<f64>,
    dphi_x: Vec<f64>,
    dphi_y: Vec<f64>,
    weights: Vec<f64>,
    /// `[axis][side][p * nm2 + m]` at the edge nodes.
    edge_phi: [[Vec<f64>; 2]; 2],
    /// `[axis][side][m]` at the edge midpoints.
    mid_phi: [[Vec<f64>; 2]; 2],
    /// Multi-indices `(ax, ay)` with `ax + ay <= k`, grouped by order.
    alphas: Vec<(usize, usize)>,
    /// Reference derivatives at the vertices, `[(v * nalpha + a) * nm2 + m]`
    /// with vertex `v = sx + 2 * sy`.
    vertex: Vec<f64>,
    /// Positivity check points, `[p * nm2 + m]`.
    check: Vec<f64>,
}

impl Tables2D {
    fn new(k: usize) -> Self {
        let t1 = ReferenceTables::new(k);
        let nm = k + 1;
        let nm2 = nm * nm;
        let nq = t1.rule.len();
        let idx = |a: usize, b: usize| a + nm * b;

        let mut phi = vec![0.0; nq * nq * nm2];
        let mut dphi_x = phi.clone();
        let mut dphi_y = phi.clone();
        let mut weights = vec![0.0; nq * nq];
        for qy in 0..nq {
            for qx in 0..nq {
                let q = qx + nq * qy;
                weights[q] = t1.rule.weights[qx] * t1.rule.weights[qy];
                for b in 0..nm {
                    for a in 0..nm {
                        let (px, py) = (t1.phi[qx * nm + a], t1.phi[qy * nm + b]);
                        phi[q * nm2 + idx(a, b)] = px * py;
                        dphi_x[q * nm2 + idx(a, b)] = t1.dphi[qx * nm + a] * py;
                        dphi_y[q * nm2 + idx(a, b)] = px * t1.dphi[qy * nm + b];
                    }
                }
            }
        }

        let end = |side: usize, a: usize| t1.trace_derivs[side][a];
        let mut edge_phi: [[Vec<f64>; 2]; 2] = Default::default();
        let mut mid_phi: [[Vec<f64>; 2]; 2] = Default::default();
        for side in 0..2 {
            let mut ex = vec![0.0; nq * nm2];
            let mut ey = vec![0.0; nq * nm2];
            for p in 0..nq {
                for b in 0..nm {
                    for a in 0..nm {
                        ex[p * nm2 + idx(a, b)] = end(side, a) * t1.phi[p * nm + b];
                        ey[p * nm2 + idx(a, b)] = t1.phi[p * nm + a] * end(side, b);
                    }
                }
            }
            edge_phi[0][side] = ex;
            edge_phi[1][side] = ey;
            let mut mx = vec![0.0; nm2];
            let mut my = vec![0.0; nm2];
            for b in 0..nm {
                for a in 0..nm {
                    mx[idx(a, b)] = end(side, a) * t1.phi_mid[b];
                    my[idx(a, b)] = t1.phi_mid[a] * end(side, b);
                }
            }
            mid_phi[0][side] = mx;
            mid_phi[1][side] = my;
        }

        let alphas: Vec<(usize, usize)> = (0..=k)
            .flat_map(|l| (0..=l).map(move |ax| (ax, l - ax)))
            .collect();
        let na = alphas.len();
        let mut vertex = vec![0.0; 4 * na * nm2];
        for v in 0..4 {
            let (sx, sy) = (v % 2, v / 2);
            for (ai, &(ax, ay)) in alphas.iter().enumerate() {
                for b in 0..nm {
                    for a in 0..nm {
                        vertex[(v * na + ai) * nm2 + idx(a, b)] =
                            t1.trace_derivs[sx][ax * nm + a] * t1.trace_derivs[sy][ay * nm + b];
                    }
                }
            }
        }

        // Gauss x Lobatto and Lobatto x Gauss.
        let lob = &t1.lobatto;
        let mut pts = Vec::new();
        for &g in &t1.rule.nodes {
            for &l in &lob.nodes {
                pts.push((g, l));
                pts.push((l, g));
            }
        }
        let mut check = vec![0.0; pts.len() * nm2];
        let mut px = vec![0.0; nm];
        let mut py = vec![0.0; nm];
        for (p, &(x, y)) in pts.iter().enumerate() {
            legendre_eval_all(x, &mut px);
            legendre_eval_all(y, &mut py);
            for b in 0..nm {
                for a in 0..nm {
                    check[p * nm2 + idx(a, b)] = px[a] * py[b];
                }
            }
        }

        Self {
            nm,
            nm2,
            rule: t1.rule,
            phi,
            dphi_x,
            dphi_y,
            weights,
            edge_phi,
            mid_phi,
            alphas,
            vertex,
            check,
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn eval3(cell: &[f64], row: &[f64]) -> [f64; 3] {
    let nm = row.len();
    [dot(row, &cell[..nm]), dot(row, &cell[nm..2 * nm]), dot(row, &cell[2 * nm..3 * nm])]
}

fn axis_of(a: usize) -> Axis {
    if a == 0 {
        Axis::X
    } else {
        Axis::Y
    }
}

pub struct Solver2D {
    mesh: Mesh2D,
    degree: usize,
    tables: Tables2D,
    physics: ShallowWater,
    bc: BoundaryCondition2D,
    options: SchemeOptions,
    bottom: Vec<f64>,
    /// Reference derivatives of `b_h` at the volume nodes, `[c * nq² + q]`.
    bottom_dx: Vec<f64>,
    bottom_dy: Vec<f64>,
    /// `b_h` at the edge nodes, `[((c * 2 + axis) * 2 + side) * nq + p]`.
    bottom_edge: Vec<f64>,
}

impl Solver2D {
    pub fn new(
        field: &DGField2D,
        physics: ShallowWater,
        bc: BoundaryCondition2D,
        options: SchemeOptions,
    ) -> Result<Self> {
        let k = field.degree;
        let n = field.mesh.cells();
        let tables = Tables2D::new(k);
        let nm2 = tables.nm2;
        if field.state.len() != 3 * nm2 * n || field.bottom.len() != nm2 * n {
            return Err(Error::InvalidConfig("field storage does not match mesh and degree".into()));
        }
        let nq = tables.rule.len();
        let nv = nq * nq;
        let mut bottom_dx = vec![0.0; n * nv];
        let mut bottom_dy = vec![0.0; n * nv];
        let mut bottom_edge = vec![0.0; n * 4 * nq];
        for c in 0..n {
            let b = field.b(c);
            for q in 0..nv {
                bottom_dx[c * nv + q] = dot(&tables.dphi_x[q * nm2..(q + 1) * nm2], b);
                bottom_dy[c * nv + q] = dot(&tables.dphi_y[q * nm2..(q + 1) * nm2], b);
            }
            for axis in 0..2 {
                for side in 0..2 {
                    for p in 0..nq {
                        bottom_edge[((c * 2 + axis) * 2 + side) * nq + p] =
                            dot(&tables.edge_phi[axis][side][p * nm2..(p + 1) * nm2], b);
                    }
                }
            }
        }
        Ok(Self {
            mesh: field.mesh.clone(),
            degree: k,
            tables,
            physics,
            bc,
            options,
            bottom: field.bottom.clone(),
            bottom_dx,
            bottom_dy,
            bottom_edge,
        })
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn physics(&self) -> &ShallowWater {
        &self.physics
    }

    pub fn options(&self) -> &SchemeOptions {
        &self.options
    }

    pub fn boundary(&self) -> BoundaryCondition2D {
        self.bc
    }

    fn cell<'a>(&self, state: &'a [f64], c: usize) -> &'a [f64] {
        let w = 3 * self.tables.nm2;
        &state[w * c..w * (c + 1)]
    }

    /// Neighbour across the `side` edge normal to `axis`, if any.
    fn neighbour(&self, c: usize, axis: usize, side: usize) -> Option<usize> {
        let (i, j) = self.mesh.ij(c);
        let (n, pos) = if axis == 0 { (self.mesh.nx, i) } else { (self.mesh.ny, j) };
        let at_boundary = if side == 0 { pos == 0 } else { pos + 1 == n };
        let other = if at_boundary {
            match self.bc {
                BoundaryCondition2D::Periodic if side == 0 => n - 1,
                BoundaryCondition2D::Periodic => 0,
                BoundaryCondition2D::Transmissive => return None,
            }
        } else if side == 0 {
            pos - 1
        } else {
            pos + 1
        };
        Some(if axis == 0 { self.mesh.index(other, j) } else { self.mesh.index(i, other) })
    }

    /// `(cell, side)` of the two traces meeting at edge `e` normal to
    /// `axis`, with ghosts resolved.
    fn edge_cells(&self, axis: usize, e: usize) -> ((usize, usize), (usize, usize)) {
        let (nx, ny) = (self.mesh.nx, self.mesh.ny);
        let (pos, lane, n) = if axis == 0 {
            (e % (nx + 1), e / (nx + 1), nx)
        } else {
            (e % (ny + 1), e / (ny + 1), ny)
        };
        let at = |p: usize| if axis == 0 { self.mesh.index(p, lane) } else { self.mesh.index(lane, p) };
        let left = if pos == 0 {
            match self.bc {
                BoundaryCondition2D::Periodic => (at(n - 1), 1),
                BoundaryCondition2D::Transmissive => (at(0), 0),
            }
        } else {
            (at(pos - 1), 1)
        };
        let right = if pos == n {
            match self.bc {
                BoundaryCondition2D::Periodic => (at(0), 0),
                BoundaryCondition2D::Transmissive => (at(n - 1), 1),
            }
        } else {
            (at(pos), 0)
        };
        (left, right)
    }

    fn edge_count(&self, axis: usize) -> usize {
        if axis == 0 {
            (self.mesh.nx + 1) * self.mesh.ny
        } else {
            (self.mesh.ny + 1) * self.mesh.nx
        }
    }

    /// Index of the `side` edge of cell `c` normal to `axis`.
    fn edge_index(&self, axis: usize, c: usize, side: usize) -> usize {
        let (i, j) = self.mesh.ij(c);
        if axis == 0 {
            (i + side) + (self.mesh.nx + 1) * j
        } else {
            (j + side) + (self.mesh.ny + 1) * i
        }
    }

    /// Edge fluxes `[e][p][left/right][var]` for all edges normal to `axis`.
    fn edge_fluxes(&self, state: &[f64], axis: usize) -> Vec<f64> {
        let t = &self.tables;
        let nq = t.rule.len();
        let nm2 = t.nm2;
        let mut buf = vec![0.0; self.edge_count(axis) * nq * 6];
        let ax = axis_of(axis);
        par::for_each_chunk(self.options.execution, &mut buf, nq * 6, |e, chunk| {
            let ((cl, sl), (cr, sr)) = self.edge_cells(axis, e);
            let (ul, ur) = (self.cell(state, cl), self.cell(state, cr));
            for p in 0..nq {
                let tl = &t.edge_phi[axis][sl][p * nm2..(p + 1) * nm2];
                let tr = &t.edge_phi[axis][sr][p * nm2..(p + 1) * nm2];
                let left = SideTrace {
                    state: Conserved2D::from_array(eval3(ul, tl)),
                    b: self.bottom_edge[((cl * 2 + axis) * 2 + sl) * nq + p],
                };
                let right = SideTrace {
                    state: Conserved2D::from_array(eval3(ur, tr)),
                    b: self.bottom_edge[((cr * 2 + axis) * 2 + sr) * nq + p],
                };
                let iface = hydrostatic_reconstruct_2d(left, right);
                let (fl, fr) = self.physics.modified_interface_fluxes_2d(&iface, ax);
                chunk[p * 6..p * 6 + 3].copy_from_slice(&fl);
                chunk[p * 6 + 3..p * 6 + 6].copy_from_slice(&fr);
            }
        });
        buf
    }

    fn damping_active(&self) -> bool {
        self.options.damping && self.degree >= 1
    }

    /// Physical derivatives `[(v * nalpha + a) * 3 + var]` at the four
    /// vertices, and values `[(axis * 2 + side) * 3 + var]` at the edge
    /// midpoints, of one cell.
    fn vertex_data(&self, state: &[f64], c: usize) -> (Vec<f64>, [f64; 12]) {
        let t = &self.tables;
        let nm2 = t.nm2;
        let na = t.alphas.len();
        let cell = self.cell(state, c);
        let (sx, sy) = (2.0 / self.mesh.dx(), 2.0 / self.mesh.dy());
        let mut out = vec![0.0; 4 * na * 3];
        for v in 0..4 {
            for (ai, &(ax, ay)) in t.alphas.iter().enumerate() {
                let row = &t.vertex[(v * na + ai) * nm2..(v * na + ai + 1) * nm2];
                let s = sx.powi(ax as i32) * sy.powi(ay as i32);
                let vals = eval3(cell, row);
                for var in 0..3 {
                    out[(v * na + ai) * 3 + var] = s * vals[var];
                }
            }
        }
        let mut mid = [0.0; 12];
        for axis in 0..2 {
            for side in 0..2 {
                let vals = eval3(cell, &t.mid_phi[axis][side]);
                mid[(axis * 2 + side) * 3..(axis * 2 + side) * 3 + 3].copy_from_slice(&vals);
            }
        }
        (out, mid)
    }

    fn sigma_from_vertex_data(&self, c: usize, data: &[(Vec<f64>, [f64; 12])]) -> Vec<f64> {
        let k = self.degree;
        let t = &self.tables;
        let na = t.alphas.len();
        // acc[a][s] = sum over vertices of squared characteristic jumps
        let mut acc = vec![[0.0f64; 3]; na];
        let (own, own_mid) = &data[c];
        for axis in 0..2 {
            for side in 0..2 {
                let Some(nb) = self.neighbour(c, axis, side) else { continue };
                let (other, other_mid) = &data[nb];
                let m0 = (axis * 2 + side) * 3;
                let m1 = (axis * 2 + (1 - side)) * 3;
                let avg = interface_average(
                    [own_mid[m0], own_mid[m0 + 1], own_mid[m0 + 2]],
                    [other_mid[m1], other_mid[m1 + 1], other_mid[m1 + 2]],
                );
                let sign = if side == 0 { -1.0 } else { 1.0 };
                let normal = if axis == 0 { [sign, 0.0] } else { [0.0, sign] };
                let rinv = self.physics.char_matrix_2d(Conserved2D::from_array(avg), normal);
                for along in 0..2 {
                    let (vk, vn) = if axis == 0 {
                        (side + 2 * along, (1 - side) + 2 * along)
                    } else {
                        (along + 2 * side, along + 2 * (1 - side))
                    };
                    for (ai, slot) in acc.iter_mut().enumerate() {
                        let pk = (vk * na + ai) * 3;
                        let pn = (vn * na + ai) * 3;
                        let jump = [
                            other[pn] - own[pk],
                            other[pn + 1] - own[pk + 1],
                            other[pn + 2] - own[pk + 2],
                        ];
                        let w = rinv.apply(jump);
                        for s in 0..3 {
                            slot[s] += w[s] * w[s];
                        }
                    }
                }
            }
        }
        let edges = 4.0;
        let diam = self.mesh.diameter();
        (0..=k)
            .map(|l| {
                let mut best = 0.0f64;
                for s in 0..3 {
                    let total: f64 = t
                        .alphas
                        .iter()
                        .zip(&acc)
                        .filter(|((ax, ay), _)| ax + ay == l)
                        .map(|(_, a)| (a[s] / edges).sqrt())
                        .sum();
                    best = best.max(total);
                }
                damping_prefactor(k, l, diam) * best
            })
            .collect()
    }

    /// Damping coefficients `sigma_K^l`, `l = 0..=k`, for every cell.
    pub fn damping_sigmas(&self, state: &[f64]) -> Vec<Vec<f64>> {
        if self.degree == 0 {
            return vec![vec![0.0]; self.mesh.cells()];
        }
        let data = par::map_indices(self.options.execution, self.mesh.cells(), |c| self.vertex_data(state, c));
        par::map_indices(self.options.execution, self.mesh.cells(), |c| {
            self.sigma_from_vertex_data(c, &data)
        })
    }

    pub fn damping_sigma(&self, state: &[f64], c: usize) -> Vec<f64> {
        if self.degree == 0 {
            return vec![0.0];
        }
        let mut cells = vec![c];
        for axis in 0..2 {
            for side in 0..2 {
                cells.extend(self.neighbour(c, axis, side));
            }
        }
        let n = self.mesh.cells();
        let mut data = vec![(Vec::new(), [0.0; 12]); n];
        for &cc in &cells {
            data[cc] = self.vertex_data(state, cc);
        }
        self.sigma_from_vertex_data(c, &data)
    }

    fn add_damping(&self, state: &[f64], c: usize, sigma: &[f64], out: &mut [f64]) {
        let nm = self.tables.nm;
        let nm2 = self.tables.nm2;
        let cell = self.cell(state, c);
        let b = &self.bottom[nm2 * c..nm2 * (c + 1)];
        let inv = 1.0 / self.mesh.diameter();
        // cumulative[l] = sum of sigma up to l
        let mut cumulative = vec![0.0; nm];
        let mut run = 0.0;
        for (l, s) in sigma.iter().enumerate() {
            run += s;
            cumulative[l] = run;
        }
        for bm in 0..nm {
            for am in 0..nm {
                let top = am.max(bm);
                if top == 0 {
                    continue;
                }
                let m = am + nm * bm;
                let rate = cumulative[top] * inv;
                out[m] -= rate * (cell[m] + b[m]);
                out[nm2 + m] -= rate * cell[nm2 + m];
                out[2 * nm2 + m] -= rate * cell[2 * nm2 + m];
            }
        }
    }

    /// Semi-discrete right-hand side; returns the net rate of water
    /// leaving through the domain boundary.
    pub fn residual_2d(&self, state: &[f64], out: &mut [f64]) -> Result<f64> {
        let t = &self.tables;
        let nq = t.rule.len();
        let nv = nq * nq;
        let nm2 = t.nm2;
        let g = self.physics.g;
        let (dx, dy) = (self.mesh.dx(), self.mesh.dy());
        let fluxes = [self.edge_fluxes(state, 0), self.edge_fluxes(state, 1)];
        let sigmas = if self.damping_active() { Some(self.damping_sigmas(state)) } else { None };

        par::for_each_chunk(self.options.execution, out, 3 * nm2, |c, cell_out| {
            let cell = self.cell(state, c);
            let mut acc = [vec![0.0; 3 * nm2], vec![0.0; 3 * nm2]];
            for q in 0..nv {
                let phi = &t.phi[q * nm2..(q + 1) * nm2];
                let dpx = &t.dphi_x[q * nm2..(q + 1) * nm2];
                let dpy = &t.dphi_y[q * nm2..(q + 1) * nm2];
                let u = Conserved2D::from_array(eval3(cell, phi));
                let (f, gf) = self.physics.flux_2d(u);
                let w = t.weights[q];
                let sx = -g * u.h * self.bottom_dx[c * nv + q];
                let sy = -g * u.h * self.bottom_dy[c * nv + q];
                for m in 0..nm2 {
                    for var in 0..3 {
                        acc[0][var * nm2 + m] += w * f[var] * dpx[m];
                        acc[1][var * nm2 + m] += w * gf[var] * dpy[m];
                    }
                    acc[0][nm2 + m] += w * sx * phi[m];
                    acc[1][2 * nm2 + m] += w * sy * phi[m];
                }
            }
            for axis in 0..2 {
                for side in 0..2 {
                    let e = self.edge_index(axis, c, side);
                    let base = e * nq * 6;
                    // this cell is the right state on its low edge, left on its high edge
                    let (offset, sign) = if side == 0 { (3, 1.0) } else { (0, -1.0) };
                    for p in 0..nq {
                        let flux = &fluxes[axis][base + p * 6 + offset..base + p * 6 + offset + 3];
                        let row = &t.edge_phi[axis][side][p * nm2..(p + 1) * nm2];
                        let w = sign * t.rule.weights[p];
                        for var in 0..3 {
                            let fw = w * flux[var];
                            for m in 0..nm2 {
                                acc[axis][var * nm2 + m] += fw * row[m];
                            }
                        }
                    }
                }
            }
            let (ax, ay) = (2.0 / dx, 2.0 / dy);
            for (o, (a, b)) in cell_out.iter_mut().zip(acc[0].iter().zip(&acc[1])) {
                *o = ax * a + ay * b;
            }
            if let Some(s) = &sigmas {
                self.add_damping(state, c, &s[c], cell_out);
            }
        });

        if let Some(pos) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                cell: pos / (3 * nm2),
                variable: (pos % (3 * nm2)) / nm2,
            });
        }
        Ok(self.boundary_outflow(&fluxes))
    }

    fn boundary_outflow(&self, fluxes: &[Vec<f64>; 2]) -> f64 {
        let nq = self.tables.rule.len();
        let w = &self.tables.rule.weights;
        let (nx, ny) = (self.mesh.nx, self.mesh.ny);
        let edge_mass = |axis: usize, e: usize| -> f64 {
            (0..nq).map(|p| w[p] * fluxes[axis][e * nq * 6 + p * 6]).sum()
        };
        let mut rate = 0.0;
        for j in 0..ny {
            rate += 0.5 * self.mesh.dy() * (edge_mass(0, nx + (nx + 1) * j) - edge_mass(0, (nx + 1) * j));
        }
        for i in 0..nx {
            rate += 0.5 * self.mesh.dx() * (edge_mass(1, ny + (ny + 1) * i) - edge_mass(1, (ny + 1) * i));
        }
        rate
    }

    pub fn positivity_limiter(&self, state: &mut [f64]) -> Result<()> {
        let nm2 = self.tables.nm2;
        let table = &self.tables.check;
        let failure = Mutex::new(None);
        par::for_each_chunk(self.options.execution, state, 3 * nm2, |c, cell| {
            let (h, rest) = cell.split_at_mut(nm2);
            if let Err(e) = limit_cell(h, &mut [rest], table, 0.5, c) {
                failure.lock().unwrap().get_or_insert(e);
            }
        });
        match failure.into_inner().unwrap() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Smallest water height over all positivity check points.
    pub fn min_depth(&self, state: &[f64]) -> f64 {
        let nm2 = self.tables.nm2;
        state
            .chunks(3 * nm2)
            .flat_map(|cell| self.tables.check.chunks(nm2).map(move |row| dot(row, &cell[..nm2])))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|u| + c` and `|v| + c` over the check points.
    pub fn max_wave_speeds(&self, state: &[f64]) -> (f64, f64) {
        let nm2 = self.tables.nm2;
        let speeds = par::map_indices(self.options.execution, self.mesh.cells(), |c| {
            let cell = self.cell(state, c);
            let mut best = (0.0f64, 0.0f64);
            for row in self.tables.check.chunks(nm2) {
                let u = Conserved2D::from_array(eval3(cell, row));
                best.0 = best.0.max(self.physics.max_wave_speed_axis(u, Axis::X));
                best.1 = best.1.max(self.physics.max_wave_speed_axis(u, Axis::Y));
            }
            best
        });
        speeds
            .into_iter()
            .fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.options.execution = execution;
        self
    }
}

impl SemiDiscrete for Solver2D {
    fn residual(&self, state: &[f64], out: &mut [f64]) -> Result<f64> {
        self.residual_2d(state, out)
    }

    fn limit(&self, state: &mut [f64]) -> Result<()> {
        if self.options.limiter {
            self.positivity_limiter(state)
        } else {
            Ok(())
        }
    }

    fn stable_dt(&self, state: &[f64], cfl: f64) -> Result<f64> {
        let (sx, sy) = self.max_wave_speeds(state);
        dt_2d(cfl, self.mesh.dx(), self.mesh.dy(), sx, sy)
    }

    fn mass(&self, state: &[f64]) -> f64 {
        let nm2 = self.tables.nm2;
        let area = self.mesh.dx() * self.mesh.dy();
        (0..self.mesh.cells()).map(|c| area * 0.5 * state[3 * nm2 * c]).sum()
    }
}
