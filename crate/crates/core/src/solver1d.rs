//! Semi-discrete well-balanced OFDG residual on a 1D mesh.
//!
//! The state vector is cell-major: cell `j` owns `2 * (k + 1)` consecutive
//! entries, the modal coefficients of `h` followed by those of `hu`. The
//! bottom `b_h` is fixed for the lifetime of a [`Solver1D`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Mutex;

use crate::basis::{l2_project, ReferenceTables};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::physics::{
    hydrostatic_reconstruct, interface_average, Conserved1D, ShallowWater, SideTrace,
};
use crate::timestep::positivity::limit_cell;
use crate::timestep::{dt_1d, SemiDiscrete};

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidMesh("need at least one cell".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidMesh("cell boundaries must increase strictly".into()));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Self> {
        if cells == 0 || !(b > a) {
            return Err(Error::InvalidMesh(format!("bad uniform mesh [{a}, {b}] with {cells} cells")));
        }
        let nodes = (0..=cells)
            .map(|j| a + (b - a) * j as f64 / cells as f64)
            .collect();
        Self::new(nodes)
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cell(&self, j: usize) -> (f64, f64) {
        (self.nodes[j], self.nodes[j + 1])
    }

    pub fn dx(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    /// `max_j dx_j`.
    pub fn dx_max(&self) -> f64 {
        (0..self.cells()).map(|j| self.dx(j)).fold(0.0, f64::max)
    }

    pub fn dx_min(&self) -> f64 {
        (0..self.cells()).map(|j| self.dx(j)).fold(f64::INFINITY, f64::min)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// Index of the cell containing `x` (closed on the left).
    pub fn locate(&self, x: f64) -> Option<usize> {
        let (a, b) = self.domain();
        if x < a || x > b {
            return None;
        }
        let j = self.nodes.partition_point(|&n| n <= x);
        Some(j.saturating_sub(1).min(self.cells() - 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition1D {
    Periodic,
    Transmissive,
    /// Prescribed discharge at the left end and depth at the right end.
    InflowOutflow { discharge_left: f64, depth_right: f64 },
}

/// Switches shared by the 1D and 2D schemes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeOptions {
    pub damping: bool,
    pub limiter: bool,
    pub execution: Execution,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            damping: true,
            limiter: false,
            execution: Execution::default(),
        }
    }
}

/// Modal representation of `(h, hu)` and the static bottom on a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct DGField1D {
    pub degree: usize,
    pub mesh: Mesh1D,
    /// Cell-major `[h modes, hu modes]` per cell.
    pub state: Vec<f64>,
    /// `k + 1` modes of `b_h` per cell.
    pub bottom: Vec<f64>,
}

impl DGField1D {
    pub fn modes(&self) -> usize {
        self.degree + 1
    }

    pub fn h(&self, j: usize) -> &[f64] {
        let nm = self.modes();
        &self.state[2 * nm * j..2 * nm * j + nm]
    }

    pub fn hu(&self, j: usize) -> &[f64] {
        let nm = self.modes();
        &self.state[2 * nm * j + nm..2 * nm * (j + 1)]
    }

    pub fn b(&self, j: usize) -> &[f64] {
        let nm = self.modes();
        &self.bottom[nm * j..nm * (j + 1)]
    }

    /// `(h, hu, b)` at physical `x`; at a cell boundary the cell to the
    /// right is used, except at the right end of the domain.
    pub fn eval(&self, x: f64) -> Option<(f64, f64, f64)> {
        let j = self.mesh.locate(x)?;
        Some(self.eval_in_cell(j, x))
    }

    pub fn eval_in_cell(&self, j: usize, x: f64) -> (f64, f64, f64) {
        let (a, b) = self.mesh.cell(j);
        let xi = (2.0 * x - a - b) / (b - a);
        (
            crate::basis::eval_modes(self.h(j), xi),
            crate::basis::eval_modes(self.hu(j), xi),
            crate::basis::eval_modes(self.b(j), xi),
        )
    }

    /// `sum_j dx_j * mean(h_j)`.
    pub fn total_mass(&self) -> f64 {
        (0..self.mesh.cells())
            .map(|j| self.mesh.dx(j) * self.h(j)[0] * FRAC_1_SQRT_2)
            .sum()
    }
}

/// How the initial water column is specified.
pub enum InitialDepth<'a> {
    /// `h_0(x)` is projected directly.
    Depth(&'a dyn Fn(f64) -> f64),
    /// The free surface `eta_0(x)` is projected and `b_h` subtracted, so
    /// `h_h + b_h` equals the projected surface mode by mode.
    Surface(&'a dyn Fn(f64) -> f64),
}

/// Cellwise L² projection of the initial data and the bottom.
pub fn project_initial_data(
    mesh: &Mesh1D,
    degree: usize,
    bottom: impl Fn(f64) -> f64,
    depth: InitialDepth<'_>,
    discharge: impl Fn(f64) -> f64,
) -> DGField1D {
    let nm = degree + 1;
    let rule = crate::basis::gauss_rule(crate::basis::quadrature_points_for(degree).max(degree + 2));
    let n = mesh.cells();
    let mut state = vec![0.0; 2 * nm * n];
    let mut bot = vec![0.0; nm * n];
    for j in 0..n {
        let (a, b) = mesh.cell(j);
        let bh = l2_project(&bottom, a, b, degree, &rule);
        let hh = match &depth {
            InitialDepth::Depth(f) => l2_project(f, a, b, degree, &rule).coeffs,
            InitialDepth::Surface(f) => {
                let eta = l2_project(f, a, b, degree, &rule);
                eta.coeffs.iter().zip(&bh.coeffs).map(|(e, b)| e - b).collect()
            }
        };
        let q = l2_project(&discharge, a, b, degree, &rule);
        state[2 * nm * j..2 * nm * j + nm].copy_from_slice(&hh);
        state[2 * nm * j + nm..2 * nm * (j + 1)].copy_from_slice(&q.coeffs);
        bot[nm * j..nm * (j + 1)].copy_from_slice(&bh.coeffs);
    }
    DGField1D {
        degree,
        mesh: mesh.clone(),
        state,
        bottom: bot,
    }
}

/// Values of `d^l h / dx^l` and `d^l (hu) / dx^l` (`l = 0..=k`) and of the
/// bottom at one side of a cell, or of a ghost state.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSet {
    /// `derivs[2 * l + var]`.
    pub derivs: Vec<f64>,
    pub b: f64,
}

impl TraceSet {
    pub fn value(&self) -> Conserved1D {
        Conserved1D::new(self.derivs[0], self.derivs[1])
    }

    fn side(&self) -> SideTrace<Conserved1D> {
        SideTrace {
            state: self.value(),
            b: self.b,
        }
    }
}

/// Prefactor `2(2l + 1) / (2k - 1) * dx^l / l!` of the damping coefficient.
pub fn damping_prefactor(k: usize, l: usize, dx: f64) -> f64 {
    let factorial: f64 = (1..=l).map(|i| i as f64).product();
    2.0 * (2 * l + 1) as f64 / (2.0 * k as f64 - 1.0) * dx.powi(l as i32) / factorial
}

/// `sigma^l` from the squared characteristic jumps at the two interfaces
/// of a cell, `max_s sqrt(left[s] + right[s])` times the prefactor.
pub fn sigma_from_jumps(k: usize, l: usize, dx: f64, left: [f64; 2], right: [f64; 2]) -> f64 {
    let m = (left[0] + right[0]).sqrt().max((left[1] + right[1]).sqrt());
    damping_prefactor(k, l, dx) * m
}

pub struct Solver1D {
    mesh: Mesh1D,
    tables: ReferenceTables,
    physics: ShallowWater,
    bc: BoundaryCondition1D,
    options: SchemeOptions,
    bottom: Vec<f64>,
    /// `b_h` at the left and right end of each cell.
    bottom_traces: Vec<[f64; 2]>,
    /// Reference derivative of `b_h` at the volume nodes, `[cell][q]`.
    bottom_slope: Vec<f64>,
    dx_max: f64,
}

/// Per-interface output of the flux/jump pass.
#[derive(Clone, Copy, Debug, Default)]
struct InterfaceFlux {
    left: [f64; 2],
    right: [f64; 2],
}

impl Solver1D {
    pub fn new(
        field: &DGField1D,
        physics: ShallowWater,
        bc: BoundaryCondition1D,
        options: SchemeOptions,
    ) -> Result<Self> {
        let k = field.degree;
        let n = field.mesh.cells();
        if let BoundaryCondition1D::InflowOutflow { discharge_left, depth_right } = bc {
            if !discharge_left.is_finite() || !(depth_right > 0.0) {
                return Err(Error::InvalidConfig(
                    "inflow-outflow needs a finite discharge and a positive depth".into(),
                ));
            }
        }
        if field.state.len() != 2 * (k + 1) * n || field.bottom.len() != (k + 1) * n {
            return Err(Error::InvalidConfig("field storage does not match mesh and degree".into()));
        }
        let tables = ReferenceTables::new(k);
        let nm = k + 1;
        let nq = tables.rule.len();
        let mut bottom_traces = Vec::with_capacity(n);
        let mut bottom_slope = vec![0.0; n * nq];
        for j in 0..n {
            let b = field.b(j);
            bottom_traces.push([tables.trace(b, 0), tables.trace(b, 1)]);
            for q in 0..nq {
                bottom_slope[j * nq + q] = (0..nm).map(|m| tables.dphi[q * nm + m] * b[m]).sum();
            }
        }
        Ok(Self {
            dx_max: field.mesh.dx_max(),
            mesh: field.mesh.clone(),
            tables,
            physics,
            bc,
            options,
            bottom: field.bottom.clone(),
            bottom_traces,
            bottom_slope,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.tables.degree
    }

    pub fn physics(&self) -> &ShallowWater {
        &self.physics
    }

    pub fn options(&self) -> &SchemeOptions {
        &self.options
    }

    pub fn boundary(&self) -> BoundaryCondition1D {
        self.bc
    }

    pub fn tables(&self) -> &ReferenceTables {
        &self.tables
    }

    fn damping_active(&self) -> bool {
        self.options.damping && self.degree() >= 1
    }

    /// Trace values at the left (`side = 0`) or right (`side = 1`) end of
    /// cell `j`, with physical derivatives up to order `k`.
    pub fn trace_values(&self, state: &[f64], j: usize, side: usize) -> TraceSet {
        let nm = self.tables.modes();
        let cell = &state[2 * nm * j..2 * nm * (j + 1)];
        let scale = 2.0 / self.mesh.dx(j);
        let mut derivs = vec![0.0; 2 * nm];
        let table = &self.tables.trace_derivs[side];
        let mut s = 1.0;
        for l in 0..nm {
            let row = &table[l * nm..(l + 1) * nm];
            let h: f64 = row.iter().zip(&cell[..nm]).map(|(t, c)| t * c).sum();
            let q: f64 = row.iter().zip(&cell[nm..]).map(|(t, c)| t * c).sum();
            derivs[2 * l] = s * h;
            derivs[2 * l + 1] = s * q;
            s *= scale;
        }
        TraceSet {
            derivs,
            b: self.bottom_traces[j][side],
        }
    }

    /// Ghost traces `(left of interface 0, right of interface N)`.
    pub fn apply_bc(&self, state: &[f64]) -> (TraceSet, TraceSet) {
        let n = self.mesh.cells();
        match self.bc {
            BoundaryCondition1D::Periodic => {
                (self.trace_values(state, n - 1, 1), self.trace_values(state, 0, 0))
            }
            BoundaryCondition1D::Transmissive => {
                (self.trace_values(state, 0, 0), self.trace_values(state, n - 1, 1))
            }
            BoundaryCondition1D::InflowOutflow { discharge_left, depth_right } => {
                let mut left = self.trace_values(state, 0, 0);
                left.derivs[1] = discharge_left;
                let mut right = self.trace_values(state, n - 1, 1);
                let inner = right.value();
                let velocity = self.physics.velocity(inner.h, inner.hu);
                let celerity = (self.physics.g * inner.h.max(0.0)).sqrt();
                // A supercritical outflow admits no downstream condition.
                // Otherwise the ghost takes the prescribed depth and the
                // velocity carried by the invariant u + 2c; this also covers
                // the fast inflow behind a bore entering from downstream.
                if velocity < celerity {
                    let c_ghost = (self.physics.g * depth_right).sqrt();
                    let u = velocity + 2.0 * (celerity - c_ghost);
                    right.derivs[0] = depth_right;
                    right.derivs[1] = depth_right * u;
                }
                (left, right)
            }
        }
    }

    fn interface_sides<'a>(
        &self,
        traces: &'a [TraceSet],
        ghosts: &'a (TraceSet, TraceSet),
        i: usize,
    ) -> (&'a TraceSet, &'a TraceSet) {
        let n = self.mesh.cells();
        let left = if i == 0 { &ghosts.0 } else { &traces[2 * (i - 1) + 1] };
        let right = if i == n { &ghosts.1 } else { &traces[2 * i] };
        (left, right)
    }

    /// Squared characteristic jumps `[l][s]` at an interface.
    fn jump_squares(&self, left: &TraceSet, right: &TraceSet) -> Vec<[f64; 2]> {
        let nm = self.tables.modes();
        let avg = interface_average(left.value().to_array(), right.value().to_array());
        let rinv = self.physics.char_matrix_1d(Conserved1D::from_array(avg));
        (0..nm)
            .map(|l| {
                let jump = [
                    right.derivs[2 * l] - left.derivs[2 * l],
                    right.derivs[2 * l + 1] - left.derivs[2 * l + 1],
                ];
                let v = rinv.apply(jump);
                [v[0] * v[0], v[1] * v[1]]
            })
            .collect()
    }

    fn all_traces(&self, state: &[f64]) -> Vec<TraceSet> {
        par::map_indices(self.options.execution, 2 * self.mesh.cells(), |i| {
            self.trace_values(state, i / 2, i % 2)
        })
    }

    /// Damping coefficients `sigma_j^l`, `l = 0..=k`, for cell `j`.
    pub fn damping_sigma(&self, state: &[f64], j: usize) -> Vec<f64> {
        let n = self.mesh.cells();
        let k = self.degree();
        if k == 0 {
            return vec![0.0];
        }
        let ghosts = self.apply_bc(state);
        let side_of = |i: usize| -> (TraceSet, TraceSet) {
            let left = if i == 0 { ghosts.0.clone() } else { self.trace_values(state, i - 1, 1) };
            let right = if i == n { ghosts.1.clone() } else { self.trace_values(state, i, 0) };
            (left, right)
        };
        let (l0, r0) = side_of(j);
        let (l1, r1) = side_of(j + 1);
        let west = self.jump_squares(&l0, &r0);
        let east = self.jump_squares(&l1, &r1);
        (0..=k)
            .map(|l| sigma_from_jumps(k, l, self.dx_max, west[l], east[l]))
            .collect()
    }

    /// Damping term in modal form for every cell, given `sigma[j][l]`.
    /// The output has the layout of the state vector and is already
    /// divided by the mass matrix.
    pub fn damping_residual(&self, state: &[f64], sigma: &[Vec<f64>]) -> Vec<f64> {
        let nm = self.tables.modes();
        let mut out = vec![0.0; state.len()];
        for (j, chunk) in out.chunks_mut(2 * nm).enumerate() {
            self.add_damping(state, j, &sigma[j], chunk);
        }
        out
    }

    fn add_damping(&self, state: &[f64], j: usize, sigma: &[f64], out: &mut [f64]) {
        let nm = self.tables.modes();
        let cell = &state[2 * nm * j..2 * nm * (j + 1)];
        let b = &self.bottom[nm * j..nm * (j + 1)];
        let inv_dx = 1.0 / self.mesh.dx(j);
        // Mode m >= 1 is removed by P^{l-1} exactly when l <= m; mode 0 never is.
        let mut cumulative = 0.0;
        for m in 0..nm {
            cumulative += sigma[m];
            if m == 0 {
                continue;
            }
            let rate = cumulative * inv_dx;
            out[m] -= rate * (cell[m] + b[m]);
            out[nm + m] -= rate * cell[nm + m];
        }
    }

    /// Semi-discrete right-hand side. Returns the mass fluxes through the
    /// left and right domain boundaries.
    pub fn residual_with_boundary_flux(&self, state: &[f64], out: &mut [f64]) -> Result<[f64; 2]> {
        let n = self.mesh.cells();
        let k = self.degree();
        let nm = k + 1;
        let exec = self.options.execution;
        let damping = self.damping_active();

        let traces = self.all_traces(state);
        let ghosts = self.apply_bc(state);

        let per_interface: Vec<(InterfaceFlux, Vec<[f64; 2]>)> = par::map_indices(exec, n + 1, |i| {
            let (left, right) = self.interface_sides(&traces, &ghosts, i);
            let iface = hydrostatic_reconstruct(left.side(), right.side());
            let (fl, fr) = self.physics.modified_interface_fluxes_1d(&iface);
            let jumps = if damping { self.jump_squares(left, right) } else { Vec::new() };
            (InterfaceFlux { left: fl, right: fr }, jumps)
        });

        let tables = &self.tables;
        let g = self.physics.g;
        let nq = tables.rule.len();
        par::for_each_chunk(exec, out, 2 * nm, |j, cell_out| {
            let cell = &state[2 * nm * j..2 * nm * (j + 1)];
            let (hc, qc) = cell.split_at(nm);
            cell_out.iter_mut().for_each(|v| *v = 0.0);
            let (out_h, out_q) = cell_out.split_at_mut(nm);
            for q in 0..nq {
                let phi = &tables.phi[q * nm..(q + 1) * nm];
                let dphi = &tables.dphi[q * nm..(q + 1) * nm];
                let h: f64 = phi.iter().zip(hc).map(|(p, c)| p * c).sum();
                let hu: f64 = phi.iter().zip(qc).map(|(p, c)| p * c).sum();
                let w = tables.rule.weights[q];
                let f = self.physics.flux_1d(Conserved1D::new(h, hu));
                let src = -g * h * self.bottom_slope[j * nq + q];
                for m in 0..nm {
                    out_h[m] += w * f[0] * dphi[m];
                    out_q[m] += w * (f[1] * dphi[m] + src * phi[m]);
                }
            }
            let east = &per_interface[j + 1].0.left;
            let west = &per_interface[j].0.right;
            let t_west = &tables.trace_derivs[0][..nm];
            let t_east = &tables.trace_derivs[1][..nm];
            for m in 0..nm {
                out_h[m] += west[0] * t_west[m] - east[0] * t_east[m];
                out_q[m] += west[1] * t_west[m] - east[1] * t_east[m];
            }
            let scale = 2.0 / self.mesh.dx(j);
            for v in out_h.iter_mut().chain(out_q.iter_mut()) {
                *v *= scale;
            }
            if damping {
                let west = &per_interface[j].1;
                let east = &per_interface[j + 1].1;
                let sigma: Vec<f64> = (0..nm)
                    .map(|l| sigma_from_jumps(k, l, self.dx_max, west[l], east[l]))
                    .collect();
                self.add_damping(state, j, &sigma, cell_out);
            }
        });

        if let Some(pos) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                cell: pos / (2 * nm),
                variable: (pos % (2 * nm)) / nm,
            });
        }
        Ok([per_interface[0].0.left[0], per_interface[n].0.left[0]])
    }

    /// Positivity-preserving scaling of every cell about its mean.
    pub fn positivity_limiter(&self, state: &mut [f64]) -> Result<()> {
        let nm = self.tables.modes();
        let table = &self.tables.phi_lobatto;
        let failure = Mutex::new(None);
        par::for_each_chunk(self.options.execution, state, 2 * nm, |j, cell| {
            let (h, rest) = cell.split_at_mut(nm);
            if let Err(e) = limit_cell(h, &mut [rest], table, FRAC_1_SQRT_2, j) {
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
        let nm = self.tables.modes();
        let table = &self.tables.phi_lobatto;
        state
            .chunks(2 * nm)
            .flat_map(|cell| {
                table
                    .chunks(nm)
                    .map(move |row| row.iter().zip(&cell[..nm]).map(|(p, c)| p * c).sum::<f64>())
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|u| + c` over the check points and the ghost states; an
    /// inflow ghost can be much faster than the water inside.
    pub fn max_wave_speed(&self, state: &[f64]) -> f64 {
        let nm = self.tables.modes();
        let table = &self.tables.phi_lobatto;
        let (west, east) = self.apply_bc(state);
        let mut best = self
            .physics
            .max_wave_speed_1d(west.value())
            .max(self.physics.max_wave_speed_1d(east.value()));
        for cell in state.chunks(2 * nm) {
            for row in table.chunks(nm) {
                let h: f64 = row.iter().zip(&cell[..nm]).map(|(p, c)| p * c).sum();
                let q: f64 = row.iter().zip(&cell[nm..]).map(|(p, c)| p * c).sum();
                best = best.max(self.physics.max_wave_speed_1d(Conserved1D::new(h, q)));
            }
        }
        best
    }
}

impl SemiDiscrete for Solver1D {
    fn residual(&self, state: &[f64], out: &mut [f64]) -> Result<f64> {
        self.residual_with_boundary_flux(state, out).map(|[west, east]| east - west)
    }

    fn limit(&self, state: &mut [f64]) -> Result<()> {
        if self.options.limiter {
            self.positivity_limiter(state)
        } else {
            Ok(())
        }
    }

    fn stable_dt(&self, state: &[f64], cfl: f64) -> Result<f64> {
        dt_1d(cfl, self.mesh.dx_min(), self.max_wave_speed(state))
    }

    fn mass(&self, state: &[f64]) -> f64 {
        let nm = self.tables.modes();
        (0..self.mesh.cells())
            .map(|j| self.mesh.dx(j) * FRAC_1_SQRT_2 * state[2 * nm * j])
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{truncate_projection, ModalPoly, QuadratureRule};
    use crate::physics::GRAVITY;
    use proptest::prelude::*;

    fn smooth_bump(x: f64) -> f64 {
        5.0 * (-0.4 * (x - 5.0) * (x - 5.0)).exp()
    }

    fn step_bottom(x: f64) -> f64 {
        if (4.0..=8.0).contains(&x) {
            4.0
        } else {
            0.0
        }
    }

    fn still_water(bottom: fn(f64) -> f64, k: usize, cells: usize) -> DGField1D {
        let mesh = Mesh1D::uniform(0.0, 10.0, cells).unwrap();
        project_initial_data(&mesh, k, bottom, InitialDepth::Surface(&|_| 10.0), |_| 0.0)
    }

    fn solver(field: &DGField1D, bc: BoundaryCondition1D) -> Solver1D {
        Solver1D::new(field, ShallowWater::default(), bc, SchemeOptions::default()).unwrap()
    }

    fn residual(s: &Solver1D, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; state.len()];
        s.residual(state, &mut out).unwrap();
        out
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Rounding noise of the momentum balance: a few ulps of the
    /// hydrostatic pressure flux `g H² / dx` that cancels in every cell.
    fn roundoff_tolerance(depth: f64, dx: f64) -> f64 {
        1e-14 * GRAVITY * depth * depth / dx
    }

    #[test]
    fn mesh_validation() {
        assert!(Mesh1D::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Mesh1D::new(vec![0.0]).is_err());
        let m = Mesh1D::new(vec![0.0, 0.5, 2.0]).unwrap();
        assert_eq!(m.dx_max(), 1.5);
        assert_eq!(m.locate(0.5), Some(1));
        assert_eq!(m.locate(2.0), Some(1));
        assert_eq!(m.locate(2.5), None);
    }

    #[test]
    fn constant_projection_is_mode_zero_only() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        let f = project_initial_data(&mesh, 2, |_| 0.0, InitialDepth::Depth(&|_| 2.0), |_| 0.5);
        for j in 0..4 {
            assert!((f.h(j)[0] - 2.0 * 2f64.sqrt()).abs() < 1e-14);
            assert!(f.h(j)[1..].iter().all(|c| c.abs() < 1e-15));
            assert!(f.hu(j)[1..].iter().all(|c| c.abs() < 1e-15));
        }
    }

    #[test]
    fn surface_projection_is_exactly_flat() {
        let f = still_water(smooth_bump, 2, 200);
        for j in 0..200 {
            let eta: Vec<f64> = f.h(j).iter().zip(f.b(j)).map(|(h, b)| h + b).collect();
            assert!((eta[0] - 10.0 * 2f64.sqrt()).abs() < 1e-13);
            assert!(eta[1..].iter().all(|c| c.abs() < 1e-13));
        }
    }

    #[test]
    fn trace_values_of_linear_field() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 1).unwrap();
        let f = project_initial_data(&mesh, 1, |_| 0.0, InitialDepth::Depth(&|x| x), |_| 3.0);
        let s = solver(&f, BoundaryCondition1D::Transmissive);
        let l = s.trace_values(&f.state, 0, 0);
        let r = s.trace_values(&f.state, 0, 1);
        assert!(l.derivs[0].abs() < 1e-15 && (r.derivs[0] - 1.0).abs() < 1e-15);
        assert!((l.derivs[1] - 3.0).abs() < 1e-15);
        // first derivative of h is 1 everywhere
        assert!((l.derivs[2] - 1.0).abs() < 1e-14 && (r.derivs[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ghost_traces() {
        let mesh = Mesh1D::uniform(0.0, 25.0, 10).unwrap();
        let f = project_initial_data(&mesh, 1, |_| 0.0, InitialDepth::Depth(&|x| 1.0 + 0.01 * x), |_| 0.2);
        let periodic = solver(&f, BoundaryCondition1D::Periodic);
        let (gl, gr) = periodic.apply_bc(&f.state);
        assert_eq!(gl, periodic.trace_values(&f.state, 9, 1));
        assert_eq!(gr, periodic.trace_values(&f.state, 0, 0));
        let open = solver(&f, BoundaryCondition1D::Transmissive);
        let (gl, gr) = open.apply_bc(&f.state);
        assert_eq!(gl, open.trace_values(&f.state, 0, 0));
        assert_eq!(gr, open.trace_values(&f.state, 9, 1));
        let io = solver(
            &f,
            BoundaryCondition1D::InflowOutflow { discharge_left: 1.53, depth_right: 0.66 },
        );
        let (gl, gr) = io.apply_bc(&f.state);
        assert_eq!(gl.derivs[1], 1.53);
        assert!((gl.derivs[0] - 1.0).abs() < 1e-14);
        assert_eq!(gr.derivs[0], 0.66);
        // subcritical outflow: u + 2c carried out of the domain
        let (hi, g) = (1.25, GRAVITY);
        let u = 0.2 / hi + 2.0 * ((g * hi).sqrt() - (g * 0.66).sqrt());
        assert!((gr.derivs[1] - 0.66 * u).abs() < 1e-13);
        // a fast inflow ghost bounds the time step
        let jet = solver(&f, BoundaryCondition1D::InflowOutflow { discharge_left: 20.0, depth_right: 0.66 });
        assert!(jet.max_wave_speed(&f.state) >= 20.0 / 1.0 + g.sqrt() - 1e-9);
        // supercritical outflow: nothing is prescribed
        let fast = project_initial_data(&mesh, 1, |_| 0.0, InitialDepth::Depth(&|_| 0.1), |_| 2.0);
        let io = solver(
            &fast,
            BoundaryCondition1D::InflowOutflow { discharge_left: 2.0, depth_right: 0.66 },
        );
        assert_eq!(io.apply_bc(&fast.state).1, io.trace_values(&fast.state, 9, 1));
        assert!(Solver1D::new(
            &f,
            ShallowWater::default(),
            BoundaryCondition1D::InflowOutflow { discharge_left: 1.0, depth_right: 0.0 },
            SchemeOptions::default()
        )
        .is_err());
    }

    #[test]
    fn sigma_hand_example() {
        let s = sigma_from_jumps(1, 0, 0.1, [0.01, 0.0], [0.01, 0.0]);
        assert!((s - 0.2828427).abs() < 1e-7);
        assert!((damping_prefactor(2, 2, 0.1) - 2.0 * 5.0 / 3.0 * 0.01 / 2.0).abs() < 1e-16);
    }

    #[test]
    fn sigma_vanishes_for_constant_state() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 8).unwrap();
        let f = project_initial_data(&mesh, 2, |_| 0.0, InitialDepth::Depth(&|_| 1.3), |_| 0.4);
        let s = solver(&f, BoundaryCondition1D::Periodic);
        for j in 0..8 {
            let sig = s.damping_sigma(&f.state, j);
            assert!(sig.iter().all(|v| v.abs() < 1e-12), "{sig:?}");
        }
    }

    #[test]
    fn damping_matches_direct_quadrature() {
        let k = 1;
        let mesh = Mesh1D::new(vec![0.0, 0.3]).unwrap();
        let f = project_initial_data(&mesh, k, |x| 0.2 * x, InitialDepth::Depth(&|x| 1.0 + 2.0 * x), |x| x);
        let s = solver(&f, BoundaryCondition1D::Transmissive);
        let sig = 0.7;
        let d = s.damping_residual(&f.state, &[vec![sig, sig]]);
        let dx = 0.3;
        let rule = QuadratureRule::gauss(4);
        let tilde = [
            ModalPoly::new(f.h(0).iter().zip(f.b(0)).map(|(h, b)| h + b).collect()),
            ModalPoly::new(f.hu(0).to_vec()),
        ];
        for (var, u) in tilde.iter().enumerate() {
            for m in 0..=k {
                let mut integral = 0.0;
                for l in 0..=k {
                    let p = truncate_projection(u, l as isize - 1);
                    let phi = |xi: f64| {
                        let mut e = ModalPoly::zero(k);
                        e.coeffs[m] = 1.0;
                        e.eval(xi)
                    };
                    integral += -sig / dx * rule.integrate(|xi| (u.eval(xi) - p.eval(xi)) * phi(xi)) * dx / 2.0;
                }
                let expected = integral / (dx / 2.0);
                assert!((d[var * (k + 1) + m] - expected).abs() < 1e-13, "var {var} mode {m}");
            }
        }
        // mode 1 coefficient a1 is damped by 2 sigma / dx
        let a1 = tilde[0].coeffs[1];
        assert!((d[1] + 2.0 * sig / dx * a1).abs() < 1e-13);
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn still_water_residual_vanishes() {
        for bottom in [smooth_bump as fn(f64) -> f64, step_bottom] {
            for k in 1..=3 {
                let f = still_water(bottom, k, 50);
                for bc in [BoundaryCondition1D::Periodic, BoundaryCondition1D::Transmissive] {
                    let s = solver(&f, bc);
                    let r = max_abs(&residual(&s, &f.state));
                    let tol = roundoff_tolerance(10.0, 0.2);
                    assert!(r <= tol, "k={k} {bc:?}: {r:e} > {tol:e}");
                }
            }
        }
    }

    #[test]
    fn constant_state_flat_bottom_is_steady() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 16).unwrap();
        let f = project_initial_data(&mesh, 2, |_| 0.0, InitialDepth::Depth(&|_| 2.0), |_| 0.7);
        let s = solver(&f, BoundaryCondition1D::Periodic);
        let r = max_abs(&residual(&s, &f.state));
        assert!(r <= roundoff_tolerance(2.0, 1.0 / 16.0), "{r:e}");
    }

    #[test]
    fn mass_residual_telescopes() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 40).unwrap();
        let pi2 = 2.0 * std::f64::consts::PI;
        let f = project_initial_data(
            &mesh,
            2,
            |x| (std::f64::consts::PI * x).sin().powi(2),
            InitialDepth::Depth(&|x| 5.0 + (pi2 * x).cos().exp()),
            |x| (pi2 * x).cos().sin(),
        );
        let s = solver(&f, BoundaryCondition1D::Periodic);
        let mut out = vec![0.0; f.state.len()];
        let rate = s.residual(&f.state, &mut out).unwrap();
        assert_eq!(rate, 0.0);
        let dm: f64 = (0..40).map(|j| mesh.dx(j) * FRAC_1_SQRT_2 * out[6 * j]).sum();
        assert!(dm.abs() < 1e-12, "{dm}");
    }

    #[test]
    fn damping_silent_on_smooth_continuous_traces() {
        // a global linear function is continuous with continuous derivatives
        let mesh = Mesh1D::uniform(0.0, 1.0, 10).unwrap();
        let f = project_initial_data(&mesh, 1, |_| 0.0, InitialDepth::Depth(&|x| 1.0 + 0.1 * x), |_| 0.0);
        let s = solver(&f, BoundaryCondition1D::Transmissive);
        for j in 1..9 {
            assert!(s.damping_sigma(&f.state, j).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn positivity_limiter_preserves_means() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 20).unwrap();
        let mut f = project_initial_data(&mesh, 2, |_| 0.0, InitialDepth::Depth(&|x| (x - 0.5).abs() * 0.2), |x| x);
        // push some cells negative at their ends
        for j in 0..20 {
            f.state[6 * j + 2] += 0.05;
        }
        let opts = SchemeOptions { limiter: true, ..SchemeOptions::default() };
        let s = Solver1D::new(&f, ShallowWater::default(), BoundaryCondition1D::Transmissive, opts).unwrap();
        let before = f.state.clone();
        let mut after = f.state.clone();
        s.limit(&mut after).unwrap();
        assert!(s.min_depth(&before) < 0.0);
        assert!(s.min_depth(&after) >= -1e-15);
        for j in 0..20 {
            assert_eq!(before[6 * j], after[6 * j]);
            assert_eq!(before[6 * j + 3], after[6 * j + 3]);
        }
        let mut again = after.clone();
        s.limit(&mut again).unwrap();
        assert_eq!(again, after);
    }

    #[test]
    fn nan_is_reported_with_cell() {
        let f = still_water(smooth_bump, 1, 10);
        let s = solver(&f, BoundaryCondition1D::Transmissive);
        let mut state = f.state.clone();
        state[4 * 3 + 2] = f64::NAN;
        let mut out = vec![0.0; state.len()];
        let err = s.residual(&state, &mut out).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    proptest! {
        #[test]
        fn sigma_is_non_negative(values in proptest::collection::vec(0.5f64..2.0, 24)) {
            let mesh = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
            let mut f = project_initial_data(&mesh, 2, |_| 0.0, InitialDepth::Depth(&|_| 1.0), |_| 0.0);
            for (s, v) in f.state.iter_mut().zip(&values) {
                *s = v - 1.0 + *s;
            }
            let s = solver(&f, BoundaryCondition1D::Periodic);
            for j in 0..4 {
                prop_assert!(s.damping_sigma(&f.state, j).iter().all(|v| *v >= 0.0));
            }
        }

        #[test]
        fn still_water_balance_for_random_bottoms(
            steps in proptest::collection::vec(-1.0f64..1.0, 12),
            level in 3.0f64..5.0,
        ) {
            let mesh = Mesh1D::uniform(0.0, 1.2, 12).unwrap();
            let b = move |x: f64| steps[((x / 0.1) as usize).min(11)] + 0.3 * x * x;
            let f = project_initial_data(&mesh, 2, &b, InitialDepth::Surface(&|_| level), |_| 0.0);
            let s = solver(&f, BoundaryCondition1D::Transmissive);
            let depth = level + 1.0;
            prop_assert!(max_abs(&residual(&s, &f.state)) <= roundoff_tolerance(depth, 0.1));
        }
    }
}
