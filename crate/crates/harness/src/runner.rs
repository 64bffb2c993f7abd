//! Runs a registered case and analyses the result.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use swe_ofdg::solver2d::InitialDepth2D;
use swe_ofdg::timestep::default_cfl;
use swe_ofdg::{
    project_initial_data, project_initial_data_2d, DGField1D, DGField2D, Execution, InitialDepth, Mesh1D,
    Mesh2D, SchemeOptions, SemiDiscrete, ShallowWater, Simulation, Solver1D, Solver2D,
};

use crate::cases::{BenchmarkCase, Case1D, Case2D, CaseKind, Initial1D, Initial2D, Setup};
use crate::norms::{self, Norms};
use crate::oracle::{transcritical_depth, Bernoulli, Regime};
use crate::{cases, HarnessError};

/// Effective parameters of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub degree: usize,
    /// `[N]` in 1D, `[Nx, Ny]` in 2D.
    pub cells: Vec<usize>,
    pub cfl: f64,
    pub t_final: f64,
    pub limiter: bool,
    pub damping: bool,
    pub sequential: bool,
    /// Snapshot times strictly before `t_final`.
    pub output_times: Vec<f64>,
}

impl RunSettings {
    pub fn defaults(case: &BenchmarkCase, degree: usize) -> Self {
        Self {
            degree,
            cells: case.default_cells(),
            cfl: default_cfl(degree),
            t_final: case.t_final,
            limiter: case.limiter,
            damping: true,
            sequential: false,
            output_times: case.output_times.clone(),
        }
    }

    fn options(&self) -> SchemeOptions {
        SchemeOptions {
            damping: self.damping,
            limiter: self.limiter,
            execution: if self.sequential { Execution::Sequential } else { Execution::Parallel },
        }
    }

    pub fn validate(&self, case: &BenchmarkCase) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.cells.len() != case.dimension() {
            return bad(format!("{} expects {} cell count(s), got {:?}", case.id, case.dimension(), self.cells));
        }
        if self.cells.iter().any(|&n| n == 0) {
            return bad("cell counts must be positive".into());
        }
        if self.degree > 6 {
            return bad(format!("polynomial degree {} is not supported (max 6)", self.degree));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return bad(format!("cfl must be positive, got {}", self.cfl));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if self.output_times.iter().any(|&t| !(t > 0.0)) {
            return bad("output times must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    OneD(DGField1D),
    TwoD(DGField2D),
}

impl Field {
    pub fn mass(&self) -> f64 {
        match self {
            Field::OneD(f) => f.total_mass(),
            Field::TwoD(f) => f.total_mass(),
        }
    }

    pub fn as_1d(&self) -> Option<&DGField1D> {
        match self {
            Field::OneD(f) => Some(f),
            Field::TwoD(_) => None,
        }
    }

    pub fn as_2d(&self) -> Option<&DGField2D> {
        match self {
            Field::TwoD(f) => Some(f),
            Field::OneD(_) => None,
        }
    }

    fn with_state(&self, state: Vec<f64>) -> Field {
        match self {
            Field::OneD(f) => Field::OneD(DGField1D { state, ..f.clone() }),
            Field::TwoD(f) => Field::TwoD(DGField2D { state, ..f.clone() }),
        }
    }

    fn state(&self) -> &[f64] {
        match self {
            Field::OneD(f) => &f.state,
            Field::TwoD(f) => &f.state,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub field: Field,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub case: String,
    pub settings: RunSettings,
    /// Projected initial data, before any limiting.
    pub initial: Field,
    /// Requested output times followed by the final state.
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub wall_seconds: f64,
    pub initial_mass: f64,
    pub final_mass: f64,
    /// Water that left through the boundary.
    pub outflow: f64,
    /// Smallest water height at the positivity check points over all
    /// steps; only tracked with the limiter on.
    pub min_depth: Option<f64>,
}

impl RunOutcome {
    pub fn final_field(&self) -> &Field {
        &self.snapshots.last().expect("at least the final snapshot").field
    }

    /// `|M(T) + outflow - M(0)| / M(0)`.
    pub fn relative_mass_defect(&self) -> f64 {
        (self.final_mass + self.outflow - self.initial_mass).abs() / self.initial_mass.abs()
    }
}

pub fn project_1d(case: &Case1D, degree: usize, cells: usize) -> Result<DGField1D, swe_ofdg::Error> {
    let mesh = Mesh1D::uniform(case.domain.0, case.domain.1, cells)?;
    let f = match case.initial {
        Initial1D::Surface(f) | Initial1D::Depth(f) => f,
    };
    let depth = match case.initial {
        Initial1D::Surface(_) => InitialDepth::Surface(&f),
        Initial1D::Depth(_) => InitialDepth::Depth(&f),
    };
    Ok(project_initial_data(&mesh, degree, case.bottom, depth, case.discharge))
}

pub fn project_2d(case: &Case2D, degree: usize, (nx, ny): (usize, usize)) -> Result<DGField2D, swe_ofdg::Error> {
    let mesh = Mesh2D::new(nx, ny, case.x, case.y)?;
    let f = match case.initial {
        Initial2D::Surface(f) | Initial2D::Depth(f) => f,
    };
    let depth = match case.initial {
        Initial2D::Surface(_) => InitialDepth2D::Surface(&f),
        Initial2D::Depth(_) => InitialDepth2D::Depth(&f),
    };
    Ok(project_initial_data_2d(&mesh, degree, case.bottom, depth, case.hu, case.hv))
}

fn integrate<S: SemiDiscrete>(
    system: S,
    mut state: Vec<f64>,
    template: &Field,
    settings: &RunSettings,
    track_depth: Option<&dyn Fn(&S, &[f64]) -> f64>,
) -> Result<(Vec<Snapshot>, usize, f64, Option<f64>), swe_ofdg::Error> {
    system.limit(&mut state)?;
    let mut min_depth = track_depth.map(|f| f(&system, &state));
    let mut sim = Simulation::new(system, state, settings.cfl)?;
    let mut stops: Vec<f64> = settings
        .output_times
        .iter()
        .copied()
        .filter(|&t| t < settings.t_final)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(settings.t_final);
    let mut snapshots = Vec::with_capacity(stops.len());
    for stop in stops {
        sim.advance_with(stop, |s| {
            if let (Some(f), Some(m)) = (track_depth, min_depth.as_mut()) {
                *m = m.min(f(s.system(), s.state()));
            }
        })?;
        snapshots.push(Snapshot {
            time: stop,
            field: template.with_state(sim.state().to_vec()),
        });
    }
    Ok((snapshots, sim.steps(), sim.boundary_outflow(), min_depth))
}

/// Projects the initial data and integrates to `t_final`.
pub fn run_case(case: &BenchmarkCase, settings: &RunSettings) -> Result<RunOutcome, HarnessError> {
    settings.validate(case)?;
    let wrap = |source: swe_ofdg::Error| HarnessError::Solver {
        case: case.id.to_string(),
        degree: settings.degree,
        cells: settings.cells.clone(),
        source,
    };
    let physics = ShallowWater::new(case.g);
    let start = Instant::now();
    let (initial, result) = match &case.setup {
        Setup::OneD(c) => {
            let field = project_1d(c, settings.degree, settings.cells[0]).map_err(wrap)?;
            let solver = Solver1D::new(&field, physics, c.bc, settings.options()).map_err(wrap)?;
            let depth = |s: &Solver1D, u: &[f64]| s.min_depth(u);
            let track: Option<&dyn Fn(&Solver1D, &[f64]) -> f64> = settings.limiter.then_some(&depth);
            let initial = Field::OneD(field);
            let result = integrate(solver, initial.state().to_vec(), &initial, settings, track);
            (initial, result)
        }
        Setup::TwoD(c) => {
            let field = project_2d(c, settings.degree, (settings.cells[0], settings.cells[1])).map_err(wrap)?;
            let solver = Solver2D::new(&field, physics, c.bc, settings.options()).map_err(wrap)?;
            let depth = |s: &Solver2D, u: &[f64]| s.min_depth(u);
            let track: Option<&dyn Fn(&Solver2D, &[f64]) -> f64> = settings.limiter.then_some(&depth);
            let initial = Field::TwoD(field);
            let result = integrate(solver, initial.state().to_vec(), &initial, settings, track);
            (initial, result)
        }
    };
    let (snapshots, steps, outflow, min_depth) = result.map_err(wrap)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let initial_mass = initial.mass();
    let final_mass = snapshots.last().map(|s| s.field.mass()).unwrap_or(initial_mass);
    Ok(RunOutcome {
        case: case.id.to_string(),
        settings: settings.clone(),
        initial,
        snapshots,
        steps,
        wall_seconds,
        initial_mass,
        final_mass,
        outflow,
        min_depth,
    })
}

/// Per-variable norms with names, for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedNorms {
    pub variable: String,
    #[serde(flatten)]
    pub norms: Norms,
}

fn named<const N: usize>(names: [&str; N], values: [Norms; N]) -> Vec<NamedNorms> {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| NamedNorms {
            variable: n.to_string(),
            norms: v,
        })
        .collect()
}

/// Summary of one run, written next to the snapshots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub case: String,
    pub errors: Vec<NamedNorms>,
    /// What `errors` are measured against.
    pub reference: String,
    pub relative_mass_defect: f64,
    pub min_depth: Option<f64>,
    pub steps: usize,
    pub wall_seconds: f64,
}

/// Bernoulli solution for a channel case at `x`, if the case has one.
pub fn steady_reference(case: &BenchmarkCase) -> Option<impl Fn(f64) -> (f64, f64)> {
    let Setup::OneD(c) = &case.setup else { return None };
    let swe_ofdg::BoundaryCondition1D::InflowOutflow { discharge_left: q, depth_right } = c.bc else {
        return None;
    };
    let g = case.g;
    let flow = match case.id {
        "bump-transcritical" => (Bernoulli::critical_at_crest(g, q, 0.2), true),
        "bump-subcritical" => (Bernoulli::from_depth(g, q, depth_right, 0.0), false),
        _ => return None,
    };
    let bottom = c.bottom;
    Some(move |x: f64| {
        let b = bottom(x);
        let h = if flow.1 {
            transcritical_depth(&flow.0, x, b, 10.0)
        } else {
            flow.0.depth(b, Regime::Subcritical)
        };
        (h, q)
    })
}

/// Errors appropriate to the case: deviation from the initial state for
/// still water, from the Bernoulli solution for steady channel flow, and
/// none otherwise.
pub fn analyse(case: &BenchmarkCase, outcome: &RunOutcome) -> ErrorReport {
    let (errors, reference) = match (case.kind, outcome.final_field(), &outcome.initial) {
        (CaseKind::WellBalance, Field::OneD(f), Field::OneD(init)) => (
            named(["h", "hu"], norms::errors_between_same_mesh_1d(f, init).expect("same mesh")),
            "initial still water".to_string(),
        ),
        (CaseKind::WellBalance, Field::TwoD(f), Field::TwoD(init)) => (
            named(["h", "hu", "hv"], norms::errors_between_same_mesh_2d(f, init).expect("same mesh")),
            "initial still water".to_string(),
        ),
        (CaseKind::SteadyFlow, Field::OneD(f), _) => match steady_reference(case) {
            Some(exact) => {
                let surface = norms::surface_error_vs_function_1d(f, |x| exact(x).0 + cases::channel_bottom(x));
                let [_, hu] = norms::errors_vs_function_1d(f, |x| {
                    let (h, q) = exact(x);
                    [h, q]
                });
                (named(["h+b", "hu"], [surface, hu]), "Bernoulli steady state".to_string())
            }
            None => (Vec::new(), "none".to_string()),
        },
        _ => (Vec::new(), "none".to_string()),
    };
    ErrorReport {
        case: case.id.to_string(),
        errors,
        reference,
        relative_mass_defect: outcome.relative_mass_defect(),
        min_depth: outcome.min_depth,
        steps: outcome.steps,
        wall_seconds: outcome.wall_seconds,
    }
}
