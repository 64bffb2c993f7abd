//! Registry of the benchmark problems.

use std::f64::consts::PI;

use swe_ofdg::{BoundaryCondition1D, BoundaryCondition2D, GRAVITY};

/// Initial water column: either the free surface `h + b` or the depth `h`.
#[derive(Clone, Copy, Debug)]
pub enum Initial1D {
    Surface(fn(f64) -> f64),
    Depth(fn(f64) -> f64),
}

#[derive(Clone, Copy, Debug)]
pub enum Initial2D {
    Surface(fn(f64, f64) -> f64),
    Depth(fn(f64, f64) -> f64),
}

#[derive(Clone, Debug)]
pub struct Case1D {
    pub domain: (f64, f64),
    pub bottom: fn(f64) -> f64,
    pub initial: Initial1D,
    pub discharge: fn(f64) -> f64,
    pub bc: BoundaryCondition1D,
    pub cells: usize,
}

impl Case1D {
    /// Initial depth `h_0(x)`.
    pub fn depth(&self, x: f64) -> f64 {
        match self.initial {
            Initial1D::Surface(eta) => eta(x) - (self.bottom)(x),
            Initial1D::Depth(h) => h(x),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Case2D {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub bottom: fn(f64, f64) -> f64,
    pub initial: Initial2D,
    pub hu: fn(f64, f64) -> f64,
    pub hv: fn(f64, f64) -> f64,
    pub bc: BoundaryCondition2D,
    pub cells: (usize, usize),
}

impl Case2D {
    pub fn depth(&self, x: f64, y: f64) -> f64 {
        match self.initial {
            Initial2D::Surface(eta) => eta(x, y) - (self.bottom)(x, y),
            Initial2D::Depth(h) => h(x, y),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Setup {
    OneD(Case1D),
    TwoD(Case2D),
}

/// What a case is meant to exercise, which decides the default analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    /// Still water that must be preserved to round-off.
    WellBalance,
    /// Smooth periodic flow for a-posteriori convergence studies.
    Accuracy,
    /// Transient flow compared against finer runs.
    Transient,
    /// Flow that relaxes to a steady state with a Bernoulli solution.
    SteadyFlow,
}

#[derive(Clone, Debug)]
pub struct BenchmarkCase {
    pub id: &'static str,
    pub summary: &'static str,
    pub kind: CaseKind,
    pub setup: Setup,
    pub t_final: f64,
    /// Snapshot times besides `t_final`.
    pub output_times: Vec<f64>,
    pub limiter: bool,
    pub g: f64,
}

impl BenchmarkCase {
    pub fn dimension(&self) -> usize {
        match self.setup {
            Setup::OneD(_) => 1,
            Setup::TwoD(_) => 2,
        }
    }

    pub fn default_cells(&self) -> Vec<usize> {
        match &self.setup {
            Setup::OneD(c) => vec![c.cells],
            Setup::TwoD(c) => vec![c.cells.0, c.cells.1],
        }
    }
}

fn zero(_: f64) -> f64 {
    0.0
}

fn zero2(_: f64, _: f64) -> f64 {
    0.0
}

pub fn smooth_bump(x: f64) -> f64 {
    5.0 * (-0.4 * (x - 5.0).powi(2)).exp()
}

pub fn step_bottom(x: f64) -> f64 {
    if (4.0..=8.0).contains(&x) {
        4.0
    } else {
        0.0
    }
}

fn level_10(_: f64) -> f64 {
    10.0
}

pub fn drywet_bottom(x: f64) -> f64 {
    (0.25 - 5.0 * (x - 0.5).powi(2)).max(0.0)
}

pub fn drywet_surface(x: f64) -> f64 {
    drywet_bottom(x).max(0.2)
}

pub fn accuracy_bottom(x: f64) -> f64 {
    (PI * x).sin().powi(2)
}

pub fn accuracy_depth(x: f64) -> f64 {
    5.0 + (2.0 * PI * x).cos().exp()
}

pub fn accuracy_discharge(x: f64) -> f64 {
    (2.0 * PI * x).cos().sin()
}

pub fn perturbation_bottom(x: f64) -> f64 {
    if (1.4..=1.6).contains(&x) {
        0.25 * ((10.0 * PI * (x - 1.5)).cos() + 1.0)
    } else {
        0.0
    }
}

fn pulse(x: f64, eps: f64) -> f64 {
    if (1.1..=1.2).contains(&x) {
        1.0 + eps
    } else {
        1.0
    }
}

pub fn perturbation_surface_big(x: f64) -> f64 {
    pulse(x, 0.2)
}

pub fn perturbation_surface_small(x: f64) -> f64 {
    pulse(x, 0.001)
}

pub fn dambreak_bottom(x: f64) -> f64 {
    if (x - 750.0).abs() <= 187.5 {
        8.0
    } else {
        0.0
    }
}

pub fn dambreak_surface(x: f64) -> f64 {
    if x <= 750.0 {
        20.0
    } else {
        15.0
    }
}

pub fn channel_bottom(x: f64) -> f64 {
    if (8.0..=12.0).contains(&x) {
        0.2 - 0.05 * (x - 10.0).powi(2)
    } else {
        0.0
    }
}

fn level_half(_: f64) -> f64 {
    0.5
}

pub fn gaussian_bottom(x: f64, y: f64) -> f64 {
    0.8 * (-50.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).exp()
}

fn level_1(_: f64, _: f64) -> f64 {
    1.0
}

pub fn accuracy_bottom_2d(x: f64, y: f64) -> f64 {
    (2.0 * PI * x).sin() + (2.0 * PI * y).cos()
}

pub fn accuracy_depth_2d(x: f64, y: f64) -> f64 {
    10.0 + (2.0 * PI * x).sin().exp() * (2.0 * PI * y).cos()
}

pub fn accuracy_hu_2d(x: f64, y: f64) -> f64 {
    (2.0 * PI * x).cos().sin() * (2.0 * PI * y).sin()
}

pub fn accuracy_hv_2d(x: f64, y: f64) -> f64 {
    (2.0 * PI * x).cos() * (2.0 * PI * y).sin().cos()
}

pub fn elongated_bump(x: f64, y: f64) -> f64 {
    0.8 * (-5.0 * (x - 0.9).powi(2) - 50.0 * (y - 0.5).powi(2)).exp()
}

pub fn perturbation_surface_2d(x: f64, _: f64) -> f64 {
    if (0.05..=0.15).contains(&x) {
        1.01
    } else {
        1.0
    }
}

/// Discharge prescribed at the inflow of each channel case, and the
/// outflow depth.
pub const TRANSCRITICAL: (f64, f64) = (1.53, 0.66);
pub const TRANSSHOCK: (f64, f64) = (0.18, 0.33);
pub const SUBCRITICAL: (f64, f64) = (4.42, 2.0);

fn channel(id: &'static str, summary: &'static str, (q, h): (f64, f64), kind: CaseKind) -> BenchmarkCase {
    BenchmarkCase {
        id,
        summary,
        kind,
        setup: Setup::OneD(Case1D {
            domain: (0.0, 25.0),
            bottom: channel_bottom,
            initial: Initial1D::Surface(level_half),
            discharge: zero,
            bc: BoundaryCondition1D::InflowOutflow {
                discharge_left: q,
                depth_right: h,
            },
            cells: 200,
        }),
        t_final: 200.0,
        output_times: vec![],
        limiter: false,
        g: GRAVITY,
    }
}

pub fn registry() -> Vec<BenchmarkCase> {
    let wb1 = |id, summary, bottom: fn(f64) -> f64| BenchmarkCase {
        id,
        summary,
        kind: CaseKind::WellBalance,
        setup: Setup::OneD(Case1D {
            domain: (0.0, 10.0),
            bottom,
            initial: Initial1D::Surface(level_10),
            discharge: zero,
            // Both bottoms take equal values at the two ends, so the still
            // water is periodic.
            bc: BoundaryCondition1D::Periodic,
            cells: 200,
        }),
        t_final: 0.5,
        output_times: vec![],
        limiter: false,
        g: GRAVITY,
    };
    let perturbation = |id, summary, surface: fn(f64) -> f64| BenchmarkCase {
        id,
        summary,
        kind: CaseKind::Transient,
        setup: Setup::OneD(Case1D {
            domain: (0.0, 2.0),
            bottom: perturbation_bottom,
            initial: Initial1D::Surface(surface),
            discharge: zero,
            bc: BoundaryCondition1D::Transmissive,
            cells: 200,
        }),
        t_final: 0.2,
        output_times: vec![],
        limiter: false,
        g: GRAVITY,
    };
    vec![
        wb1("wellbalance-1d-smooth", "still water h+b=10 over a smooth Gaussian bump", smooth_bump),
        wb1("wellbalance-1d-step", "still water h+b=10 over a rectangular step", step_bottom),
        BenchmarkCase {
            id: "wellbalance-1d-drywet",
            summary: "still water with a dry island, positivity limiter on",
            kind: CaseKind::WellBalance,
            setup: Setup::OneD(Case1D {
                domain: (0.0, 1.0),
                bottom: drywet_bottom,
                initial: Initial1D::Surface(drywet_surface),
                discharge: zero,
                bc: BoundaryCondition1D::Periodic,
                cells: 200,
            }),
            t_final: 0.5,
            output_times: vec![],
            limiter: true,
            g: GRAVITY,
        },
        BenchmarkCase {
            id: "accuracy-1d",
            summary: "smooth periodic flow over sin^2 bottom",
            kind: CaseKind::Accuracy,
            setup: Setup::OneD(Case1D {
                domain: (0.0, 1.0),
                bottom: accuracy_bottom,
                initial: Initial1D::Depth(accuracy_depth),
                discharge: accuracy_discharge,
                bc: BoundaryCondition1D::Periodic,
                cells: 160,
            }),
            t_final: 0.1,
            output_times: vec![],
            limiter: false,
            g: GRAVITY,
        },
        perturbation("perturbation-1d-big", "pulse of height 0.2 over a cosine hump", perturbation_surface_big),
        perturbation("perturbation-1d-small", "pulse of height 0.001 over a cosine hump", perturbation_surface_small),
        BenchmarkCase {
            id: "dambreak-1d",
            summary: "dam break over a rectangular bump",
            kind: CaseKind::Transient,
            setup: Setup::OneD(Case1D {
                domain: (0.0, 1500.0),
                bottom: dambreak_bottom,
                initial: Initial1D::Surface(dambreak_surface),
                discharge: zero,
                bc: BoundaryCondition1D::Transmissive,
                cells: 400,
            }),
            t_final: 60.0,
            output_times: vec![15.0],
            limiter: false,
            g: GRAVITY,
        },
        channel(
            "bump-transcritical",
            "transcritical flow over a parabolic bump without a shock",
            TRANSCRITICAL,
            CaseKind::SteadyFlow,
        ),
        channel(
            "bump-transshock",
            "transcritical flow over a parabolic bump with a standing shock",
            TRANSSHOCK,
            CaseKind::Transient,
        ),
        channel(
            "bump-subcritical",
            "subcritical flow over a parabolic bump",
            SUBCRITICAL,
            CaseKind::SteadyFlow,
        ),
        BenchmarkCase {
            id: "wellbalance-2d",
            summary: "still water h+b=1 over a Gaussian hump",
            kind: CaseKind::WellBalance,
            setup: Setup::TwoD(Case2D {
                x: (0.0, 1.0),
                y: (0.0, 1.0),
                bottom: gaussian_bottom,
                initial: Initial2D::Surface(level_1),
                hu: zero2,
                hv: zero2,
                bc: BoundaryCondition2D::Periodic,
                cells: (100, 100),
            }),
            t_final: 0.1,
            output_times: vec![],
            limiter: false,
            g: GRAVITY,
        },
        BenchmarkCase {
            id: "accuracy-2d",
            summary: "smooth periodic 2D flow",
            kind: CaseKind::Accuracy,
            setup: Setup::TwoD(Case2D {
                x: (0.0, 1.0),
                y: (0.0, 1.0),
                bottom: accuracy_bottom_2d,
                initial: Initial2D::Depth(accuracy_depth_2d),
                hu: accuracy_hu_2d,
                hv: accuracy_hv_2d,
                bc: BoundaryCondition2D::Periodic,
                cells: (40, 40),
            }),
            t_final: 0.05,
            output_times: vec![],
            limiter: false,
            g: GRAVITY,
        },
        BenchmarkCase {
            id: "perturbation-2d",
            summary: "small surface perturbation passing an elongated hump",
            kind: CaseKind::Transient,
            setup: Setup::TwoD(Case2D {
                x: (0.0, 2.0),
                y: (0.0, 1.0),
                bottom: elongated_bump,
                initial: Initial2D::Surface(perturbation_surface_2d),
                hu: zero2,
                hv: zero2,
                bc: BoundaryCondition2D::Transmissive,
                cells: (200, 100),
            }),
            t_final: 0.6,
            output_times: vec![0.12, 0.24, 0.36, 0.48],
            limiter: false,
            g: GRAVITY,
        },
    ]
}

pub fn find(id: &str) -> Option<BenchmarkCase> {
    registry().into_iter().find(|c| c.id == id)
}

pub fn ids() -> Vec<&'static str> {
    registry().iter().map(|c| c.id).collect()
}
