//! A-posteriori convergence studies: the error on mesh `N` is measured
//! against the solution on `2N`.

use serde::{Deserialize, Serialize};

use crate::cases::BenchmarkCase;
use crate::norms::{self, Norms};
use crate::runner::{run_case, Field, NamedNorms, RunSettings};
use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub cells: Vec<usize>,
    pub errors: Vec<NamedNorms>,
    /// Orders relative to the previous row, in the same layout; `None` on
    /// the first row.
    pub orders: Option<Vec<NamedNorms>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub case: String,
    pub degree: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn row(&self, cells: &[usize]) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.cells == cells)
    }

    /// `(l1, l2, linf)` order of `variable` at the row for `cells`.
    pub fn order(&self, cells: &[usize], variable: &str) -> Option<Norms> {
        self.row(cells)?
            .orders
            .as_ref()?
            .iter()
            .find(|n| n.variable == variable)
            .map(|n| n.norms)
    }

    /// Plain-text table for terminals.
    pub fn render(&self) -> String {
        let mut s = format!("{} k={}\n", self.case, self.degree);
        s.push_str(&format!(
            "{:>10} {:>4} {:>11} {:>7} {:>11} {:>7} {:>11} {:>7}\n",
            "cells", "var", "L1", "order", "L2", "order", "Linf", "order"
        ));
        for row in &self.rows {
            let cells: Vec<String> = row.cells.iter().map(|n| n.to_string()).collect();
            for (i, e) in row.errors.iter().enumerate() {
                let o = row.orders.as_ref().map(|o| o[i].norms);
                let of = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
                s.push_str(&format!(
                    "{:>10} {:>4} {:>11.3e} {:>7} {:>11.3e} {:>7} {:>11.3e} {:>7}\n",
                    cells.join("x"),
                    e.variable,
                    e.norms.l1,
                    of(o.map(|o| o.l1)),
                    e.norms.l2,
                    of(o.map(|o| o.l2)),
                    e.norms.linf,
                    of(o.map(|o| o.linf)),
                ));
            }
        }
        s
    }
}

fn difference(coarse: &Field, fine: &Field) -> Result<Vec<NamedNorms>, HarnessError> {
    let pack = |names: &[&str], v: &[Norms]| {
        names
            .iter()
            .zip(v)
            .map(|(n, v)| NamedNorms {
                variable: n.to_string(),
                norms: *v,
            })
            .collect()
    };
    match (coarse, fine) {
        (Field::OneD(c), Field::OneD(f)) => Ok(pack(&["h", "hu"], &norms::errors_between_1d(c, f)?)),
        (Field::TwoD(c), Field::TwoD(f)) => Ok(pack(&["h", "hu", "hv"], &norms::errors_between_2d(c, f)?)),
        _ => Err(HarnessError::MeshMismatch("1D and 2D fields".into())),
    }
}

fn orders(prev: &[NamedNorms], cur: &[NamedNorms]) -> Vec<NamedNorms> {
    prev.iter()
        .zip(cur)
        .map(|(p, c)| NamedNorms {
            variable: c.variable.clone(),
            norms: Norms {
                l1: norms::order(p.norms.l1, c.norms.l1),
                l2: norms::order(p.norms.l2, c.norms.l2),
                linf: norms::order(p.norms.linf, c.norms.linf),
            },
        })
        .collect()
}

/// Runs `base` refined by `2^0 .. 2^levels` (so `levels + 1` runs) and
/// tabulates the `levels` a-posteriori errors. Runs are distributed over
/// the rayon pool when `base.sequential` is false.
pub fn study(case: &BenchmarkCase, base: &RunSettings, levels: usize) -> Result<ConvergenceTable, HarnessError> {
    if levels < 1 {
        return Err(HarnessError::InvalidConfig("a convergence study needs at least one refinement".into()));
    }
    let settings: Vec<RunSettings> = (0..=levels)
        .map(|l| RunSettings {
            cells: base.cells.iter().map(|n| n << l).collect(),
            output_times: Vec::new(),
            ..base.clone()
        })
        .collect();
    let run = |s: &RunSettings| run_case(case, s).map(|o| o.final_field().clone());
    #[cfg(feature = "parallel")]
    let fields: Vec<Result<Field, HarnessError>> = if base.sequential {
        settings.iter().map(run).collect()
    } else {
        use rayon::prelude::*;
        settings.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let fields: Vec<Result<Field, HarnessError>> = settings.iter().map(run).collect();
    let fields = fields.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for l in 0..levels {
        let errors = difference(&fields[l], &fields[l + 1])?;
        let orders = rows.last().map(|p| orders(&p.errors, &errors));
        rows.push(ConvergenceRow {
            cells: settings[l].cells.clone(),
            errors,
            orders,
        });
    }
    Ok(ConvergenceTable {
        case: case.id.to_string(),
        degree: base.degree,
        rows,
    })
}
