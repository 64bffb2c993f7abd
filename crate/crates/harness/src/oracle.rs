//! Analytic steady states of channel flow over a bump, from Bernoulli's
//! invariant `q²/(2h²) + g(h + b) = E` with constant discharge `q`.

/// Which root of the Bernoulli relation to follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Supercritical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bernoulli {
    pub g: f64,
    pub q: f64,
    pub energy: f64,
}

impl Bernoulli {
    /// Critical depth `(q²/g)^(1/3)`.
    pub fn critical_depth(&self) -> f64 {
        (self.q * self.q / self.g).cbrt()
    }

    /// Flow whose energy is fixed by a known depth at a point with bottom `b`.
    pub fn from_depth(g: f64, q: f64, h: f64, b: f64) -> Self {
        Self {
            g,
            q,
            energy: q * q / (2.0 * h * h) + g * (h + b),
        }
    }

    /// Flow that is exactly critical where the bottom reaches `b_crest`.
    pub fn critical_at_crest(g: f64, q: f64, b_crest: f64) -> Self {
        let hc = (q * q / g).cbrt();
        Self::from_depth(g, q, hc, b_crest)
    }

    fn residual(&self, h: f64, b: f64) -> f64 {
        self.q * self.q / (2.0 * h * h) + self.g * (h + b) - self.energy
    }

    /// Depth over bottom `b` on the requested branch, by bisection. Where
    /// the energy is too low for any root (only possible by rounding at a
    /// critical crest) the critical depth is returned.
    pub fn depth(&self, b: f64, regime: Regime) -> f64 {
        let hc = self.critical_depth();
        if self.residual(hc, b) >= 0.0 {
            return hc;
        }
        let (mut lo, mut hi) = match regime {
            Regime::Subcritical => {
                let mut hi = 2.0 * hc.max(1e-3);
                while self.residual(hi, b) < 0.0 {
                    hi *= 2.0;
                }
                (hc, hi)
            }
            Regime::Supercritical => {
                let mut lo = 0.5 * hc;
                while self.residual(lo, b) < 0.0 {
                    lo *= 0.5;
                }
                (lo, hc)
            }
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            // the residual decreases in h on the supercritical branch and
            // increases on the subcritical one
            let positive = self.residual(mid, b) > 0.0;
            let go_up = match regime {
                Regime::Subcritical => !positive,
                Regime::Supercritical => positive,
            };
            if go_up {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Steady depth for the transcritical case: subcritical upstream of the
/// crest at `x_crest`, supercritical downstream.
pub fn transcritical_depth(flow: &Bernoulli, x: f64, b: f64, x_crest: f64) -> f64 {
    let regime = if x <= x_crest { Regime::Subcritical } else { Regime::Supercritical };
    flow.depth(b, regime)
}
