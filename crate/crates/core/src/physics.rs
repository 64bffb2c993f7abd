//! Shallow-water constitutive relations: fluxes, wave speeds, characteristic
//! matrices, and the hydrostatic reconstruction of interface states.

/// Gravitational acceleration used by every benchmark (m/s²).
pub const GRAVITY: f64 = 9.812;

/// Depth below which a state is treated as dry.
pub const DEFAULT_DRY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Conserved1D {
    pub h: f64,
    pub hu: f64,
}

impl Conserved1D {
    pub fn new(h: f64, hu: f64) -> Self {
        Self { h, hu }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.h, self.hu]
    }

    pub fn from_array([h, hu]: [f64; 2]) -> Self {
        Self { h, hu }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Conserved2D {
    pub h: f64,
    pub hu: f64,
    pub hv: f64,
}

impl Conserved2D {
    pub fn new(h: f64, hu: f64, hv: f64) -> Self {
        Self { h, hu, hv }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.h, self.hu, self.hv]
    }

    pub fn from_array([h, hu, hv]: [f64; 3]) -> Self {
        Self { h, hu, hv }
    }
}

/// What the characteristic transform becomes when the averaged interface
/// state is dry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DryCharacteristics {
    /// The analytic matrix evaluated at `c = 0`, `u = v = 0`. Water-height
    /// jumps next to dry land then produce no damping.
    #[default]
    ZeroCelerity,
    /// The identity, so damping acts on jumps of the conserved variables.
    Identity,
}

/// Row scaling of the characteristic matrices. The damping coefficients are
/// not invariant under it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CharacteristicScaling {
    /// The exact inverse of the right-eigenvector matrix with columns
    /// `(1, u ∓ c n₁, v ∓ c n₂)` and shear vector `(0, -c n₂, c n₁)`, so
    /// characteristic jumps are measured in units of depth. Equals the
    /// printed matrices divided by `2c`.
    #[default]
    Normalized,
    /// Rows `(c + u, -1), (c - u, 1)` in 1D and
    /// `(c + u·n, n), 2(u n₂ - v n₁, -n₂, n₁), (c + u·n, -n)` in 2D, taken
    /// as written without the `1/(2c)` factor.
    Printed,
}

/// Left characteristic matrix `R^{-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharMatrix<const N: usize>(pub [[f64; N]; N]);

impl<const N: usize> CharMatrix<N> {
    pub fn identity() -> Self {
        let mut m = [[0.0; N]; N];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self(m)
    }

    pub fn apply(&self, v: [f64; N]) -> [f64; N] {
        let mut out = [0.0; N];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        out
    }

    fn scale_rows(mut self, s: [f64; N]) -> Self {
        for (row, f) in self.0.iter_mut().zip(s) {
            row.iter_mut().for_each(|a| *a *= f);
        }
        self
    }
}

/// Bottom and conserved values on one side of an interface.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SideTrace<S> {
    pub state: S,
    pub b: f64,
}

/// Interface traces together with the hydrostatically reconstructed states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceData<S> {
    pub left: SideTrace<S>,
    pub right: SideTrace<S>,
    pub b_star: f64,
    pub h_star_left: f64,
    pub h_star_right: f64,
    pub star_left: S,
    pub star_right: S,
}

/// `max(0, h + b - b*)`, exact when the side already sits at `b*`.
#[inline]
fn star_depth(h: f64, b: f64, b_star: f64) -> f64 {
    if b >= b_star {
        h.max(0.0)
    } else {
        (h + b - b_star).max(0.0)
    }
}

/// Hydrostatic reconstruction: `b* = max(b-, b+)`,
/// `h*± = max(0, (h + b)± - b*)`; discharges are carried over unchanged.
pub fn hydrostatic_reconstruct(
    left: SideTrace<Conserved1D>,
    right: SideTrace<Conserved1D>,
) -> InterfaceData<Conserved1D> {
    let b_star = left.b.max(right.b);
    let h_star_left = star_depth(left.state.h, left.b, b_star);
    let h_star_right = star_depth(right.state.h, right.b, b_star);
    InterfaceData {
        left,
        right,
        b_star,
        h_star_left,
        h_star_right,
        star_left: Conserved1D::new(h_star_left, left.state.hu),
        star_right: Conserved1D::new(h_star_right, right.state.hu),
    }
}

/// Two-dimensional counterpart of [`hydrostatic_reconstruct`].
pub fn hydrostatic_reconstruct_2d(
    left: SideTrace<Conserved2D>,
    right: SideTrace<Conserved2D>,
) -> InterfaceData<Conserved2D> {
    let b_star = left.b.max(right.b);
    let h_star_left = star_depth(left.state.h, left.b, b_star);
    let h_star_right = star_depth(right.state.h, right.b, b_star);
    InterfaceData {
        left,
        right,
        b_star,
        h_star_left,
        h_star_right,
        star_left: Conserved2D::new(h_star_left, left.state.hu, left.state.hv),
        star_right: Conserved2D::new(h_star_right, right.state.hu, right.state.hv),
    }
}

/// `½(F(ul) + F(ur)) - (α/2)(ur - ul)`.
pub fn lax_friedrichs<const N: usize>(
    ul: [f64; N],
    ur: [f64; N],
    flux: impl Fn([f64; N]) -> [f64; N],
    alpha: f64,
) -> [f64; N] {
    let fl = flux(ul);
    let fr = flux(ur);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = 0.5 * (fl[i] + fr[i]) - 0.5 * alpha * (ur[i] - ul[i]);
    }
    out
}

/// Arithmetic mean of two states.
pub fn interface_average<const N: usize>(ul: [f64; N], ur: [f64; N]) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = 0.5 * (ul[i] + ur[i]);
    }
    out
}

/// Coordinate direction of a Cartesian edge normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Physical parameters shared by both solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShallowWater {
    pub g: f64,
    pub h_dry: f64,
    pub dry_characteristics: DryCharacteristics,
    pub char_scaling: CharacteristicScaling,
}

impl Default for ShallowWater {
    fn default() -> Self {
        Self::new(GRAVITY)
    }
}

impl ShallowWater {
    pub fn new(g: f64) -> Self {
        Self {
            g,
            h_dry: DEFAULT_DRY_TOLERANCE,
            dry_characteristics: DryCharacteristics::default(),
            char_scaling: CharacteristicScaling::default(),
        }
    }

    /// `hu / h` above the dry tolerance, zero below it.
    #[inline]
    pub fn velocity(&self, h: f64, hu: f64) -> f64 {
        if h >= self.h_dry {
            hu / h
        } else {
            0.0
        }
    }

    #[inline]
    fn celerity(&self, h: f64) -> f64 {
        (self.g * h.max(0.0)).sqrt()
    }

    #[inline]
    pub fn flux_1d(&self, u: Conserved1D) -> [f64; 2] {
        let vel = self.velocity(u.h, u.hu);
        [u.hu, u.hu * vel + 0.5 * self.g * u.h * u.h]
    }

    /// `(F, G)` for a 2D state.
    #[inline]
    pub fn flux_2d(&self, u: Conserved2D) -> ([f64; 3], [f64; 3]) {
        let vx = self.velocity(u.h, u.hu);
        let vy = self.velocity(u.h, u.hv);
        let p = 0.5 * self.g * u.h * u.h;
        (
            [u.hu, u.hu * vx + p, u.hu * vy],
            [u.hv, u.hv * vx, u.hv * vy + p],
        )
    }

    /// Flux along one coordinate axis.
    #[inline]
    pub fn flux_axis(&self, u: Conserved2D, axis: Axis) -> [f64; 3] {
        let p = 0.5 * self.g * u.h * u.h;
        match axis {
            Axis::X => {
                let vx = self.velocity(u.h, u.hu);
                [u.hu, u.hu * vx + p, u.hv * vx]
            }
            Axis::Y => {
                let vy = self.velocity(u.h, u.hv);
                [u.hv, u.hu * vy, u.hv * vy + p]
            }
        }
    }

    /// `|u| + sqrt(g h)`, or zero for a dry state.
    #[inline]
    pub fn max_wave_speed_1d(&self, u: Conserved1D) -> f64 {
        if u.h < self.h_dry {
            return 0.0;
        }
        (u.hu / u.h).abs() + self.celerity(u.h)
    }

    /// Wave speed along `axis`.
    #[inline]
    pub fn max_wave_speed_axis(&self, u: Conserved2D, axis: Axis) -> f64 {
        if u.h < self.h_dry {
            return 0.0;
        }
        let un = match axis {
            Axis::X => u.hu,
            Axis::Y => u.hv,
        } / u.h;
        un.abs() + self.celerity(u.h)
    }

    pub fn char_matrix_1d(&self, avg: Conserved1D) -> CharMatrix<2> {
        let (c, u) = if avg.h >= self.h_dry {
            (self.celerity(avg.h), avg.hu / avg.h)
        } else {
            match self.dry_characteristics {
                DryCharacteristics::Identity => return CharMatrix::identity(),
                // Only momentum jumps count next to dry land.
                DryCharacteristics::ZeroCelerity => return CharMatrix([[0.0, -1.0], [0.0, 1.0]]),
            }
        };
        let m = CharMatrix([[c + u, -1.0], [c - u, 1.0]]);
        match self.char_scaling {
            CharacteristicScaling::Printed => m,
            CharacteristicScaling::Normalized => m.scale_rows([0.5 / c; 2]),
        }
    }

    /// `R^{-1}` for the normal Jacobian `n1 F' + n2 G'`.
    pub fn char_matrix_2d(&self, avg: Conserved2D, n: [f64; 2]) -> CharMatrix<3> {
        let [n1, n2] = n;
        let (c, u, v) = if avg.h >= self.h_dry {
            (self.celerity(avg.h), avg.hu / avg.h, avg.hv / avg.h)
        } else {
            return match (self.dry_characteristics, self.char_scaling) {
                (DryCharacteristics::Identity, _) => CharMatrix::identity(),
                (DryCharacteristics::ZeroCelerity, CharacteristicScaling::Printed) => {
                    CharMatrix([[0.0, n1, n2], [0.0, -2.0 * n2, 2.0 * n1], [0.0, -n1, -n2]])
                }
                (DryCharacteristics::ZeroCelerity, CharacteristicScaling::Normalized) => {
                    CharMatrix([[0.0, -n1, -n2], [0.0, -n2, n1], [0.0, n1, n2]])
                }
            };
        };
        let un = u * n1 + v * n2;
        let shear = u * n2 - v * n1;
        match self.char_scaling {
            CharacteristicScaling::Printed => CharMatrix([
                [c + un, n1, n2],
                [2.0 * shear, -2.0 * n2, 2.0 * n1],
                [c + un, -n1, -n2],
            ]),
            CharacteristicScaling::Normalized => CharMatrix([
                [c + un, -n1, -n2],
                [shear, -n2, n1],
                [c - un, n1, n2],
            ])
            .scale_rows([0.5 / c, 1.0 / c, 0.5 / c]),
        }
    }

    /// Momentum-corrected fluxes `(F^l, F^r)` at a 1D interface: the
    /// Lax-Friedrichs flux of the reconstructed states plus
    /// `(g/2)(h² - h*²)` in the momentum component of each side.
    pub fn modified_interface_fluxes_1d(
        &self,
        iface: &InterfaceData<Conserved1D>,
    ) -> ([f64; 2], [f64; 2]) {
        let alpha = self
            .max_wave_speed_1d(iface.star_left)
            .max(self.max_wave_speed_1d(iface.star_right));
        let base = lax_friedrichs(
            iface.star_left.to_array(),
            iface.star_right.to_array(),
            |s| self.flux_1d(Conserved1D::from_array(s)),
            alpha,
        );
        let half_g = 0.5 * self.g;
        let hl = iface.left.state.h;
        let hr = iface.right.state.h;
        let left = [
            base[0],
            base[1] + half_g * (hl * hl - iface.h_star_left * iface.h_star_left),
        ];
        let right = [
            base[0],
            base[1] + half_g * (hr * hr - iface.h_star_right * iface.h_star_right),
        ];
        (left, right)
    }

    /// 2D edge analogue of [`Self::modified_interface_fluxes_1d`] for an
    /// edge normal to `axis`; only the normal momentum is corrected.
    pub fn modified_interface_fluxes_2d(
        &self,
        iface: &InterfaceData<Conserved2D>,
        axis: Axis,
    ) -> ([f64; 3], [f64; 3]) {
        let alpha = self
            .max_wave_speed_axis(iface.star_left, axis)
            .max(self.max_wave_speed_axis(iface.star_right, axis));
        let base = lax_friedrichs(
            iface.star_left.to_array(),
            iface.star_right.to_array(),
            |s| self.flux_axis(Conserved2D::from_array(s), axis),
            alpha,
        );
        let half_g = 0.5 * self.g;
        let hl = iface.left.state.h;
        let hr = iface.right.state.h;
        let idx = match axis {
            Axis::X => 1,
            Axis::Y => 2,
        };
        let mut left = base;
        let mut right = base;
        left[idx] += half_g * (hl * hl - iface.h_star_left * iface.h_star_left);
        right[idx] += half_g * (hr * hr - iface.h_star_right * iface.h_star_right);
        (left, right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sw() -> ShallowWater {
        ShallowWater::new(GRAVITY)
    }

    fn side(h: f64, b: f64, hu: f64) -> SideTrace<Conserved1D> {
        SideTrace {
            state: Conserved1D::new(h, hu),
            b,
        }
    }

    #[test]
    fn fluxes() {
        let sw = sw();
        assert_eq!(sw.flux_1d(Conserved1D::new(0.0, 0.0)), [0.0, 0.0]);
        let f = sw.flux_1d(Conserved1D::new(2.0, 3.0));
        assert_relative_eq!(f[0], 3.0);
        assert_relative_eq!(f[1], 24.124, epsilon = 1e-12);
        assert_relative_eq!(sw.flux_1d(Conserved1D::new(1.0, 0.0))[1], 4.906, epsilon = 1e-12);

        let (f, g) = sw.flux_2d(Conserved2D::new(1.0, 2.0, 3.0));
        for (a, b) in f.iter().zip([2.0, 8.906, 6.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        for (a, b) in g.iter().zip([3.0, 6.0, 13.906]) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        let (f, _) = sw.flux_2d(Conserved2D::new(4.0, 0.0, 0.0));
        assert_relative_eq!(f[1], 78.496, epsilon = 1e-12);
        assert_eq!(sw.flux_2d(Conserved2D::default()), ([0.0; 3], [0.0; 3]));
    }

    #[test]
    fn flux_axis_agrees_with_pair() {
        let sw = sw();
        let u = Conserved2D::new(1.3, -0.4, 0.9);
        let (f, g) = sw.flux_2d(u);
        assert_eq!(sw.flux_axis(u, Axis::X), f);
        assert_eq!(sw.flux_axis(u, Axis::Y), g);
    }

    #[test]
    fn wave_speeds() {
        let sw = sw();
        let c = GRAVITY.sqrt();
        assert_relative_eq!(sw.max_wave_speed_1d(Conserved1D::new(1.0, 0.0)), c);
        assert_relative_eq!(sw.max_wave_speed_1d(Conserved1D::new(1.0, 2.0)), 2.0 + c);
        assert_eq!(sw.max_wave_speed_1d(Conserved1D::new(0.0, 0.0)), 0.0);
        assert_eq!(sw.max_wave_speed_1d(Conserved1D::new(1e-12, 1e-3)), 0.0);
    }

    fn printed() -> ShallowWater {
        ShallowWater {
            char_scaling: CharacteristicScaling::Printed,
            ..sw()
        }
    }

    fn mat_mul<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> [[f64; N]; N] {
        let mut out = [[0.0; N]; N];
        for i in 0..N {
            for j in 0..N {
                out[i][j] = (0..N).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    #[test]
    fn normalized_matrices_invert_eigenvectors() {
        let sw = sw();
        let (h, u, v) = (2.0, 0.7, -0.3);
        let c = (GRAVITY * h).sqrt();
        let l = sw.char_matrix_1d(Conserved1D::new(h, h * u)).0;
        let r = [[1.0, 1.0], [u - c, u + c]];
        let p = mat_mul(&l, &r);
        assert_relative_eq!(p[0][0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(p[0][1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(p[1][0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(p[1][1], 1.0, epsilon = 1e-14);
        // still water: the acoustic rows see half of a depth jump each
        let m = sw.char_matrix_1d(Conserved1D::new(1.0, 0.0));
        assert_eq!(m.apply([1.0, 0.0]), [0.5, 0.5]);

        let n = [0.6, 0.8];
        let l = sw.char_matrix_2d(Conserved2D::new(h, h * u, h * v), n).0;
        let r = [
            [1.0, 0.0, 1.0],
            [u - c * n[0], -c * n[1], u + c * n[0]],
            [v - c * n[1], c * n[0], v + c * n[1]],
        ];
        let p = mat_mul(&l, &r);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(p[i][j], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        // the shear row is the printed one divided by 2c
        let printed = printed().char_matrix_2d(Conserved2D::new(h, h * u, h * v), n).0;
        for j in 0..3 {
            assert_relative_eq!(2.0 * c * l[1][j], printed[1][j], epsilon = 1e-14);
        }
    }

    #[test]
    fn char_matrices() {
        let sw = printed();
        let c = GRAVITY.sqrt();
        let m = sw.char_matrix_1d(Conserved1D::new(1.0, 0.0));
        assert_eq!(m.0, [[c, -1.0], [c, 1.0]]);
        let v = m.apply([1.0, 0.0]);
        assert_relative_eq!(v[0], c);
        assert_relative_eq!(v[1], c);

        let m = sw.char_matrix_2d(Conserved2D::new(1.0, 0.0, 0.0), [1.0, 0.0]);
        assert_eq!(m.0, [[c, 1.0, 0.0], [0.0, 0.0, 2.0], [c, -1.0, 0.0]]);
        let m = sw.char_matrix_2d(Conserved2D::new(1.0, 0.0, 0.0), [0.0, 1.0]);
        assert_eq!(m.0, [[c, 0.0, 1.0], [0.0, -2.0, 0.0], [c, 0.0, -1.0]]);
    }

    #[test]
    fn dry_char_matrix_fallbacks() {
        let mut sw = sw();
        let dry = Conserved1D::new(1e-12, 0.0);
        assert_eq!(sw.char_matrix_1d(dry).0, [[0.0, -1.0], [0.0, 1.0]]);
        assert_eq!(
            sw.char_matrix_2d(Conserved2D::new(0.0, 0.0, 0.0), [1.0, 0.0]).0,
            [[0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]
        );
        sw.char_scaling = CharacteristicScaling::Printed;
        assert_eq!(sw.char_matrix_1d(dry).0, [[0.0, -1.0], [0.0, 1.0]]);
        sw.dry_characteristics = DryCharacteristics::Identity;
        assert_eq!(sw.char_matrix_1d(dry), CharMatrix::identity());
        let dry2 = Conserved2D::new(0.0, 0.0, 0.0);
        assert_eq!(sw.char_matrix_2d(dry2, [1.0, 0.0]), CharMatrix::identity());
    }

    #[test]
    fn char_matrix_2d_normal_flip() {
        let sw = sw();
        let u = Conserved2D::new(2.0, 0.6, -0.2);
        let p = sw.char_matrix_2d(u, [1.0, 0.0]).0;
        let m = sw.char_matrix_2d(u, [-1.0, 0.0]).0;
        for r in 0..3 {
            // the last two columns are linear in n
            assert_relative_eq!(p[r][1], -m[r][1]);
            assert_relative_eq!(p[r][2], -m[r][2]);
        }
    }

    #[test]
    fn reconstruction_examples() {
        let d = hydrostatic_reconstruct(side(10.0, 0.0, 0.0), side(6.0, 4.0, 0.0));
        assert_eq!(d.b_star, 4.0);
        assert_eq!(d.h_star_left, 6.0);
        assert_eq!(d.h_star_right, 6.0);

        let d = hydrostatic_reconstruct(side(1.5, 0.7, 0.3), side(2.5, 0.7, -0.1));
        assert_eq!(d.b_star, 0.7);
        assert_eq!(d.star_left, Conserved1D::new(1.5, 0.3));
        assert_eq!(d.star_right, Conserved1D::new(2.5, -0.1));

        let d = hydrostatic_reconstruct(side(3.0, 0.0, 0.0), side(1.0, 4.0, 0.0));
        assert_eq!(d.h_star_left, 0.0);
    }

    #[test]
    fn lax_friedrichs_examples() {
        let sw = sw();
        let f = |s: [f64; 2]| sw.flux_1d(Conserved1D::from_array(s));
        assert_eq!(lax_friedrichs([1.0, 0.0], [1.0, 0.0], f, 3.0), f([1.0, 0.0]));
        let out = lax_friedrichs([2.0, 0.0], [1.0, 0.0], f, 10.0);
        assert_relative_eq!(out[0], 5.0);
        assert_relative_eq!(out[1], 12.265, epsilon = 1e-12);
    }

    #[test]
    fn averages() {
        assert_eq!(interface_average([1.0, 0.0], [3.0, 0.0]), [2.0, 0.0]);
        assert_eq!(interface_average([1.0, 1.0], [2.0, 3.0]), [1.5, 2.0]);
        assert_eq!(interface_average([0.3, 0.7], [0.3, 0.7]), [0.3, 0.7]);
    }

    #[test]
    fn modified_fluxes() {
        let sw = sw();
        // flat bottom, continuous trace
        let u = Conserved1D::new(1.7, 0.4);
        let d = hydrostatic_reconstruct(SideTrace { state: u, b: 0.2 }, SideTrace { state: u, b: 0.2 });
        let (fl, fr) = sw.modified_interface_fluxes_1d(&d);
        assert_eq!(fl, sw.flux_1d(u));
        assert_eq!(fr, sw.flux_1d(u));

        let d = hydrostatic_reconstruct(side(10.0, 0.0, 0.0), side(6.0, 4.0, 0.0));
        let (fl, fr) = sw.modified_interface_fluxes_1d(&d);
        let correction = 0.5 * GRAVITY * (100.0 - 36.0);
        assert_relative_eq!(correction, 313.984, epsilon = 1e-12);
        assert_relative_eq!(fl[1], 0.5 * GRAVITY * 100.0, epsilon = 1e-12);
        assert_relative_eq!(fr[1], 0.5 * GRAVITY * 36.0, epsilon = 1e-12);
        assert_eq!(fl[0], 0.0);
        assert_eq!(fr[0], 0.0);
    }

    #[test]
    fn edge_flux_corrects_normal_momentum_only() {
        let sw = sw();
        let l = SideTrace { state: Conserved2D::new(0.8, 0.0, 0.0), b: 0.2 };
        let r = SideTrace { state: Conserved2D::new(0.5, 0.0, 0.0), b: 0.5 };
        let d = hydrostatic_reconstruct_2d(l, r);
        let (fl, fr) = sw.modified_interface_fluxes_2d(&d, Axis::Y);
        assert_eq!(fl[0], 0.0);
        assert_eq!(fl[1], 0.0);
        assert_relative_eq!(fl[2], 0.5 * GRAVITY * 0.64, epsilon = 1e-14);
        assert_relative_eq!(fr[2], 0.5 * GRAVITY * 0.25, epsilon = 1e-14);
        let (fl, _) = sw.modified_interface_fluxes_2d(&d, Axis::X);
        assert_relative_eq!(fl[1], 0.5 * GRAVITY * 0.64, epsilon = 1e-14);
        assert_eq!(fl[2], 0.0);
    }

    proptest! {
        #[test]
        fn lf_consistency(h in 0.0f64..20.0, hu in -10.0f64..10.0, alpha in 0.0f64..50.0) {
            let sw = sw();
            let u = [h, hu];
            let f = |s: [f64; 2]| sw.flux_1d(Conserved1D::from_array(s));
            prop_assert_eq!(lax_friedrichs(u, u, f, alpha), f(u));
        }

        #[test]
        fn reconstruction_identities(
            hl in 0.0f64..5.0, hr in 0.0f64..5.0,
            bl in -2.0f64..2.0, br in -2.0f64..2.0,
            ql in -3.0f64..3.0, qr in -3.0f64..3.0,
        ) {
            let d = hydrostatic_reconstruct(side(hl, bl, ql), side(hr, br, qr));
            prop_assert!(d.h_star_left >= 0.0 && d.h_star_right >= 0.0);
            prop_assert_eq!(d.star_left.hu, ql);
            prop_assert_eq!(d.star_right.hu, qr);
            let flat = hydrostatic_reconstruct(side(hl, bl, ql), side(hr, bl, qr));
            prop_assert_eq!(flat.star_left, Conserved1D::new(hl, ql));
            prop_assert_eq!(flat.star_right, Conserved1D::new(hr, qr));
        }

        #[test]
        fn mass_flux_single_valued(
            hl in 0.0f64..5.0, hr in 0.0f64..5.0,
            bl in -2.0f64..2.0, br in -2.0f64..2.0,
            ql in -3.0f64..3.0, qr in -3.0f64..3.0,
        ) {
            let sw = sw();
            let d = hydrostatic_reconstruct(side(hl, bl, ql), side(hr, br, qr));
            let (fl, fr) = sw.modified_interface_fluxes_1d(&d);
            prop_assert_eq!(fl[0].to_bits(), fr[0].to_bits());
        }

        #[test]
        fn still_water_interface_balance(eta in 2.5f64..5.0, bl in -2.0f64..2.0, br in -2.0f64..2.0) {
            let sw = sw();
            let (hl, hr) = (eta - bl, eta - br);
            let d = hydrostatic_reconstruct(side(hl, bl, 0.0), side(hr, br, 0.0));
            let (fl, fr) = sw.modified_interface_fluxes_1d(&d);
            prop_assert!(fl[0].abs() <= 1e-13 * eta);
            prop_assert!((fl[1] - 0.5 * GRAVITY * hl * hl).abs() <= 1e-13 * hl * hl);
            prop_assert!((fr[1] - 0.5 * GRAVITY * hr * hr).abs() <= 1e-13 * hr * hr);
        }

        #[test]
        fn normalized_2d_is_left_inverse(h in 0.01f64..10.0, hu in -5.0f64..5.0, hv in -5.0f64..5.0, th in 0.0f64..6.3) {
            let (c, u, v) = ((GRAVITY * h).sqrt(), hu / h, hv / h);
            let n = [th.cos(), th.sin()];
            let l = sw().char_matrix_2d(Conserved2D::new(h, hu, hv), n).0;
            let r = [
                [1.0, 0.0, 1.0],
                [u - c * n[0], -c * n[1], u + c * n[0]],
                [v - c * n[1], c * n[0], v + c * n[1]],
            ];
            let p = mat_mul(&l, &r);
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((p[i][j] - want).abs() < 1e-12, "{:?}", p);
                }
            }
        }

        #[test]
        fn char_matrix_entries(h in 0.01f64..10.0, hu in -5.0f64..5.0, hv in -5.0f64..5.0, th in 0.0f64..6.3) {
            let sw = printed();
            let (c, u, v) = ((GRAVITY * h).sqrt(), hu / h, hv / h);
            let m = sw.char_matrix_1d(Conserved1D::new(h, hu)).0;
            prop_assert!((m[0][0] - (c + u)).abs() < 1e-14 * (1.0 + c + u.abs()));
            prop_assert!((m[1][0] - (c - u)).abs() < 1e-14 * (1.0 + c + u.abs()));
            let n = [th.cos(), th.sin()];
            let m = sw.char_matrix_2d(Conserved2D::new(h, hu, hv), n).0;
            let un = c + u * n[0] + v * n[1];
            let scale = 1.0 + c + u.abs() + v.abs();
            prop_assert!((m[0][0] - un).abs() < 1e-14 * scale);
            prop_assert!((m[2][0] - un).abs() < 1e-14 * scale);
            prop_assert!((m[1][0] - 2.0 * (u * n[1] - v * n[0])).abs() < 1e-14 * scale);
            prop_assert_eq!([m[0][1], m[0][2], m[1][1], m[1][2], m[2][1], m[2][2]],
                [n[0], n[1], -2.0 * n[1], 2.0 * n[0], -n[0], -n[1]]);
        }
    }
}
