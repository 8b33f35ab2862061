//! Modal state-feedback synthesis.
//!
//! The closed loop uses `u = -(k_pos*P + k_vel*V + k_tilt*φ + k_rate*φ̇)`.
//! Its characteristic polynomial is
//!
//! ```text
//! s⁴ + (kd + kp·kd·k_rate)s³ + kp·kd(1 + k_tilt)s² + g·kp·kd·k_vel·s + g·kp·kd·k_pos
//! ```
//!
//! so every gain is fixed by exactly one coefficient of the desired quartic.
//! The desired roots are one damped pair `-r_l ± i·im_l` and one undamped pair
//! `±i·im_r`; the undamped pair is what lets two agents exchange momentum
//! without losing kinetic energy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{AgentState, PlantParams};

const CONJUGATE_TOL: f64 = 1e-9;
const IMAG_RESIDUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleSpec {
    /// Real part magnitude of the damped pair (1/s).
    pub r_l: f64,
    /// Imaginary part of the damped pair (1/s).
    pub im_l: f64,
    /// Imaginary part of the undamped pair (1/s).
    pub im_r: f64,
}

impl PoleSpec {
    pub fn new(r_l: f64, im_l: f64, im_r: f64) -> Result<Self> {
        let spec = Self { r_l, im_l, im_r };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.r_l, self.im_l, self.im_r].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("pole spec"));
        }
        if self.r_l < 0.0 {
            return Err(Error::Config(format!("poles.rl must be >= 0, got {}", self.r_l)));
        }
        if self.im_r <= 0.0 {
            return Err(Error::Config(format!("poles.imr must be > 0, got {}", self.im_r)));
        }
        Ok(())
    }
}

impl Default for PoleSpec {
    fn default() -> Self {
        Self { r_l: 12.0, im_l: 0.1, im_r: 0.55 }
    }
}

/// Four closed-loop roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSet(pub [Complex64; 4]);

impl PoleSet {
    /// Builds a set from real roots.
    pub fn real(roots: [f64; 4]) -> Self {
        Self(roots.map(|r| Complex64::new(r, 0.0)))
    }

    /// True when every root's conjugate is also in the set (with multiplicity).
    pub fn is_conjugate_closed(&self) -> bool {
        let mut used = [false; 4];
        for p in &self.0 {
            let target = p.conj();
            let hit = self.0.iter().enumerate().position(|(k, q)| {
                !used[k] && (q - target).norm() <= CONJUGATE_TOL * (1.0 + target.norm())
            });
            match hit {
                Some(k) => used[k] = true,
                None => return false,
            }
        }
        true
    }
}

/// Monic quartic with coefficients in descending powers: `c[0]·s⁴ + … + c[4]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartic(pub [f64; 5]);

impl Quartic {
    pub fn coefficients(&self) -> &[f64; 5] {
        &self.0
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.0.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    /// Largest coefficient mismatch, each scaled by `max(1, |other_k|)`.
    pub fn max_relative_residual(&self, other: &Quartic) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Display for Quartic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = &self.0;
        write!(f, "({}, {}, {}, {}, {})", c[0], c[1], c[2], c[3], c[4])
    }
}

/// State-feedback gains plus the interaction stiffness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    /// rad/m
    pub k_pos: f64,
    /// rad·s/m
    pub k_vel: f64,
    /// rad/rad
    pub k_tilt: f64,
    /// rad·s/rad
    pub k_rate: f64,
    /// Interaction stiffness (rad/m).
    pub k1: f64,
}

impl Gains {
    pub const ZERO: Gains = Gains { k_pos: 0.0, k_vel: 0.0, k_tilt: 0.0, k_rate: 0.0, k1: 0.0 };

    pub fn with_k1(mut self, k1: f64) -> Self {
        self.k1 = k1;
        self
    }

    /// `K·x` for one agent state.
    pub fn feedback(&self, s: &AgentState) -> f64 {
        self.k_pos * s.pos + self.k_vel * s.vel + self.k_tilt * s.tilt + self.k_rate * s.tilt_rate
    }

    pub fn is_finite(&self) -> bool {
        [self.k_pos, self.k_vel, self.k_tilt, self.k_rate, self.k1]
            .iter()
            .all(|v| v.is_finite())
    }
}

pub fn poles_from_spec(spec: &PoleSpec) -> Result<PoleSet> {
    spec.validate()?;
    Ok(PoleSet([
        Complex64::new(-spec.r_l, -spec.im_l),
        Complex64::new(-spec.r_l, spec.im_l),
        Complex64::new(0.0, -spec.im_r),
        Complex64::new(0.0, spec.im_r),
    ]))
}

/// Expands `∏(s - pᵢ)` and drops the (vanishing) imaginary residue.
pub fn desired_polynomial(poles: &PoleSet) -> Result<Quartic> {
    if poles.0.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::NonFinite("pole set"));
    }
    if !poles.is_conjugate_closed() {
        return Err(Error::Domain("pole set is not closed under conjugation".into()));
    }
    let mut c = [Complex64::new(0.0, 0.0); 5];
    c[0] = Complex64::new(1.0, 0.0);
    for (deg, p) in poles.0.iter().enumerate() {
        for k in (1..=deg + 1).rev() {
            c[k] -= p * c[k - 1];
        }
    }
    let scale = c.iter().map(|z| z.re.abs()).fold(1.0, f64::max);
    if c.iter().any(|z| z.im.abs() > IMAG_RESIDUE_TOL * scale) {
        return Err(Error::Domain("expanded polynomial has an imaginary residue".into()));
    }
    Ok(Quartic(c.map(|z| z.re)))
}

fn check_reachable(plant: &PlantParams) -> Result<()> {
    if !plant.g.is_finite() || !plant.k_p.is_finite() || !plant.k_d.is_finite() {
        return Err(Error::NonFinite("plant parameters"));
    }
    if plant.g == 0.0 {
        return Err(Error::Synthesis("g = 0: position and velocity are unreachable".into()));
    }
    if plant.loop_gain() == 0.0 {
        return Err(Error::Synthesis("k_p·k_d = 0: the input does not reach the plant".into()));
    }
    Ok(())
}

/// Places the closed-loop roots at `poles` by coefficient matching.
///
/// `k1` is initialised to `k_pos`.
pub fn place_gains(plant: &PlantParams, poles: &PoleSet) -> Result<Gains> {
    check_reachable(plant)?;
    let [_, a3, a2, a1, a0] = desired_polynomial(poles)?.0;
    let kpkd = plant.loop_gain();
    let k_pos = a0 / (plant.g * kpkd);
    Ok(Gains {
        k_pos,
        k_vel: a1 / (plant.g * kpkd),
        k_tilt: a2 / kpkd - 1.0,
        k_rate: (a3 - plant.k_d) / kpkd,
        k1: k_pos,
    })
}

/// Literal evaluation of the published closed-form gain expressions, in their
/// printed order `(β/g·(−Σp₁p₂p₃), β/g·p₁p₂p₃p₄, β·Σp₁p₂, −β(k_d + Σp))` with
/// `β = 1/(k_p·k_d)`.
///
/// The printed vector does not match the `(P, V, φ, φ̇)` ordering: entries one
/// and two are `k_vel` and `k_pos` swapped, and entry three is `1 + k_tilt`.
/// It is kept only as a cross-check against [`place_gains`].
pub fn root_formula_gains(plant: &PlantParams, poles: &PoleSet) -> Result<[f64; 4]> {
    check_reachable(plant)?;
    if !poles.is_conjugate_closed() {
        return Err(Error::Domain("pole set is not closed under conjugation".into()));
    }
    let [p1, p2, p3, p4] = poles.0;
    let beta = 1.0 / plant.loop_gain();
    let g_inv = 1.0 / plant.g;
    let triples = p1 * p2 * p3 + p1 * p2 * p4 + p1 * p3 * p4 + p2 * p3 * p4;
    let quad = p1 * p2 * p3 * p4;
    let pairs = p2 * p3 + p2 * p4 + p3 * p4 + p1 * (p2 + p3 + p4);
    let sum = p1 + p2 + p3 + p4;
    Ok([
        (-beta * g_inv * triples).re,
        (beta * g_inv * quad).re,
        (beta * pairs).re,
        (-beta * (plant.k_d + sum)).re,
    ])
}

/// Characteristic polynomial of `A - B·K`, computed from the matrix itself
/// (Faddeev–LeVerrier) rather than from the closed-form coefficients.
pub fn closed_loop_polynomial(plant: &PlantParams, gains: &Gains) -> Quartic {
    let mut m = plant.state_matrix();
    let b = plant.input_matrix();
    let k = [gains.k_pos, gains.k_vel, gains.k_tilt, gains.k_rate];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v -= b[r] * k[c];
        }
    }
    characteristic_polynomial(&m)
}

fn characteristic_polynomial(a: &[[f64; 4]; 4]) -> Quartic {
    let matmul = |x: &[[f64; 4]; 4], y: &[[f64; 4]; 4]| {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        out
    };
    let mut coeffs = [0.0; 5];
    coeffs[0] = 1.0;
    // M_0 = 0, c_0 = 1; M_k = A·M_{k-1} + c_{k-1}·I; c_k = -tr(A·M_k)/k
    let mut m = [[0.0; 4]; 4];
    for k in 1..=4 {
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += coeffs[k - 1];
        }
        m = next;
        let am = matmul(a, &m);
        let trace: f64 = (0..4).map(|i| am[i][i]).sum();
        coeffs[k] = -trace / k as f64;
    }
    Quartic(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BASELINE_POLY: [f64; 5] = [1.0, 24.0, 144.3125, 7.26, 43.563025];

    fn baseline() -> (PlantParams, PoleSet) {
        (PlantParams::default(), poles_from_spec(&PoleSpec::default()).unwrap())
    }

    #[test]
    fn baseline_poles() {
        let (_, poles) = baseline();
        let expected = [
            Complex64::new(-12.0, -0.1),
            Complex64::new(-12.0, 0.1),
            Complex64::new(0.0, -0.55),
            Complex64::new(0.0, 0.55),
        ];
        assert_eq!(poles.0, expected);
        assert!(poles.is_conjugate_closed());

        let sym = poles_from_spec(&PoleSpec::new(0.0, 1.0, 2.0).unwrap()).unwrap();
        assert_eq!(sym.0[0], Complex64::new(0.0, -1.0));
        assert_eq!(sym.0[3], Complex64::new(0.0, 2.0));
    }

    #[test]
    fn pole_spec_invariants() {
        assert!(PoleSpec::new(-1.0, 0.1, 0.55).is_err());
        assert!(PoleSpec::new(12.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn desired_polynomial_examples() {
        let (_, poles) = baseline();
        let q = desired_polynomial(&poles).unwrap();
        assert!(q.max_relative_residual(&Quartic(BASELINE_POLY)) < 1e-12, "{q}");

        let i = Complex64::new(0.0, 1.0);
        let q = desired_polynomial(&PoleSet([i, -i, i, -i])).unwrap();
        assert_eq!(q.0, [1.0, 0.0, 2.0, 0.0, 1.0]);

        let q = desired_polynomial(&PoleSet::real([0.0; 4])).unwrap();
        assert_eq!(q.0, [1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn desired_polynomial_rejects_open_sets() {
        let p = PoleSet([
            Complex64::new(-1.0, 1.0),
            Complex64::new(-1.0, 1.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.0, -0.5),
        ]);
        assert!(matches!(desired_polynomial(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn baseline_gains() {
        let (plant, poles) = baseline();
        let k = place_gains(&plant, &poles).unwrap();
        let expect = [0.0296347, 0.0049388, -0.0379167, -0.0066667];
        for (got, want) in [k.k_pos, k.k_vel, k.k_tilt, k.k_rate].iter().zip(expect) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert_eq!(k.k1, k.k_pos);
    }

    #[test]
    fn open_loop_roots_give_zero_gains() {
        let plant = PlantParams::default();
        let k = place_gains(&plant, &PoleSet::real([0.0, 0.0, -10.0, -15.0])).unwrap();
        for v in [k.k_pos, k.k_vel, k.k_tilt, k.k_rate] {
            assert!(v.abs() < 1e-14, "{v}");
        }
    }

    #[test]
    fn unreachable_plants_are_rejected() {
        let (_, poles) = baseline();
        let no_gravity = PlantParams { k_p: 6.0, k_d: 25.0, g: 0.0 };
        assert!(matches!(place_gains(&no_gravity, &poles), Err(Error::Synthesis(_))));
        let no_loop = PlantParams { k_p: 0.0, k_d: 25.0, g: 9.8 };
        assert!(matches!(place_gains(&no_loop, &poles), Err(Error::Synthesis(_))));
        assert!(root_formula_gains(&no_gravity, &poles).is_err());
    }

    #[test]
    fn closed_loop_polynomial_examples() {
        let (plant, poles) = baseline();
        assert_eq!(closed_loop_polynomial(&plant, &Gains::ZERO).0, [1.0, 25.0, 150.0, 0.0, 0.0]);

        let k = place_gains(&plant, &poles).unwrap();
        let q = closed_loop_polynomial(&plant, &k);
        assert!(q.max_relative_residual(&Quartic(BASELINE_POLY)) < 1e-9, "{q}");

        let delta = 1e-3;
        let bumped = Gains { k_rate: k.k_rate + delta, ..k };
        let q2 = closed_loop_polynomial(&plant, &bumped);
        assert!((q2.0[1] - q.0[1] - plant.loop_gain() * delta).abs() < 1e-9);
        for idx in [0, 2, 3, 4] {
            assert!((q2.0[idx] - q.0[idx]).abs() < 1e-9);
        }
    }

    #[test]
    fn root_formula_on_baseline() {
        let (plant, poles) = baseline();
        let f = root_formula_gains(&plant, &poles).unwrap();
        let expect = [0.0049388, 0.0296347, 0.96208, -0.0066667];
        for (got, want) in f.iter().zip(expect) {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn root_formula_gravity_scaling() {
        let (plant, poles) = baseline();
        let heavy = PlantParams { g: 2.0 * plant.g, ..plant };
        let a = root_formula_gains(&plant, &poles).unwrap();
        let b = root_formula_gains(&heavy, &poles).unwrap();
        assert!((b[0] - a[0] / 2.0).abs() < 1e-15);
        assert!((b[1] - a[1] / 2.0).abs() < 1e-15);
        assert_eq!(a[2], b[2]);
        assert_eq!(a[3], b[3]);
    }

    #[test]
    fn undamped_pair_is_a_root() {
        let spec = PoleSpec::default();
        let q = desired_polynomial(&poles_from_spec(&spec).unwrap()).unwrap();
        assert!(q.eval(Complex64::new(0.0, spec.im_r)).norm() < 1e-9);
    }

    fn plant_strategy() -> impl Strategy<Value = PlantParams> {
        (0.5f64..20.0, 1.0f64..60.0, 1.0f64..20.0).prop_map(|(k_p, k_d, g)| PlantParams { k_p, k_d, g })
    }

    fn spec_strategy() -> impl Strategy<Value = PoleSpec> {
        (0.0f64..30.0, 0.0f64..5.0, 0.05f64..5.0).prop_map(|(r_l, im_l, im_r)| PoleSpec { r_l, im_l, im_r })
    }

    proptest! {
        #[test]
        fn placement_round_trip(plant in plant_strategy(), spec in spec_strategy()) {
            let poles = poles_from_spec(&spec).unwrap();
            let desired = desired_polynomial(&poles).unwrap();
            let k = place_gains(&plant, &poles).unwrap();
            let achieved = closed_loop_polynomial(&plant, &k);
            prop_assert!(achieved.max_relative_residual(&desired) < 1e-9);
        }

        #[test]
        fn root_formula_relations(plant in plant_strategy(), spec in spec_strategy()) {
            let poles = poles_from_spec(&spec).unwrap();
            let k = place_gains(&plant, &poles).unwrap();
            let f = root_formula_gains(&plant, &poles).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + b.abs());
            prop_assert!(close(f[0], k.k_vel));
            prop_assert!(close(f[1], k.k_pos));
            prop_assert!(close(f[2], 1.0 + k.k_tilt));
            prop_assert!(close(f[3], k.k_rate));
        }

        #[test]
        fn undamped_factor(spec in spec_strategy()) {
            let q = desired_polynomial(&poles_from_spec(&spec).unwrap()).unwrap();
            let v = q.eval(Complex64::new(0.0, spec.im_r)).norm();
            let scale = q.0.iter().map(|c| c.abs()).fold(1.0, f64::max);
            prop_assert!(v < 1e-9 * scale);
        }
    }
}
