//! Forward model of the composite load: a static ZIP part in parallel with a
//! third-order induction motor.
//!
//! Measurements carry voltage magnitude only, so the bus voltage is placed on
//! the d axis (`U_d = U`, `U_q = 0`). The mechanical torque base `T_0` is not
//! a free parameter; it is fixed at initialization so the rotor is in torque
//! balance at the pre-disturbance operating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Number of identified parameters.
pub const PARAM_COUNT: usize = 13;

/// Canonical ordering of the identified parameters. Parameter vectors,
/// action chains and knowledge matrices all follow this order.
pub const PARAM_NAMES: [&str; PARAM_COUNT] = [
    "r_s", "x_s", "x_m", "x_r", "k_pm", "r_r", "a_p", "a_q", "b_p", "b_q", "h", "a", "b",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipParams {
    pub a_p: f64,
    pub b_p: f64,
    pub c_p: f64,
    pub a_q: f64,
    pub b_q: f64,
    pub c_q: f64,
}

impl ZipParams {
    /// Builds the coefficients with the constant-power terms closing the
    /// unit-sum constraints.
    pub fn new(a_p: f64, b_p: f64, a_q: f64, b_q: f64) -> Self {
        Self {
            a_p,
            b_p,
            c_p: 1.0 - a_p - b_p,
            a_q,
            b_q,
            c_q: 1.0 - a_q - b_q,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sp = self.a_p + self.b_p + self.c_p;
        let sq = self.a_q + self.b_q + self.c_q;
        if (sp - 1.0).abs() > SUM_TOL || (sq - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "ZIP coefficients must sum to 1 (got p: {sp}, q: {sq})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImParams {
    pub r_s: f64,
    pub x_s: f64,
    pub x_m: f64,
    pub r_r: f64,
    pub x_r: f64,
    /// Rotor inertia constant in seconds.
    pub h: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Share of the pre-disturbance active power drawn by the motor.
    pub k_pm: f64,
}

impl ImParams {
    pub fn validate(&self) -> Result<()> {
        let imp = [
            ("r_s", self.r_s),
            ("x_s", self.x_s),
            ("x_m", self.x_m),
            ("r_r", self.r_r),
            ("x_r", self.x_r),
            ("h", self.h),
        ];
        for (name, v) in imp {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        let s = self.a + self.b + self.c;
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "torque coefficients must sum to 1, got {s}"
            )));
        }
        if !(self.k_pm > 0.0 && self.k_pm < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "k_pm must lie in (0, 1), got {}",
                self.k_pm
            )));
        }
        Ok(())
    }
}

/// Time constant and reactances derived from the motor impedances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImDerived {
    pub t_prime: f64,
    pub x: f64,
    pub x_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImState {
    pub e_d: f64,
    pub e_q: f64,
    pub omega: f64,
}

impl ImState {
    fn is_finite(&self) -> bool {
        self.e_d.is_finite() && self.e_q.is_finite() && self.omega.is_finite()
    }

    fn offset(&self, d: &[f64; 3], h: f64) -> ImState {
        ImState {
            e_d: self.e_d + h * d[0],
            e_q: self.e_q + h * d[1],
            omega: self.omega + h * d[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCondition {
    pub state0: ImState,
    /// Mechanical torque base balancing the electrical torque at `state0`.
    pub t0: f64,
    pub p_zip0: f64,
    pub q_zip0: f64,
    pub slip0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeParams {
    pub zip: ZipParams,
    pub im: ImParams,
}

impl CompositeParams {
    /// Builds parameters from a vector in [`PARAM_NAMES`] order. The derived
    /// coefficients `c_p`, `c_q` and `C` close the unit-sum constraints and
    /// may be negative.
    pub fn from_vector(v: &[f64; PARAM_COUNT]) -> Self {
        let [r_s, x_s, x_m, x_r, k_pm, r_r, a_p, a_q, b_p, b_q, h, a, b] = *v;
        CompositeParams {
            zip: ZipParams::new(a_p, b_p, a_q, b_q),
            im: ImParams {
                r_s,
                x_s,
                x_m,
                r_r,
                x_r,
                h,
                a,
                b,
                c: 1.0 - a - b,
                k_pm,
            },
        }
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        let arr: [f64; PARAM_COUNT] = v.try_into().map_err(|_| {
            Error::InvalidInput(format!("expected {PARAM_COUNT} parameters, got {}", v.len()))
        })?;
        Ok(Self::from_vector(&arr))
    }

    pub fn to_vector(&self) -> [f64; PARAM_COUNT] {
        let (z, m) = (&self.zip, &self.im);
        [
            m.r_s, m.x_s, m.x_m, m.x_r, m.k_pm, m.r_r, z.a_p, z.a_q, z.b_p, z.b_q, m.h, m.a, m.b,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.zip.validate()?;
        self.im.validate()
    }
}

pub fn derive_im_constants(im: &ImParams) -> Result<ImDerived> {
    for (name, v) in [("x_s", im.x_s), ("x_m", im.x_m), ("r_r", im.r_r), ("x_r", im.x_r)] {
        if !(v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(ImDerived {
        t_prime: (im.x_r + im.x_m) / im.r_r,
        x: im.x_s + im.x_m,
        x_prime: im.x_s + im.x_r * im.x_m / (im.x_r + im.x_m),
    })
}

/// Static ZIP powers at voltage `v` relative to the nominal `v0`.
pub fn zip_power(zip: &ZipParams, p_zip0: f64, q_zip0: f64, v: f64, v0: f64) -> Result<(f64, f64)> {
    if v0 == 0.0 || !v0.is_finite() {
        return Err(Error::InvalidInput(format!("nominal voltage must be non-zero, got {v0}")));
    }
    let r = v / v0;
    let r2 = r * r;
    Ok((
        p_zip0 * (zip.a_p * r2 + zip.b_p * r + zip.c_p),
        q_zip0 * (zip.a_q * r2 + zip.b_q * r + zip.c_q),
    ))
}

/// Stator currents through `R_s + jX'` driven by the difference between the
/// bus voltage and the transient EMF.
pub fn dq_currents(r_s: f64, x_prime: f64, u_d: f64, u_q: f64, e_d: f64, e_q: f64) -> Result<(f64, f64)> {
    let den = r_s * r_s + x_prime * x_prime;
    if !(den > 0.0) {
        return Err(Error::InvalidParameter(
            "stator impedance R_s^2 + X'^2 must be positive".into(),
        ));
    }
    let dd = u_d - e_d;
    let dq = u_q - e_q;
    Ok(((r_s * dd + x_prime * dq) / den, (r_s * dq - x_prime * dd) / den))
}

pub fn im_power(u_d: f64, u_q: f64, i_d: f64, i_q: f64) -> (f64, f64) {
    (u_d * i_d + u_q * i_q, u_q * i_d - u_d * i_q)
}

/// Time derivatives `(dE'_d/dt, dE'_q/dt, dω/dt)` of the motor state.
pub fn im_derivatives(
    state: &ImState,
    im: &ImParams,
    derived: &ImDerived,
    t0: f64,
    u_d: f64,
    u_q: f64,
) -> Result<[f64; 3]> {
    let (i_d, i_q) = dq_currents(im.r_s, derived.x_prime, u_d, u_q, state.e_d, state.e_q)?;
    let w = state.omega;
    let dx = derived.x - derived.x_prime;
    let de_d = -(state.e_d + dx * i_q) / derived.t_prime - (w - 1.0) * state.e_q;
    let de_q = -(state.e_q - dx * i_d) / derived.t_prime + (w - 1.0) * state.e_d;
    let load_torque = t0 * (im.a * w * w + im.b * w + im.c);
    let elec_torque = state.e_d * i_d + state.e_q * i_q;
    let dw = -(load_torque - elec_torque) / (2.0 * im.h);
    Ok([de_d, de_q, dw])
}

/// EMF equilibrium at a fixed slip. The EMF derivatives are affine in
/// `(E'_d, E'_q)` for fixed speed, so the equilibrium is one 2x2 solve.
fn emf_equilibrium(im: &ImParams, derived: &ImDerived, slip: f64, u: f64) -> Result<ImState> {
    let at = |e_d: f64, e_q: f64| -> Result<[f64; 2]> {
        let s = ImState { e_d, e_q, omega: 1.0 - slip };
        let d = im_derivatives(&s, im, derived, 0.0, u, 0.0)?;
        Ok([d[0], d[1]])
    };
    let f0 = at(0.0, 0.0)?;
    let fd = at(1.0, 0.0)?;
    let fq = at(0.0, 1.0)?;
    let (m11, m21) = (fd[0] - f0[0], fd[1] - f0[1]);
    let (m12, m22) = (fq[0] - f0[0], fq[1] - f0[1]);
    let det = m11 * m22 - m12 * m21;
    if det == 0.0 || !det.is_finite() {
        return Err(Error::InfeasibleOperatingPoint(format!(
            "singular EMF equilibrium at slip {slip}"
        )));
    }
    Ok(ImState {
        e_d: (-f0[0] * m22 + f0[1] * m12) / det,
        e_q: (-f0[1] * m11 + f0[0] * m21) / det,
        omega: 1.0 - slip,
    })
}

fn steady_power(im: &ImParams, derived: &ImDerived, slip: f64, u: f64) -> Result<(ImState, f64, f64)> {
    let st = emf_equilibrium(im, derived, slip, u)?;
    let (i_d, i_q) = dq_currents(im.r_s, derived.x_prime, u, 0.0, st.e_d, st.e_q)?;
    let (p, q) = im_power(u, 0.0, i_d, i_q);
    Ok((st, p, q))
}

const SLIP_MIN: f64 = 1e-6;
const SLIP_MAX: f64 = 0.5;
const SLIP_SCAN: usize = 256;

/// Finds the pre-disturbance equilibrium: the smallest slip in
/// `(1e-6, 0.5)` at which the motor draws `K_pm * P_0`, the matching EMFs,
/// the torque base and the ZIP base powers.
pub fn init_steady_state(params: &CompositeParams, v0: f64, p0: f64, q0: f64) -> Result<InitialCondition> {
    params.validate()?;
    if !(v0 > 0.0) {
        return Err(Error::InvalidInput(format!("V_0 must be positive, got {v0}")));
    }
    if !(p0 > 0.0) {
        return Err(Error::InvalidInput(format!("P_0 must be positive, got {p0}")));
    }
    let im = &params.im;
    let derived = derive_im_constants(im)?;
    let target = im.k_pm * p0;
    let excess = |s: f64| -> Result<f64> { Ok(steady_power(im, &derived, s, v0)?.1 - target) };

    // Log-spaced scan so the stable (small-slip) root is bracketed first.
    let ratio = (SLIP_MAX / SLIP_MIN).ln();
    let mut lo = SLIP_MIN;
    let mut bracket = None;
    if excess(lo)? >= 0.0 {
        return Err(Error::InfeasibleOperatingPoint(format!(
            "motor already draws more than K_pm*P_0 = {target} at minimum slip"
        )));
    }
    for k in 1..=SLIP_SCAN {
        let s = SLIP_MIN * (ratio * k as f64 / SLIP_SCAN as f64).exp();
        let f = excess(s)?;
        if f >= 0.0 {
            bracket = Some((lo, s));
            break;
        }
        lo = s;
    }
    let (mut a, mut b) = bracket.ok_or_else(|| {
        Error::InfeasibleOperatingPoint(format!(
            "no slip in ({SLIP_MIN}, {SLIP_MAX}) makes the motor draw K_pm*P_0 = {target}"
        ))
    })?;
    while b - a > 1e-15 * b.max(1.0) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if excess(mid)? >= 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let slip0 = 0.5 * (a + b);
    let (state0, _p_im, q_im) = steady_power(im, &derived, slip0, v0)?;
    let (i_d, i_q) = dq_currents(im.r_s, derived.x_prime, v0, 0.0, state0.e_d, state0.e_q)?;
    let elec_torque = state0.e_d * i_d + state0.e_q * i_q;
    let w = state0.omega;
    let poly = im.a * w * w + im.b * w + im.c;
    if !(poly > 0.0) {
        return Err(Error::InfeasibleOperatingPoint(format!(
            "load torque polynomial is non-positive ({poly}) at the initial speed"
        )));
    }
    Ok(InitialCondition {
        state0,
        t0: elec_torque / poly,
        p_zip0: (1.0 - im.k_pm) * p0,
        q_zip0: q0 - q_im,
        slip0,
    })
}

/// Simulated active and reactive power curves.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

/// Runs the composite model over a sampled voltage curve and calls `sink`
/// with `(k, P_k, Q_k)` for every sample. The motor state is advanced with
/// classical RK4 at step `dt`, holding the voltage constant between samples.
pub fn simulate_with<F: FnMut(usize, f64, f64)>(
    params: &CompositeParams,
    voltage: &[f64],
    v0: f64,
    p0: f64,
    q0: f64,
    dt: f64,
    mut sink: F,
) -> Result<()> {
    if voltage.is_empty() {
        return Err(Error::InvalidInput("voltage curve is empty".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if (voltage[0] - v0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "first voltage sample {} differs from V_0 = {v0}",
            voltage[0]
        )));
    }
    let init = init_steady_state(params, v0, p0, q0)?;
    let im = &params.im;
    let derived = derive_im_constants(im)?;
    let mut state = init.state0;
    let last = voltage.len() - 1;
    for (k, &u) in voltage.iter().enumerate() {
        let (i_d, i_q) = dq_currents(im.r_s, derived.x_prime, u, 0.0, state.e_d, state.e_q)?;
        let (p_im, q_im) = im_power(u, 0.0, i_d, i_q);
        let (p_zip, q_zip) = zip_power(&params.zip, init.p_zip0, init.q_zip0, u, v0)?;
        let (p, q) = (p_zip + p_im, q_zip + q_im);
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::NumericalDivergence { index: k });
        }
        sink(k, p, q);
        if k == last {
            break;
        }
        let f = |s: &ImState| im_derivatives(s, im, &derived, init.t0, u, 0.0);
        let k1 = f(&state)?;
        let k2 = f(&state.offset(&k1, 0.5 * dt))?;
        let k3 = f(&state.offset(&k2, 0.5 * dt))?;
        let k4 = f(&state.offset(&k3, dt))?;
        state = ImState {
            e_d: state.e_d + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            e_q: state.e_q + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            omega: state.omega + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        };
        if !state.is_finite() {
            return Err(Error::NumericalDivergence { index: k + 1 });
        }
    }
    Ok(())
}

pub fn simulate(
    params: &CompositeParams,
    voltage: &[f64],
    v0: f64,
    p0: f64,
    q0: f64,
    dt: f64,
) -> Result<SimOutput> {
    let mut out = SimOutput {
        p: Vec::with_capacity(voltage.len()),
        q: Vec::with_capacity(voltage.len()),
    };
    simulate_with(params, voltage, v0, p0, q0, dt, |_, p, q| {
        out.p.push(p);
        out.q.push(q);
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1() -> CompositeParams {
        CompositeParams::from_vector(&[
            0.045, 0.173, 2.49, 0.131, 0.43, 0.031, 0.40, 0.30, 0.30, 0.30, 1.2, 0.9, 0.10,
        ])
    }

    #[test]
    fn derived_constants_s1_and_s2() {
        let d = derive_im_constants(&s1().im).unwrap();
        // (0.131 + 2.49) / 0.031, 0.173 + 2.49, 0.173 + 0.131*2.49/2.621
        assert!((d.t_prime - 84.548_387_096_774_19).abs() < 1e-9);
        assert!((d.x - 2.663).abs() < 1e-12);
        assert!((d.x_prime - 0.297_452_499_046_165_55).abs() < 1e-9);

        let mut im = s1().im;
        im.r_r = 0.045;
        im.x_s = 0.104;
        im.x_m = 2.21;
        im.x_r = 0.081;
        let d = derive_im_constants(&im).unwrap();
        assert!((d.t_prime - 50.911_111_111_111_11).abs() < 1e-9);
        assert!((d.x - 2.314).abs() < 1e-12);
        assert!((d.x_prime - 0.182_136_185_072_020_95).abs() < 1e-9);
    }

    #[test]
    fn transient_reactance_tends_to_stator_reactance() {
        let mut im = s1().im;
        im.x_r = 1e-12;
        let d = derive_im_constants(&im).unwrap();
        assert!((d.x_prime - im.x_s).abs() < 1e-11);
    }

    #[test]
    fn non_positive_impedance_rejected() {
        let mut im = s1().im;
        im.r_r = 0.0;
        assert!(matches!(derive_im_constants(&im), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn zip_power_cases() {
        let zip = ZipParams::new(0.4, 0.3, 0.2, 0.5);
        let (p, q) = zip_power(&zip, 1.3, -0.4, 1.05, 1.05).unwrap();
        assert_eq!((p, q), (1.3, -0.4));
        let (p, _) = zip_power(&zip, 1.0, 1.0, 0.9, 1.0).unwrap();
        assert!((p - 0.894).abs() < 1e-12);
        let (p, q) = zip_power(&zip, 2.0, 3.0, 0.0, 1.0).unwrap();
        assert_eq!((p, q), (zip.c_p * 2.0, zip.c_q * 3.0));
        assert!(matches!(zip_power(&zip, 1.0, 1.0, 1.0, 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn dq_currents_and_power_worked_example() {
        let (i_d, i_q) = dq_currents(0.1, 0.2, 1.0, 0.0, 0.9, 0.1).unwrap();
        assert!((i_d + 0.2).abs() < 1e-12);
        assert!((i_q + 0.6).abs() < 1e-12);
        let (p, q) = im_power(1.0, 0.0, i_d, i_q);
        assert!((p + 0.2).abs() < 1e-12);
        assert!((q - 0.6).abs() < 1e-12);
        assert_eq!(dq_currents(0.1, 0.2, 0.7, 0.3, 0.7, 0.3).unwrap(), (0.0, 0.0));
        assert_eq!(im_power(1.0, 0.5, 0.0, 0.0), (0.0, 0.0));
        assert!(dq_currents(0.0, 0.0, 1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn balanced_torque_gives_zero_speed_derivative() {
        let p = s1();
        let d = derive_im_constants(&p.im).unwrap();
        let st = ImState { e_d: 0.95, e_q: -0.1, omega: 1.0 };
        let (i_d, i_q) = dq_currents(p.im.r_s, d.x_prime, 1.0, 0.0, st.e_d, st.e_q).unwrap();
        let te = st.e_d * i_d + st.e_q * i_q;
        // A + B + C = 1 at omega = 1.
        let der = im_derivatives(&st, &p.im, &d, te, 1.0, 0.0).unwrap();
        assert!(der[2].abs() < 1e-15);
    }

    #[test]
    fn inertia_scales_speed_derivative() {
        let p = s1();
        let d = derive_im_constants(&p.im).unwrap();
        let st = ImState { e_d: 0.9, e_q: -0.05, omega: 0.98 };
        let a = im_derivatives(&st, &p.im, &d, 0.3, 0.8, 0.0).unwrap();
        let mut im2 = p.im;
        im2.h *= 2.0;
        let b = im_derivatives(&st, &im2, &d, 0.3, 0.8, 0.0).unwrap();
        assert!((a[2] - 2.0 * b[2]).abs() < 1e-15);
        assert_eq!(a[0], b[0]);
    }

    #[test]
    fn steady_state_s1() {
        let p = s1();
        let init = init_steady_state(&p, 1.0, 1.0, 0.5).unwrap();
        let d = derive_im_constants(&p.im).unwrap();
        let der = im_derivatives(&init.state0, &p.im, &d, init.t0, 1.0, 0.0).unwrap();
        let norm = der.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 1e-8, "residual {norm}");
        let (i_d, i_q) = dq_currents(p.im.r_s, d.x_prime, 1.0, 0.0, init.state0.e_d, init.state0.e_q).unwrap();
        let (p_im, q_im) = im_power(1.0, 0.0, i_d, i_q);
        assert!((p_im - 0.43).abs() < 1e-6);
        assert!((init.q_zip0 + q_im - 0.5).abs() < 1e-12);
        assert!(init.slip0 > 0.0 && init.slip0 < 0.5);
    }

    #[test]
    fn infeasible_motor_share_is_reported() {
        // A high-impedance motor cannot absorb 0.9 p.u. at nominal voltage.
        let mut p = s1();
        p.im.x_s = 0.2;
        p.im.x_r = 1.5;
        p.im.r_s = 0.2;
        p.im.k_pm = 0.9;
        let err = init_steady_state(&p, 1.0, 3.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::InfeasibleOperatingPoint(_)), "{err}");
    }

    #[test]
    fn constant_voltage_holds_operating_point() {
        let v = vec![1.0; 500];
        let out = simulate(&s1(), &v, 1.0, 1.0, 0.5, 0.01).unwrap();
        for (p, q) in out.p.iter().zip(&out.q) {
            assert!((p - 1.0).abs() < 1e-6 && (q - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn simulate_rejects_bad_inputs() {
        assert!(simulate(&s1(), &[], 1.0, 1.0, 0.5, 0.01).is_err());
        assert!(simulate(&s1(), &[0.9, 1.0], 1.0, 1.0, 0.5, 0.01).is_err());
    }

    #[test]
    fn vector_roundtrip_keeps_order() {
        let p = s1();
        assert_eq!(CompositeParams::from_vector(&p.to_vector()), p);
        assert!(p.im.c.abs() < 1e-15);
        assert!((p.zip.c_p - 0.3).abs() < 1e-15);
    }
}
