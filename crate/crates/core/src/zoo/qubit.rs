//! Qubit channels acting on the Bloch ball as `w -> (x1 w1, x2 w2, t + x3 w3)`.
//!
//! The image of the Bloch sphere is an ellipsoid with semi-axes `|x_k|`
//! centred at `(0, 0, t)`. Conjugating the input by a Pauli flips the sign of
//! two of the `x_k`; conjugating input and output by `sigma_1` flips `t`.
//! Neither changes complete positivity, so classification works on a
//! canonical orientation with `t >= 0` and at most one negative axis.

use serde::Serialize;

use crate::channel::{compose, Channel, Covariance};
use crate::error::{PurityError, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::state::{DensityOperator, PureState};
use crate::zoo::depolarising;

/// Absolute tolerance for the equality-type classifications.
pub const EQUALITY_TOL: f64 = 1e-9;
const SLACK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitChannelParams {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub t: f64,
}

impl QubitChannelParams {
    pub fn new(x1: f64, x2: f64, x3: f64, t: f64) -> Self {
        QubitChannelParams { x1, x2, x3, t }
    }

    pub fn axes(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn bloch_map(&self, w: [f64; 3]) -> [f64; 3] {
        [self.x1 * w[0], self.x2 * w[1], self.t + self.x3 * w[2]]
    }

    /// Equivalent parameters with `t >= 0` and at most one negative axis,
    /// which sits on `x1` when present.
    pub fn canonical(&self) -> QubitChannelParams {
        let mut x = self.axes();
        let negatives = x.iter().filter(|&&v| v < 0.0).count();
        let has_zero = x.contains(&0.0);
        let odd = negatives % 2 == 1 && !has_zero;
        for v in x.iter_mut() {
            *v = v.abs();
        }
        if odd {
            x[0] = -x[0];
        }
        QubitChannelParams { x1: x[0], x2: x[1], x3: x[2], t: self.t.abs() }
    }
}

pub type BlochVector = [f64; 3];

/// Reads `(x1, x2, x3, t)` off a qubit channel whose Bloch map is diagonal
/// with a shift along the third axis.
pub fn qubit_params_of(ch: &Channel) -> Result<QubitChannelParams> {
    if ch.dim_in() != 2 || ch.dim_out() != 2 {
        return Err(PurityError::DimensionMismatch { expected: 2, found: ch.dim_in().max(ch.dim_out()) });
    }
    let paulis = linalg::paulis();
    let coeff = |out: &ComplexMatrix, k: usize| (linalg::trace(&(&paulis[k] * out)) * 0.5).re;
    let mut t = [[0.0; 3]; 3];
    for (j, s) in paulis.iter().enumerate() {
        let out = ch.apply_operator(s);
        for (i, row) in t.iter_mut().enumerate() {
            row[j] = coeff(&out, i);
        }
    }
    let centre = ch.apply_operator(&linalg::identity(2));
    let shift = [coeff(&centre, 0), coeff(&centre, 1), coeff(&centre, 2)];
    let off_diagonal = (0..3)
        .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| t[i][j].abs())
        .fold(shift[0].abs().max(shift[1].abs()), f64::max);
    if off_diagonal > EQUALITY_TOL {
        return Err(PurityError::InvalidParameters(format!(
            "Bloch map of {} is not diagonal with a shift along the third axis (off-diagonal {off_diagonal:.3e})",
            ch.label()
        )));
    }
    Ok(QubitChannelParams::new(t[0][0], t[1][1], t[2][2], shift[2]))
}

/// Closed-form CPTP test with every slack reported; the verdict holds iff
/// all slacks are nonnegative (within 1e-12).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitCptpVerdict {
    pub cptp: bool,
    /// `(1 + x3)^2 - t^2 - (x1 + x2)^2`.
    pub plus_slack: f64,
    /// `(1 - x3)^2 - t^2 - (x1 - x2)^2`.
    pub minus_slack: f64,
    /// `1 - |x1|`, `1 - |x2|`, `1 - |x3| - |t|`.
    pub box_slacks: [f64; 3],
}

impl QubitCptpVerdict {
    pub fn min_slack(&self) -> f64 {
        self.box_slacks.iter().copied().fold(self.plus_slack.min(self.minus_slack), f64::min)
    }
}

pub fn qubit_cptp_condition(p: &QubitChannelParams) -> QubitCptpVerdict {
    let QubitChannelParams { x1, x2, x3, t } = *p;
    let plus_slack = (1.0 + x3).powi(2) - t * t - (x1 + x2).powi(2);
    let minus_slack = (1.0 - x3).powi(2) - t * t - (x1 - x2).powi(2);
    let box_slacks = [1.0 - x1.abs(), 1.0 - x2.abs(), 1.0 - x3.abs() - t.abs()];
    let mut v = QubitCptpVerdict { cptp: false, plus_slack, minus_slack, box_slacks };
    v.cptp = v.min_slack() >= -SLACK_TOL;
    v
}

/// The map `w -> (x1 w1, x2 w2, t + x3 w3)` as a superoperator.
///
/// No CPTP check; use [`qubit_cptp_condition`] or the Choi test.
pub fn upsilon(p: &QubitChannelParams) -> Channel {
    let QubitChannelParams { x1, x2, x3, t } = *p;
    let [sx, sy, sz] = linalg::paulis();
    let shifted_identity = linalg::identity(2) + sz.scale(t);
    let ch = Channel::from_action(2, 2, format!("upsilon(x=({x1}, {x2}, {x3}), t={t})"), |a| {
        // a = a0 I + sum_k a_k sigma_k with a_k = tr(sigma_k a) / 2.
        let a0 = linalg::trace(a) * 0.5;
        let ax = linalg::trace(&(&sx * a)) * 0.5;
        let ay = linalg::trace(&(&sy * a)) * 0.5;
        let az = linalg::trace(&(&sz * a)) * 0.5;
        &shifted_identity * a0 + &sx * (ax * x1) + &sy * (ay * x2) + &sz * (az * x3)
    });
    if t == 0.0 && x1.abs() == x2.abs() && x2.abs() == x3.abs() {
        ch.with_covariance(Covariance::IsotropicQubit)
    } else {
        ch
    }
}

/// Amplitude damping with decay `gamma`; fixes `|0><0|`.
pub fn amplitude_damping(gamma: f64) -> Result<Channel> {
    if !(0.0..1.0).contains(&gamma) || gamma == 0.0 {
        return Err(PurityError::InvalidParameters(format!("amplitude damping needs gamma in (0, 1); got {gamma}")));
    }
    let x = (1.0 - gamma).sqrt();
    let p = extreme_point_channel(x, x, 1.0)?;
    Ok(upsilon(&p).with_label(format!("amplitude_damping(gamma={gamma})")).with_rank_one_witness(PureState::basis(2, 0)))
}

/// Parameters `(x1, x2, x1 x2, sign sqrt((1 - x1^2)(1 - x2^2)))` of an
/// extreme point of the qubit channels.
pub fn extreme_point_channel(x1: f64, x2: f64, sign: f64) -> Result<QubitChannelParams> {
    if !(x1.abs() < 1.0 && x2.abs() < 1.0) {
        return Err(PurityError::InvalidParameters(format!("extreme point needs |x1|, |x2| < 1 so that t != 0; got x1 = {x1}, x2 = {x2}")));
    }
    if sign == 0.0 || sign.is_nan() {
        return Err(PurityError::InvalidParameters("sign must be +1 or -1".into()));
    }
    let t = sign.signum() * ((1.0 - x1 * x1) * (1.0 - x2 * x2)).sqrt();
    Ok(QubitChannelParams::new(x1, x2, x1 * x2, t))
}

/// `(x1, x1, x3, 1 - x3)` with `x1^2 <= x3`; `(I + sigma_3)/2` is a fixed point.
pub fn example_d_channel(x1: f64, x3: f64) -> Result<QubitChannelParams> {
    if !(x3 > 0.0 && x3 <= 1.0) {
        return Err(PurityError::InvalidParameters(format!("example d needs x3 in (0, 1]; got {x3}")));
    }
    let slack = x3 - x1 * x1;
    if slack < -SLACK_TOL {
        return Err(PurityError::InvalidParameters(format!(
            "example d needs x1^2 <= x3; x1^2 = {}, x3 = {x3}, slack {slack:.3e}",
            x1 * x1
        )));
    }
    Ok(QubitChannelParams::new(x1, x1, x3, 1.0 - x3))
}

/// `Delta_lambda o example_d(x1, x3)`.
pub fn example_d_lifted(lambda: f64, x1: f64, x3: f64) -> Result<Channel> {
    let m = upsilon(&example_d_channel(x1, x3)?);
    Ok(compose(&depolarising(2, lambda)?, &m)?.with_label(format!("depolarising({lambda}) o example_d(x1={x1}, x3={x3})")))
}

fn check_example_e(lambdas: [f64; 3], x1: f64, x3: f64) -> Result<QubitChannelParams> {
    if (x1 * x1 - x3).abs() > EQUALITY_TOL {
        return Err(PurityError::InvalidParameters(format!("example e needs x1^2 = x3; x1^2 = {}, x3 = {x3}", x1 * x1)));
    }
    let [l1, l2, l3] = lambdas;
    if l1.abs() > l3.abs() + SLACK_TOL || l2.abs() > l3.abs() + SLACK_TOL {
        return Err(PurityError::InvalidParameters(format!(
            "example e needs |l1|, |l2| <= |l3|; slacks {:.3e}, {:.3e}",
            l3.abs() - l1.abs(),
            l3.abs() - l2.abs()
        )));
    }
    example_d_channel(x1, x3)
}

/// Composite parameters `(l1 x1, l2 x1, l3 x3, l3 (1 - x3))` of the unital
/// map `upsilon(l, 0)` after `example_d(x1, x3)`, with `x1^2 = x3`.
///
/// Only the composite is required to be CPTP; see [`example_e_channel`] for
/// the strict form where the unital factor is itself a channel.
pub fn example_e_params(lambdas: [f64; 3], x1: f64, x3: f64) -> Result<QubitChannelParams> {
    let m = check_example_e(lambdas, x1, x3)?;
    let [l1, l2, l3] = lambdas;
    let y = QubitChannelParams::new(l1 * m.x1, l2 * m.x2, l3 * m.x3, l3 * m.t);
    let v = qubit_cptp_condition(&y);
    if !v.cptp {
        return Err(PurityError::NotCptp(format!("composite parameters {y:?} violate the qubit condition: {v:?}")));
    }
    Ok(y)
}

/// `upsilon(l, 0) o example_d(x1, x3)` with `x1^2 = x3`, `|l1|, |l2| <= |l3|`
/// and the unital factor a channel.
pub fn example_e_channel(lambdas: [f64; 3], x1: f64, x3: f64) -> Result<Channel> {
    let m = check_example_e(lambdas, x1, x3)?;
    let psi_params = QubitChannelParams::new(lambdas[0], lambdas[1], lambdas[2], 0.0);
    let v = qubit_cptp_condition(&psi_params);
    if !v.cptp {
        return Err(PurityError::NotCptp(format!(
            "unital factor upsilon({:?}, 0) is not CPTP: plus slack {:.3e}, minus slack {:.3e}",
            lambdas, v.plus_slack, v.minus_slack
        )));
    }
    let ch = compose(&upsilon(&psi_params), &upsilon(&m))?;
    Ok(ch.with_label(format!("example_e(l={lambdas:?}, x1={x1}, x3={x3})")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitFamily {
    Unital,
    ExtremeC,
    ExampleDForm,
    ExampleEForm,
    None,
}

/// Parameters recovering a classified channel from its building blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Decomposition {
    Unital {
        lambdas: [f64; 3],
    },
    ExtremeC {
        x1: f64,
        x2: f64,
        sign: f64,
    },
    /// `Delta_lambda o example_d(x1, x3)`.
    ExampleD {
        lambda: f64,
        x1: f64,
        x3: f64,
    },
    /// `upsilon(lambdas, 0) o example_d(x1, x3)`, `x1^2 = x3`.
    ExampleE {
        lambdas: [f64; 3],
        x1: f64,
        x3: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub family: QubitFamily,
    pub canonical: QubitChannelParams,
    pub decomposition: Option<Decomposition>,
    /// Additivity and multiplicativity with an arbitrary second channel
    /// follow for every family except `None`.
    pub certified: bool,
    /// `y_i^2 - y3 (y3 + u)`; nonpositive when the d/e-form bound holds.
    pub axis_excess: [f64; 2],
    /// `(y1 - y2)^2 - y3/(y3 + u) (1 - y3 - u)^2`; nonpositive when the e-form bound holds.
    pub unital_excess: Option<f64>,
}

/// Sorts a qubit channel into the families with known additivity, in the
/// order unital, extreme, d-form, e-form.
pub fn classify_qubit_family(params: &QubitChannelParams) -> Result<Classification> {
    let v = qubit_cptp_condition(params);
    if !v.cptp {
        return Err(PurityError::NotCptp(format!("qubit parameters {params:?} fail the CPTP condition (min slack {:.3e})", v.min_slack())));
    }
    let p = params.canonical();
    let QubitChannelParams { x1: y1, x2: y2, x3: y3, t: u } = p;
    let bound = y3 * (y3 + u);
    let axis_excess = [y1 * y1 - bound, y2 * y2 - bound];
    let unital_excess = (y3 + u > 0.0).then(|| (y1 - y2).powi(2) - y3 / (y3 + u) * (1.0 - y3 - u).powi(2));
    let mut out =
        Classification { family: QubitFamily::None, canonical: p, decomposition: None, certified: false, axis_excess, unital_excess };

    let set = |out: &mut Classification, family, d| {
        out.family = family;
        out.decomposition = Some(d);
        out.certified = true;
    };

    if u.abs() <= EQUALITY_TOL {
        set(&mut out, QubitFamily::Unital, Decomposition::Unital { lambdas: [y1, y2, y3] });
        return Ok(out);
    }
    if (y3 - y1 * y2).abs() <= EQUALITY_TOL && (u * u - (1.0 - y1 * y1) * (1.0 - y2 * y2)).abs() <= EQUALITY_TOL {
        set(&mut out, QubitFamily::ExtremeC, Decomposition::ExtremeC { x1: y1, x2: y2, sign: 1.0 });
        return Ok(out);
    }
    let axes_ok = y3 > 0.0 && axis_excess.iter().all(|&e| e <= EQUALITY_TOL);
    if axes_ok && (y1 - y2).abs() <= EQUALITY_TOL {
        let lambda = y3 + u;
        set(&mut out, QubitFamily::ExampleDForm, Decomposition::ExampleD { lambda, x1: y1 / lambda, x3: y3 / lambda });
        return Ok(out);
    }
    if axes_ok && unital_excess.is_some_and(|e| e <= EQUALITY_TOL) {
        let l3 = y3 + u;
        let x3 = y3 / l3;
        let x1 = x3.sqrt();
        set(&mut out, QubitFamily::ExampleEForm, Decomposition::ExampleE { lambdas: [y1 / x1, y2 / x1, l3], x1, x3 });
    }
    Ok(out)
}

fn bloch_of(m: &ComplexMatrix) -> BlochVector {
    [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochImage {
    pub axes: [f64; 3],
    pub center: [f64; 3],
    /// Largest deviation of sampled sphere images from the stated ellipsoid.
    pub max_deviation: f64,
    pub n_points: usize,
}

/// Axes and centre of the image ellipsoid, checked on 100 sphere points.
pub fn bloch_image(params: &QubitChannelParams) -> Result<BlochImage> {
    let ch = upsilon(params);
    let n = 100;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut worst = 0.0f64;
    for k in 0..n {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let w = [r * (golden * k as f64).cos(), r * (golden * k as f64).sin(), z];
        let input = DensityOperator::from_bloch(w)?;
        let image = bloch_of(&ch.apply_operator(input.matrix()));
        let expect = params.bloch_map(w);
        for k in 0..3 {
            worst = worst.max((image[k] - expect[k]).abs());
        }
    }
    Ok(BlochImage { axes: params.axes(), center: [0.0, 0.0, params.t], max_deviation: worst, n_points: n })
}
