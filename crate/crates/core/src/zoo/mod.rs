//! Constructors for the channel families studied here.
//!
//! Each constructor validates its parameters against the family's CPTP
//! range and sets the analytic covariance flag only where covariance holds
//! in closed form.

mod qubit;
mod unitary_mixture;

pub use qubit::{
    amplitude_damping, bloch_image, classify_qubit_family, example_d_channel, example_d_lifted, example_e_channel, example_e_params,
    extreme_point_channel, qubit_cptp_condition, qubit_params_of, upsilon, BlochImage, BlochVector, Classification, Decomposition,
    QubitChannelParams, QubitCptpVerdict, QubitFamily, EQUALITY_TOL,
};
pub use unitary_mixture::{common_eigenvector, unitary_mixture_channel, unitary_mixture_m, CommonEigenvector};

use rand::Rng;

use crate::channel::{Channel, Covariance};
use crate::error::{PurityError, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::random::haar_random_isometry;
use crate::state::PureState;

/// Slack allowed on closed-form parameter ranges.
const RANGE_TOL: f64 = 1e-12;

/// `rho -> lambda rho + (1 - lambda) tr(rho) I / d`, `lambda in [-1/(d^2-1), 1]`.
pub fn depolarising(d: usize, lambda: f64) -> Result<Channel> {
    if d == 0 {
        return Err(PurityError::InvalidParameters("dimension must be positive".into()));
    }
    let lower = if d == 1 { f64::NEG_INFINITY } else { -1.0 / ((d * d - 1) as f64) };
    if !(lambda >= lower - RANGE_TOL && lambda <= 1.0 + RANGE_TOL) {
        return Err(PurityError::NotCptp(format!(
            "depolarising lambda = {lambda} outside the CPTP range [-1/(d^2-1), 1] = [{lower}, 1] for d = {d}"
        )));
    }
    let ch = Channel::from_action(d, d, format!("depolarising(d={d}, lambda={lambda})"), |a| {
        a.scale(lambda) + linalg::identity(d) * (linalg::trace(a) * ((1.0 - lambda) / d as f64))
    });
    Ok(ch.with_covariance(Covariance::Depolarising))
}

/// `rho -> lambda rho^T + (1 - lambda) tr(rho) I / d`, `lambda in [-1/(d-1), 1/(d+1)]`.
pub fn transpose_depolarising(d: usize, lambda: f64) -> Result<Channel> {
    if d < 2 {
        return Err(PurityError::InvalidParameters("transpose depolarising needs d >= 2".into()));
    }
    let lower = -1.0 / (d - 1) as f64;
    let upper = 1.0 / (d + 1) as f64;
    if !(lambda >= lower - RANGE_TOL && lambda <= upper + RANGE_TOL) {
        return Err(PurityError::NotCptp(format!(
            "transpose depolarising lambda = {lambda} outside the CPTP range [-1/(d-1), 1/(d+1)] = [{lower}, {upper}] for d = {d}"
        )));
    }
    let ch = Channel::from_action(d, d, format!("transpose_depolarising(d={d}, lambda={lambda})"), |a| {
        a.transpose().scale(lambda) + linalg::identity(d) * (linalg::trace(a) * ((1.0 - lambda) / d as f64))
    });
    Ok(ch.with_covariance(Covariance::TransposeDepolarising))
}

/// `rho -> (tr(rho) I - rho^T) / (d - 1)`.
pub fn werner_holevo(d: usize) -> Result<Channel> {
    if d < 2 {
        return Err(PurityError::InvalidParameters("Werner-Holevo channel needs d >= 2".into()));
    }
    let ch = Channel::from_action(d, d, format!("werner_holevo(d={d})"), |a| {
        (linalg::identity(d) * linalg::trace(a) - a.transpose()).unscale((d - 1) as f64)
    });
    Ok(ch.with_covariance(Covariance::WernerHolevo))
}

#[derive(Debug, Clone)]
pub struct ShiftedDepolarisingParams {
    pub d: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub phi: PureState,
}

impl ShiftedDepolarisingParams {
    /// `phi` defaults to the first basis vector.
    pub fn new(d: usize, a: f64, b: f64, c: f64, phi: Option<PureState>) -> Result<Self> {
        if d == 0 {
            return Err(PurityError::InvalidParameters("dimension must be positive".into()));
        }
        if a < 0.0 || b < 0.0 || c < 0.0 || ((a + b + c) - 1.0).abs() > RANGE_TOL {
            return Err(PurityError::InvalidParameters(format!(
                "shifted depolarising needs a, b, c >= 0 with a + b + c = 1; got a = {a}, b = {b}, c = {c}"
            )));
        }
        let phi = phi.unwrap_or_else(|| PureState::basis(d, 0));
        if phi.dim() != d {
            return Err(PurityError::DimensionMismatch { expected: d, found: phi.dim() });
        }
        Ok(ShiftedDepolarisingParams { d, a, b, c, phi })
    }
}

/// `rho -> a rho + b |phi><phi| + c I / d`.
pub fn shifted_depolarising(p: &ShiftedDepolarisingParams) -> Result<Channel> {
    let ShiftedDepolarisingParams { d, a, b, c, .. } = *p;
    let target = p.phi.projector();
    Ok(Channel::from_action(d, d, format!("shifted_depolarising(d={d}, a={a}, b={b}, c={c})"), |x| {
        let tr = linalg::trace(x);
        x.scale(a) + &target * (tr * b) + linalg::identity(d) * (tr * (c / d as f64))
    }))
}

/// `rho -> a/(a+b) rho + b/(a+b) |phi><phi|`; `phi` is a fixed point with rank-one output.
pub fn shift_channel(a: f64, b: f64, phi: &PureState) -> Result<Channel> {
    if a < 0.0 || b < 0.0 || (a + b).is_nan() || a + b <= 0.0 {
        return Err(PurityError::InvalidParameters(format!("shift channel needs a, b >= 0 and a + b > 0; got a = {a}, b = {b}")));
    }
    let d = phi.dim();
    let (wa, wb) = (a / (a + b), b / (a + b));
    let target = phi.projector();
    let ch = Channel::from_action(d, d, format!("shift(d={d}, a={a}, b={b})"), |x| x.scale(wa) + &target * (linalg::trace(x) * wb));
    Ok(ch.with_rank_one_witness(phi.clone()))
}

/// Random channel `C^d_in -> C^d_out` with `rank` Kraus operators from a Haar isometry.
pub fn random_channel_between<R: Rng + ?Sized>(d_in: usize, d_out: usize, rank: usize, rng: &mut R) -> Channel {
    let v = haar_random_isometry(d_out * rank, d_in, rng);
    let ops: Vec<ComplexMatrix> = (0..rank).map(|k| v.rows(k * d_out, d_out).into_owned()).collect();
    Channel::from_kraus(&ops, format!("random(d_in={d_in}, d_out={d_out}, rank={rank})")).expect("consistent Kraus shapes")
}

pub fn random_channel<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Channel {
    random_channel_between(d, d, rank, rng)
}

/// Random qubit channel with Kraus rank drawn from 1..=4.
pub fn random_qubit_channel<R: Rng + ?Sized>(rng: &mut R) -> Channel {
    let rank = rng.random_range(1..=4);
    random_channel(2, rank, rng).with_label(format!("random_qubit(rank={rank})"))
}

/// Names and parameter schemas accepted by the spec format.
pub const FAMILIES: &[(&str, &str)] = &[
    ("depolarising", "{d, lambda}: lambda rho + (1 - lambda) I/d, lambda in [-1/(d^2-1), 1]"),
    ("transpose_depolarising", "{d, lambda}: lambda rho^T + (1 - lambda) I/d, lambda in [-1/(d-1), 1/(d+1)]"),
    ("werner_holevo", "{d}: (I - rho^T)/(d-1)"),
    ("shifted_depolarising", "{d, a, b, c[, phi]}: a rho + b |phi><phi| + c I/d, a+b+c = 1"),
    ("shift", "{a, b[, d, phi]}: a/(a+b) rho + b/(a+b) |phi><phi|"),
    ("unitary_mixture", "{weights, unitaries}: sum_k w_k V_k rho V_k^dag + (1 - sum w) I/d, V_k sharing an eigenvector"),
    ("upsilon", "{x1, x2, x3, t}: Bloch map w -> (x1 w1, x2 w2, t + x3 w3)"),
    ("extreme", "{x1, x2, sign}: upsilon with x3 = x1 x2, t = sign sqrt((1-x1^2)(1-x2^2))"),
    ("example_d", "{x1, x3}: upsilon(x1, x1, x3, 1 - x3), x1^2 <= x3"),
    ("example_e", "{l1, l2, l3, x1}: unital upsilon(l1, l2, l3, 0) composed with example_d(x1, x1^2)"),
    ("kraus", "{list}: explicit Kraus operators, entries as [re, im]"),
    ("superop", "{matrix[, dim_in, dim_out]}: column-stacking superoperator, entries as [re, im]"),
    ("identity", "{d}: identity channel"),
    ("amplitude_damping", "{gamma}: qubit amplitude damping, the extreme channel with x1 = x2"),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::compose;
    use crate::random::{random_density_operator, rng_from_seed};
    use crate::state::DensityOperator;

    #[test]
    fn depolarising_special_values() {
        let mut rng = rng_from_seed(1);
        let rho = random_density_operator(3, &mut rng);
        let id = depolarising(3, 1.0).unwrap();
        assert!(linalg::max_abs_diff(id.superop(), Channel::identity(3).superop()) < 1e-15);
        let flat = depolarising(3, 0.0).unwrap().apply(&rho).unwrap();
        assert!(linalg::max_abs_diff(flat.matrix(), DensityOperator::maximally_mixed(3).matrix()) < 1e-15);
        let out = depolarising(2, 0.5).unwrap().apply(&PureState::basis(2, 0).as_density()).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), DensityOperator::diagonal(&[0.75, 0.25]).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn depolarising_matches_formula() {
        let mut rng = rng_from_seed(2);
        let ch = depolarising(3, 0.37).unwrap();
        let rho = random_density_operator(3, &mut rng);
        let formula = rho.matrix().scale(0.37) + linalg::identity(3).scale(0.63 / 3.0);
        assert!(linalg::max_abs_diff(ch.apply(&rho).unwrap().matrix(), &formula) < 1e-14);
    }

    #[test]
    fn depolarising_range() {
        let err = depolarising(2, 1.5).unwrap_err().to_string();
        assert!(err.contains("[-1/(d^2-1), 1]"), "{err}");
        let boundary = depolarising(2, -1.0 / 3.0).unwrap().is_cptp(1e-9);
        assert!(boundary.cptp);
        assert!(boundary.min_choi_eigenvalue.abs() < 1e-12);
        // Outside the range the map is built by hand to inspect its Choi matrix.
        let outside = Channel::from_action(2, 2, "dep(-0.5)", |a| a.scale(-0.5) + linalg::identity(2) * (linalg::trace(a) * 0.75));
        let v = outside.is_cptp(1e-9);
        assert!(!v.cptp && v.min_choi_eigenvalue < 0.0);
    }

    #[test]
    fn depolarising_composition_multiplies() {
        let a = depolarising(2, 0.6).unwrap();
        let b = depolarising(2, -0.2).unwrap();
        let ab = compose(&a, &b).unwrap();
        let direct = depolarising(2, 0.6 * -0.2).unwrap();
        assert!(linalg::max_abs_diff(ab.superop(), direct.superop()) < 1e-15);
        assert!(ab.is_analytically_covariant());
    }

    #[test]
    fn depolarising_kraus_count() {
        let ops = depolarising(2, 0.4).unwrap().kraus(1e-10).unwrap();
        assert_eq!(ops.len(), 4);
    }

    #[test]
    fn transpose_depolarising_cases() {
        let mut rng = rng_from_seed(3);
        let rho = random_density_operator(3, &mut rng);
        let flat = transpose_depolarising(3, 0.0).unwrap().apply(&rho).unwrap();
        assert!(linalg::max_abs_diff(flat.matrix(), DensityOperator::maximally_mixed(3).matrix()) < 1e-15);
        let v = transpose_depolarising(3, 0.25).unwrap().is_cptp(1e-9);
        assert!(v.cptp);
        assert!(v.min_choi_eigenvalue.abs() < 1e-12);
        assert!(transpose_depolarising(3, -0.5).unwrap().is_cptp(1e-9).cptp);
        assert!(transpose_depolarising(3, 0.3).is_err());
    }

    #[test]
    fn werner_holevo_cases() {
        let out = werner_holevo(2).unwrap().apply(&PureState::basis(2, 0).as_density()).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), PureState::basis(2, 1).as_density().matrix()) < 1e-15);
        for d in 2..5 {
            assert!(werner_holevo(d).unwrap().is_cptp(1e-9).cptp);
        }
    }

    #[test]
    fn shifted_depolarising_decomposes() {
        let mut rng = rng_from_seed(4);
        for d in [2, 3] {
            let phi = crate::random::haar_random_pure_state(d, &mut rng);
            let p = ShiftedDepolarisingParams::new(d, 0.35, 0.4, 0.25, Some(phi.clone())).unwrap();
            let sd = shifted_depolarising(&p).unwrap();
            let composed = compose(&depolarising(d, 0.75).unwrap(), &shift_channel(0.35, 0.4, &phi).unwrap()).unwrap();
            assert!(linalg::max_abs_diff(sd.superop(), composed.superop()) < 1e-12);
            assert!(sd.is_cptp(1e-9).cptp);
        }
    }

    #[test]
    fn shifted_depolarising_edge_cases() {
        let p = ShiftedDepolarisingParams::new(2, 1.0, 0.0, 0.0, None).unwrap();
        let sd = shifted_depolarising(&p).unwrap();
        assert!(linalg::max_abs_diff(sd.superop(), Channel::identity(2).superop()) < 1e-15);

        // a = 0: the output is fixed with spectrum {b + c/d, c/d, ...}.
        let mut rng = rng_from_seed(5);
        let p = ShiftedDepolarisingParams::new(3, 0.0, 0.4, 0.6, None).unwrap();
        let sd = shifted_depolarising(&p).unwrap();
        let s = sd.apply(&random_density_operator(3, &mut rng)).unwrap().spectrum();
        let expect = [0.4 + 0.2, 0.2, 0.2];
        for (x, y) in s.values().iter().zip(expect) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(ShiftedDepolarisingParams::new(2, 0.5, 0.5, 0.5, None).is_err());
        assert!(ShiftedDepolarisingParams::new(2, -0.1, 0.6, 0.5, None).is_err());
    }

    #[test]
    fn shift_channel_fixes_target() {
        let phi = PureState::basis(3, 2);
        let m = shift_channel(0.5, 0.5, &phi).unwrap();
        let out = m.apply_state(&phi).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), &phi.projector()) < 1e-15);
        assert!(out.spectrum().values()[1].abs() < 1e-15);
        assert!(m.rank_one_witness().is_some());
        assert!(shift_channel(0.0, 0.0, &phi).is_err());
    }

    #[test]
    fn random_channels_are_cptp() {
        let mut rng = rng_from_seed(6);
        for _ in 0..20 {
            assert!(random_qubit_channel(&mut rng).is_cptp(1e-10).cptp);
        }
    }
}
