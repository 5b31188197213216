//! Second-order discrete-time zone models used for prediction.

use serde::{Deserialize, Serialize};

use crate::time::STEP_HOURS;
use crate::{Error, Result};

pub const N_STATES: usize = 2;
pub const N_INPUTS: usize = 6;
pub const N_OUTPUTS: usize = 2;

/// Input order of [`LtiZoneModel`].
pub const INPUT_NAMES: [&str; N_INPUTS] = ["q_hp", "q_bb", "t_ext", "q_sg", "q_ig", "t_gnd"];
pub const OUTPUT_NAMES: [&str; N_OUTPUTS] = ["t_op", "t_air"];

pub mod input {
    pub const Q_HP: usize = 0;
    pub const Q_BB: usize = 1;
    pub const T_EXT: usize = 2;
    pub const Q_SG: usize = 3;
    pub const Q_IG: usize = 4;
    pub const T_GND: usize = 5;
}

/// `x(k+1) = A x(k) + B u(k)`, `y(k) = C x(k)`, matrices stored row-major.
/// The state is `[T_air, 2 T_op − T_air]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtiZoneModel {
    pub a: [[f64; N_STATES]; N_STATES],
    pub b: [[f64; N_INPUTS]; N_STATES],
    pub c: [[f64; N_STATES]; N_OUTPUTS],
    pub dt_h: f64,
}

pub type Inputs = [f64; N_INPUTS];

/// Output map for the `[T_air, 2 T_op − T_air]` state.
pub const C_OP_AIR: [[f64; N_STATES]; N_OUTPUTS] = [[0.5, 0.5], [1.0, 0.0]];

/// State vector from measured air and operative temperatures.
pub fn state_from_temps(t_air: f64, t_op: f64) -> [f64; N_STATES] {
    [t_air, 2.0 * t_op - t_air]
}

impl LtiZoneModel {
    pub fn new(a: [[f64; N_STATES]; N_STATES], b: [[f64; N_INPUTS]; N_STATES]) -> Self {
        LtiZoneModel {
            a,
            b,
            c: C_OP_AIR,
            dt_h: STEP_HOURS,
        }
    }

    #[inline]
    pub fn step(&self, x: [f64; N_STATES], u: &Inputs) -> [f64; N_STATES] {
        let mut next = [0.0; N_STATES];
        for (i, n) in next.iter_mut().enumerate() {
            let mut v = self.a[i][0] * x[0] + self.a[i][1] * x[1];
            for (bj, uj) in self.b[i].iter().zip(u) {
                v += bj * uj;
            }
            *n = v;
        }
        next
    }

    /// Free response only: `A x`.
    #[inline]
    pub fn step_free(&self, x: [f64; N_STATES]) -> [f64; N_STATES] {
        [
            self.a[0][0] * x[0] + self.a[0][1] * x[1],
            self.a[1][0] * x[0] + self.a[1][1] * x[1],
        ]
    }

    #[inline]
    pub fn t_op(&self, x: [f64; N_STATES]) -> f64 {
        self.c[0][0] * x[0] + self.c[0][1] * x[1]
    }

    pub fn output(&self, x: [f64; N_STATES]) -> [f64; N_OUTPUTS] {
        [self.t_op(x), self.c[1][0] * x[0] + self.c[1][1] * x[1]]
    }

    /// Largest eigenvalue modulus of `A`.
    pub fn spectral_radius(&self) -> f64 {
        let [[a, b], [c, d]] = self.a;
        let tr = a + d;
        let det = a * d - b * c;
        let disc = tr * tr / 4.0 - det;
        if disc >= 0.0 {
            let s = disc.sqrt();
            (tr / 2.0 + s).abs().max((tr / 2.0 - s).abs())
        } else {
            det.abs().sqrt()
        }
    }

    /// Steady-state change of `[T_op, T_air]` per unit step of one input.
    pub fn dc_gain(&self, input: usize) -> [f64; N_OUTPUTS] {
        // (I − A)⁻¹ B[:, input]
        let [[a, b], [c, d]] = self.a;
        let (m00, m01, m10, m11) = (1.0 - a, -b, -c, 1.0 - d);
        let det = m00 * m11 - m01 * m10;
        let (u0, u1) = (self.b[0][input], self.b[1][input]);
        let x = [(m11 * u0 - m01 * u1) / det, (-m10 * u0 + m00 * u1) / det];
        self.output(x)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.a.iter().flatten().chain(self.b.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("LTI matrices".into()));
        }
        if self.spectral_radius() >= 1.0 {
            return Err(Error::OutOfRange(format!(
                "unstable LTI model, spectral radius {}",
                self.spectral_radius()
            )));
        }
        Ok(())
    }
}

/// Rolls the model forward `l` steps from `x0`, returning `T_op` after each
/// step.
pub fn predict(model: &LtiZoneModel, x0: [f64; N_STATES], inputs: &[Inputs], l: usize) -> Result<Vec<f64>> {
    if inputs.len() < l {
        return Err(Error::Dimension(format!("{} input rows for a {l}-step prediction", inputs.len())));
    }
    let mut x = x0;
    Ok(inputs[..l]
        .iter()
        .map(|u| {
            x = model.step(x, u);
            model.t_op(x)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_model() -> LtiZoneModel {
        LtiZoneModel::new(
            [[0.85, 0.12], [0.01, 0.985]],
            [[0.3, 0.2, 0.02, 0.1, 0.2, 0.0], [0.005, 0.01, 0.002, 0.02, 0.01, 0.003]],
        )
    }

    #[test]
    fn empty_prediction() {
        assert!(predict(&sample_model(), [20.0, 20.0], &[], 0).unwrap().is_empty());
        assert!(predict(&sample_model(), [20.0, 20.0], &[[0.0; 6]], 2).is_err());
    }

    #[test]
    fn step_response_reaches_dc_gain() {
        let m = sample_model();
        m.validate().unwrap();
        let mut u = [0.0; N_INPUTS];
        u[input::Q_HP] = 1.0;
        let y = predict(&m, [0.0, 0.0], &vec![u; 5000], 5000).unwrap();
        let gain = m.dc_gain(input::Q_HP)[0];
        assert!((y[4999] - gain).abs() < 1e-9 * gain.abs().max(1.0));
    }

    #[test]
    fn state_round_trip() {
        let x = state_from_temps(21.0, 20.5);
        assert_eq!(x, [21.0, 20.0]);
        assert_eq!(sample_model().output(x), [20.5, 21.0]);
    }

    proptest! {
        #[test]
        fn superposition(
            u1 in proptest::collection::vec(proptest::array::uniform6(-3.0f64..3.0), 40),
            u2 in proptest::collection::vec(proptest::array::uniform6(-3.0f64..3.0), 40),
            x0 in proptest::array::uniform2(10.0f64..30.0),
        ) {
            let m = sample_model();
            let zero = vec![[0.0; N_INPUTS]; 40];
            let sum: Vec<Inputs> = u1.iter().zip(&u2).map(|(a, b)| std::array::from_fn(|j| a[j] + b[j])).collect();
            let p0 = predict(&m, x0, &zero, 40).unwrap();
            let p1 = predict(&m, x0, &u1, 40).unwrap();
            let p2 = predict(&m, x0, &u2, 40).unwrap();
            let p12 = predict(&m, x0, &sum, 40).unwrap();
            for k in 0..40 {
                let lhs = p12[k] - p0[k];
                let rhs = (p1[k] - p0[k]) + (p2[k] - p0[k]);
                prop_assert!((lhs - rhs).abs() <= 1e-9);
            }
        }
    }
}
