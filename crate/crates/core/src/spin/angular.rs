//! Half-integer quantum numbers and the standard angular-momentum matrices.

use std::fmt;

use nalgebra::{Complex, DMatrix};

use crate::error::{invalid, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// A half-integer quantum number, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Half(i32);

impl Half {
    pub const fn from_doubled(doubled: i32) -> Self {
        Half(doubled)
    }

    pub const fn from_int(value: i32) -> Self {
        Half(2 * value)
    }

    /// Accepts values whose double is an integer (within 1e-9).
    pub fn from_f64(value: f64) -> Result<Self> {
        let doubled = 2.0 * value;
        if !doubled.is_finite() || (doubled - doubled.round()).abs() > 1e-9 {
            return Err(invalid(format!("{value} is not a half-integer")));
        }
        Ok(Half(doubled.round() as i32))
    }

    pub const fn doubled(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn abs(self) -> Self {
        Half(self.0.abs())
    }
}

impl std::ops::Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

impl std::ops::Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half(-self.0)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Projections `j, j-1, ..., -j` in the order used for matrix rows.
pub fn projections(j: Half) -> impl Iterator<Item = Half> {
    let top = j.doubled();
    (0..=top).map(move |k| Half(top - 2 * k))
}

/// Cartesian components of a spin operator, in units of hbar.
///
/// Rows and columns are ordered by descending projection `m = j, ..., -j`.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub j: Half,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
}

impl SpinOperators {
    pub fn new(j: Half) -> Result<Self> {
        if j.doubled() < 0 {
            return Err(invalid(format!("spin quantum number must be non-negative, got {j}")));
        }
        let jv = j.value();
        let dim = (j.doubled() + 1) as usize;
        let ms: Vec<f64> = projections(j).map(Half::value).collect();

        // j+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; m+1 sits one row above m.
        let mut raise = CMatrix::zeros(dim, dim);
        for k in 1..dim {
            let m = ms[k];
            raise[(k - 1, k)] = C64::new((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
        let lower = raise.adjoint();

        let jx = (&raise + &lower).map(|z| z * 0.5);
        let jy = (&raise - &lower).map(|z| z * C64::new(0.0, -0.5));
        let jz = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, ms.iter().map(|&m| C64::new(m, 0.0))));
        Ok(SpinOperators { j, jx, jy, jz })
    }

    pub fn dim(&self) -> usize {
        self.jz.nrows()
    }

    pub fn raising(&self) -> CMatrix {
        &self.jx + self.jy.map(|z| z * C64::i())
    }

    pub fn lowering(&self) -> CMatrix {
        &self.jx - self.jy.map(|z| z * C64::i())
    }
}

/// Builds the spin matrices for quantum number `j`, rejecting negative or
/// non-half-integer input.
pub fn angular_momentum_operators(j: f64) -> Result<SpinOperators> {
    SpinOperators::new(Half::from_f64(j)?)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let ops = angular_momentum_operators(0.5).unwrap();
        assert_eq!(ops.jz[(0, 0)].re, 0.5);
        assert_eq!(ops.jz[(1, 1)].re, -0.5);
        assert_eq!(ops.jx[(0, 1)], C64::new(0.5, 0.0));
        assert_eq!(ops.jx[(1, 0)], C64::new(0.5, 0.0));
        assert_eq!(ops.jy[(0, 1)], C64::new(0.0, -0.5));
        let comm = &ops.jx * &ops.jy - &ops.jy * &ops.jx;
        let expected = ops.jz.map(|z| z * C64::i());
        assert_eq!(comm, expected);
    }

    #[test]
    fn casimir_for_nine_halves() {
        let ops = angular_momentum_operators(4.5).unwrap();
        let casimir = &ops.jx * &ops.jx + &ops.jy * &ops.jy + &ops.jz * &ops.jz;
        let expected = CMatrix::identity(10, 10).map(|z| z * 24.75);
        assert!(max_abs(&(casimir - expected)) < 1e-12);
    }

    #[test]
    fn rejects_bad_quantum_numbers() {
        assert!(angular_momentum_operators(-0.5).is_err());
        assert!(angular_momentum_operators(0.3).is_err());
        assert!(angular_momentum_operators(f64::NAN).is_err());
        assert_eq!(angular_momentum_operators(0.0).unwrap().dim(), 1);
    }

    #[test]
    fn ladder_elements() {
        let ops = angular_momentum_operators(1.5).unwrap();
        let up = ops.raising();
        // <3/2| j+ |1/2> = sqrt(15/4 - 3/4) = sqrt(3)
        assert!((up[(0, 1)].re - 3f64.sqrt()).abs() < 1e-14);
        assert!((up[(1, 2)].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn half_display() {
        assert_eq!(Half::from_doubled(9).to_string(), "9/2");
        assert_eq!(Half::from_int(-4).to_string(), "-4");
        assert_eq!(Half::from_f64(4.5).unwrap().doubled(), 9);
    }
}
