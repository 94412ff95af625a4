//! Tridiagonal matrices and the Thomas algorithm.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `n × n` tridiagonal matrix. `lower[i]` couples row `i + 1` to column `i`,
/// `upper[i]` couples row `i` to column `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn new(lower: Vec<T>, diag: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::invalid("empty tridiagonal matrix"));
        }
        for off in [&lower, &upper] {
            if off.len() != n - 1 {
                return Err(Error::LengthMismatch {
                    expected: n - 1,
                    found: off.len(),
                });
            }
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let n = self.n();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc = acc + self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc = acc + self.upper[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    /// `alpha I + beta A`.
    pub fn shifted(&self, alpha: T, beta: T) -> Self {
        Self {
            lower: self.lower.iter().map(|&v| beta * v).collect(),
            diag: self.diag.iter().map(|&v| alpha + beta * v).collect(),
            upper: self.upper.iter().map(|&v| beta * v).collect(),
        }
    }

    /// Solves `A x = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut [T]) -> Result<()> {
        thomas(&self.lower, &self.diag, &self.upper, rhs)
    }
}

/// Thomas algorithm (no pivoting); intended for diagonally dominant systems.
#[allow(clippy::many_single_char_names)]
pub fn thomas<T: Scalar>(lower: &[T], diag: &[T], upper: &[T], rhs: &mut [T]) -> Result<()> {
    let n = diag.len();
    if rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    if n == 0 {
        return Ok(());
    }
    let mut c = vec![T::zero(); n];
    let mut pivot = diag[0];
    if pivot == T::zero() {
        return Err(Error::invalid("zero pivot in tridiagonal solve"));
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    rhs[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == T::zero() {
            return Err(Error::invalid("zero pivot in tridiagonal solve"));
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - c[i] * rhs[i + 1];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solves_small_system() {
        let a = Tridiagonal::<f64>::new(vec![1.0, 1.0], vec![4.0, 4.0, 4.0], vec![1.0, 1.0]).unwrap();
        let x = [1.0, -2.0, 3.0];
        let mut b = [0.0; 3];
        a.apply(&x, &mut b);
        a.solve_in_place(&mut b).unwrap();
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn single_row() {
        let a = Tridiagonal::new(vec![], vec![2.0], vec![]).unwrap();
        let mut b = [3.0];
        a.solve_in_place(&mut b).unwrap();
        assert_eq!(b, [1.5]);
    }

    #[test]
    fn rejects_bad_shapes_and_singular() {
        assert!(Tridiagonal::new(vec![1.0], vec![1.0, 1.0, 1.0], vec![1.0, 1.0]).is_err());
        let a = Tridiagonal::new(vec![1.0], vec![0.0, 1.0], vec![1.0]).unwrap();
        assert!(a.solve_in_place(&mut [1.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn residual_vanishes_for_dominant_systems(
            off in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..60),
            x in proptest::collection::vec(-10.0f64..10.0, 61),
        ) {
            let n = off.len() + 1;
            let lower: Vec<f64> = off.iter().map(|o| o.0).collect();
            let upper: Vec<f64> = off.iter().map(|o| o.1).collect();
            let diag = vec![2.5; n];
            let a = Tridiagonal::new(lower, diag, upper).unwrap();
            let x = &x[..n];
            let mut b = vec![0.0; n];
            a.apply(x, &mut b);
            a.solve_in_place(&mut b).unwrap();
            for (u, v) in b.iter().zip(x) {
                prop_assert!((u - v).abs() <= 1e-10 * (1.0 + v.abs()));
            }
        }
    }
}
