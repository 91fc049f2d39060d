//! Butcher tableaux for Gauss collocation methods.

use crate::error::{Error, Result};

/// Runge–Kutta coefficients `(A, b, c)` with classical order `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// `max_{i,j} |b_i b_j − b_i a_ij − b_j a_ji|`; zero for symplectic methods.
    pub fn symplecticity_defect(&self) -> f64 {
        symplecticity_defect(self)
    }

    /// Largest violation of the quadrature conditions
    /// `Σ b_i c_i^{q−1} = 1/q`, `q = 1..=order`.
    pub fn order_condition_defect(&self) -> f64 {
        (1..=self.order)
            .map(|q| {
                let lhs: f64 = self.b.iter().zip(&self.c).map(|(b, c)| b * c.powi(q as i32 - 1)).sum();
                (lhs - 1.0 / q as f64).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// The `s`-stage Gauss method (order `2s`) for `s` in 1..=3.
///
/// Coefficients are evaluated from their closed forms in `√3` and `√15`.
pub fn gauss_tableau(s: usize) -> Result<ButcherTableau> {
    let t = match s {
        1 => ButcherTableau {
            a: vec![vec![0.5]],
            b: vec![1.0],
            c: vec![0.5],
            order: 2,
        },
        2 => {
            let r = 3f64.sqrt() / 6.0;
            ButcherTableau {
                a: vec![vec![0.25, 0.25 - r], vec![0.25 + r, 0.25]],
                b: vec![0.5, 0.5],
                c: vec![0.5 - r, 0.5 + r],
                order: 4,
            }
        }
        3 => {
            let r = 15f64.sqrt();
            ButcherTableau {
                a: vec![
                    vec![5.0 / 36.0, 2.0 / 9.0 - r / 15.0, 5.0 / 36.0 - r / 30.0],
                    vec![5.0 / 36.0 + r / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r / 24.0],
                    vec![5.0 / 36.0 + r / 30.0, 2.0 / 9.0 + r / 15.0, 5.0 / 36.0],
                ],
                b: vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
                c: vec![0.5 - r / 10.0, 0.5, 0.5 + r / 10.0],
                order: 6,
            }
        }
        _ => return Err(Error::UnsupportedStages(s)),
    };
    Ok(t)
}

pub fn symplecticity_defect(t: &ButcherTableau) -> f64 {
    let s = t.stages();
    let mut worst = 0.0f64;
    for i in 0..s {
        for j in 0..s {
            let d = t.b[i] * t.b[j] - t.b[i] * t.a[i][j] - t.b[j] * t.a[j][i];
            worst = worst.max(d.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_stage_coefficients() {
        let t = gauss_tableau(2).unwrap();
        let r3 = 3f64.sqrt();
        assert_eq!(t.a[0][0], 0.25);
        assert!((t.a[0][1] - (0.25 - r3 / 6.0)).abs() < 1e-16);
        assert!((t.a[1][0] - (0.25 + r3 / 6.0)).abs() < 1e-16);
        assert_eq!(t.b, vec![0.5, 0.5]);
        assert!((t.c[0] - (0.5 - r3 / 6.0)).abs() < 1e-16);
        assert_eq!(t.order, 4);
    }

    #[test]
    fn three_stage_coefficients() {
        let t = gauss_tableau(3).unwrap();
        let r15 = 15f64.sqrt();
        assert_eq!(t.b, vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0]);
        assert!((t.c[0] - (0.5 - r15 / 10.0)).abs() < 1e-16);
        assert_eq!(t.c[1], 0.5);
        assert!((t.c[2] - (0.5 + r15 / 10.0)).abs() < 1e-16);
    }

    #[test]
    fn midpoint_and_unsupported() {
        let t = gauss_tableau(1).unwrap();
        assert_eq!((t.a.clone(), t.b.clone(), t.c.clone()), (vec![vec![0.5]], vec![1.0], vec![0.5]));
        assert!(matches!(gauss_tableau(0), Err(Error::UnsupportedStages(0))));
        assert!(matches!(gauss_tableau(4), Err(Error::UnsupportedStages(4))));
    }

    #[test]
    fn structural_identities() {
        for s in 1..=3 {
            let t = gauss_tableau(s).unwrap();
            assert!((t.b.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
            for i in 0..s {
                assert!((t.a[i].iter().sum::<f64>() - t.c[i]).abs() <= 1e-15);
            }
            assert_eq!(t.order, 2 * s);
            assert!(t.order_condition_defect() < 1e-14, "s={s}");
            assert!(symplecticity_defect(&t) < 1e-15);
        }
    }

    #[test]
    fn explicit_euler_is_not_symplectic() {
        let euler = ButcherTableau {
            a: vec![vec![0.0]],
            b: vec![1.0],
            c: vec![0.0],
            order: 1,
        };
        assert_eq!(symplecticity_defect(&euler), 1.0);
        assert_eq!(euler.order_condition_defect(), 0.0);
    }
}
