//! Quasi-probability decompositions of the single-qubit identity channel.

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::sim::{Basis, PrepState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Peng,
    Harada,
}

/// What the downstream side prepares after the upstream measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prep {
    Fixed(PrepState),
    /// Eigenstate matching the measured outcome.
    Same,
    /// The orthogonal eigenstate.
    Flipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QpdTerm {
    pub scheme: Scheme,
    pub basis: Basis,
    pub prep: Prep,
    pub coefficient: Rational64,
    /// Multiply the shot sign by `(-1)^m` for the measured bit `m`.
    pub outcome_sign: bool,
}

impl QpdTerm {
    /// State the downstream fragment starts from, given the measured bit.
    pub fn prepared(&self, outcome: bool) -> PrepState {
        match self.prep {
            Prep::Fixed(state) => state,
            Prep::Same => self.basis.eigenstate(outcome),
            Prep::Flipped => self.basis.eigenstate(!outcome),
        }
    }

    pub fn sign(&self) -> i8 {
        if self.coefficient.is_negative() {
            -1
        } else {
            1
        }
    }

    /// Sign contribution of this term when its measurement reported `outcome`.
    pub fn shot_sign(&self, outcome: bool) -> i8 {
        if self.outcome_sign && outcome {
            -self.sign()
        } else {
            self.sign()
        }
    }

    /// Sampling probability `|c| / one_norm`.
    pub fn probability(&self, one_norm: Rational64) -> f64 {
        (self.coefficient.abs() / one_norm).to_f64().unwrap_or(0.0)
    }
}

fn half(sign: i64) -> Rational64 {
    Rational64::new(sign, 2)
}

/// `rho = (Tr(rho) I + sum_O Tr(O rho) O) / 2` as 8 measure-and-prepare terms.
pub fn peng_terms() -> Vec<QpdTerm> {
    let term = |basis, prep, coefficient, outcome_sign| QpdTerm {
        scheme: Scheme::Peng,
        basis,
        prep: Prep::Fixed(prep),
        coefficient,
        outcome_sign,
    };
    let mut terms = vec![
        term(Basis::Z, PrepState::Z0, half(1), false),
        term(Basis::Z, PrepState::Z1, half(1), false),
    ];
    for basis in [Basis::X, Basis::Y, Basis::Z] {
        terms.push(term(basis, basis.eigenstate(false), half(1), true));
        terms.push(term(basis, basis.eigenstate(true), half(-1), true));
    }
    terms
}

/// `Id = 2 Phi_MUB - Phi_flip` with `Phi_MUB` the uniform mixture of the
/// three measure-and-reprepare channels and `Phi_flip` its orthogonal-state
/// counterpart.
pub fn harada_terms() -> Vec<QpdTerm> {
    Basis::ALL
        .into_iter()
        .flat_map(|basis| {
            [(Prep::Same, Rational64::new(2, 3)), (Prep::Flipped, Rational64::new(-1, 3))].map(
                |(prep, coefficient)| QpdTerm {
                    scheme: Scheme::Harada,
                    basis,
                    prep,
                    coefficient,
                    outcome_sign: false,
                },
            )
        })
        .collect()
}

pub fn one_norm(terms: &[QpdTerm]) -> Rational64 {
    terms.iter().fold(Rational64::zero(), |acc, t| acc + t.coefficient.abs())
}

/// Product of the two one-norms, the sampling overhead of one Harada and
/// one Peng cut.
pub fn kappa() -> Rational64 {
    one_norm(&harada_terms()) * one_norm(&peng_terms())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::state::prep_vector;
    use num_complex::Complex;

    type C = Complex<f64>;
    type M = [[C; 2]; 2];

    fn density(state: PrepState) -> M {
        let v = prep_vector::<f64>(state);
        let mut m = [[C::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = v[i] * v[j].conj();
            }
        }
        m
    }

    fn trace_with(a: &M, b: &M) -> f64 {
        // Tr(a b) for Hermitian a, b
        let mut t = C::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                t += a[i][j] * b[j][i];
            }
        }
        t.re
    }

    /// `sum_k c_k sum_m P(m | rho) s_k(m) rho_k(m)` with sign factor `s_k`.
    fn apply(terms: &[QpdTerm], rho: &M) -> M {
        let mut out = [[C::new(0.0, 0.0); 2]; 2];
        for t in terms {
            let c = t.coefficient.to_f64().unwrap();
            for m in [false, true] {
                let p = trace_with(&density(t.basis.eigenstate(m)), rho);
                let s = if t.outcome_sign && m { -1.0 } else { 1.0 };
                let prep = density(t.prepared(m));
                for i in 0..2 {
                    for j in 0..2 {
                        out[i][j] += prep[i][j] * (c * p * s);
                    }
                }
            }
        }
        out
    }

    fn assert_identity(terms: &[QpdTerm]) {
        for input in PrepState::ALL {
            let rho = density(input);
            let out = apply(terms, &rho);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((out[i][j] - rho[i][j]).norm() < 1e-12, "{input:?}");
                }
            }
        }
        // a mixed, off-axis input too
        let a = density(PrepState::XPlus);
        let b = density(PrepState::YMinus);
        let z = density(PrepState::Z1);
        let mut rho = [[C::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                rho[i][j] = a[i][j] * 0.5 + b[i][j] * 0.3 + z[i][j] * 0.2;
            }
        }
        let out = apply(terms, &rho);
        for i in 0..2 {
            for j in 0..2 {
                assert!((out[i][j] - rho[i][j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn peng_table() {
        let terms = peng_terms();
        assert_eq!(terms.len(), 8);
        assert_eq!(one_norm(&terms), Rational64::from_integer(4));
        assert!(terms.iter().all(|t| t.coefficient.abs() == half(1)));
        assert_eq!(terms.iter().filter(|t| t.outcome_sign).count(), 6);
        assert_identity(&terms);
    }

    #[test]
    fn harada_table() {
        let terms = harada_terms();
        assert_eq!(terms.len(), 6);
        assert_eq!(one_norm(&terms), Rational64::from_integer(3));
        for t in &terms {
            assert!(!t.outcome_sign);
            assert_eq!(t.coefficient.is_negative(), t.prep == Prep::Flipped);
        }
        assert_identity(&terms);
    }

    #[test]
    fn kappa_is_twelve_and_signs_multiply() {
        assert_eq!(kappa(), Rational64::from_integer(12));
        let flipped = harada_terms().into_iter().find(|t| t.prep == Prep::Flipped).unwrap();
        let negative = peng_terms().into_iter().find(|t| t.coefficient.is_negative()).unwrap();
        assert_eq!(flipped.shot_sign(false) * negative.shot_sign(true), -1);
        assert_eq!(flipped.shot_sign(true) * negative.shot_sign(false), 1);
        let probs: f64 = harada_terms().iter().map(|t| t.probability(Rational64::from_integer(3))).sum();
        assert!((probs - 1.0).abs() < 1e-15);
    }
}
