//! Scalar invariant profiles k(u), δ(u), λ(u) and their derivatives.
//!
//! A profile is either a constant, a parsed expression (differentiated
//! symbolically), or a uniform sample table (interpolated by a local
//! polynomial whose derivatives are taken analytically).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("u = {u} outside domain [{lo}, {hi}]")]
    Domain { u: f64, lo: f64, hi: f64 },
    #[error("table with {len} samples is not differentiable (need at least 6)")]
    NonDifferentiableTable { len: usize },
    #[error("unknown built-in class `{0}`")]
    InvalidBuiltin(String),
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

/// Evaluable scalar function of u.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ScalarProfile {
    Constant(f64),
    Expression {
        ast: Expr,
        d1: Expr,
        d2: Expr,
    },
    /// Uniform samples on [u0, u0 + (len-1)*step].
    Table {
        u0: f64,
        step: f64,
        values: Vec<f64>,
    },
}

impl ScalarProfile {
    pub fn constant(c: f64) -> Self {
        ScalarProfile::Constant(c)
    }

    pub fn from_expr(ast: Expr) -> Self {
        let d1 = ast.derivative();
        let d2 = d1.derivative();
        ScalarProfile::Expression { ast, d1, d2 }
    }

    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        Ok(Self::from_expr(Expr::parse(text)?))
    }

    pub fn table(u0: f64, step: f64, values: Vec<f64>) -> Self {
        assert!(step > 0.0 && values.len() >= 2);
        ScalarProfile::Table { u0, step, values }
    }

    /// Native sample spacing for table profiles.
    pub fn sample_spacing(&self) -> Option<f64> {
        match self {
            ScalarProfile::Table { step, .. } => Some(*step),
            _ => None,
        }
    }

    pub fn eval(&self, u: f64) -> Result<f64, ProfileError> {
        match self {
            ScalarProfile::Constant(c) => Ok(*c),
            ScalarProfile::Expression { ast, .. } => Ok(ast.eval(u)?),
            ScalarProfile::Table { .. } => self.interp(u, 0),
        }
    }

    /// Derivative of the profile, `order` 1 or 2.
    pub fn derivative(&self, u: f64, order: u8) -> Result<f64, ProfileError> {
        assert!(order == 1 || order == 2);
        match self {
            ScalarProfile::Constant(_) => Ok(0.0),
            ScalarProfile::Expression { d1, d2, .. } => {
                let d = if order == 1 { d1 } else { d2 };
                Ok(d.eval(u)?)
            }
            ScalarProfile::Table { values, .. } => {
                if values.len() < 6 {
                    return Err(ProfileError::NonDifferentiableTable { len: values.len() });
                }
                self.interp(u, order)
            }
        }
    }

    /// Local polynomial interpolation over the 6 nearest samples; `deriv` is
    /// 0, 1 or 2. Newton form evaluated with derivative propagation.
    fn interp(&self, u: f64, deriv: u8) -> Result<f64, ProfileError> {
        let (u0, step, values) = match self {
            ScalarProfile::Table { u0, step, values } => (*u0, *step, values),
            _ => unreachable!(),
        };
        let n = values.len();
        let hi = u0 + step * (n - 1) as f64;
        // tolerate roundoff at the endpoints
        let eps = 1e-9 * step.max(1.0);
        if u < u0 - eps || u > hi + eps {
            return Err(ProfileError::Domain { u, lo: u0, hi });
        }
        let width = 6.min(n);
        let idx = ((u - u0) / step).floor() as isize - (width as isize / 2 - 1);
        let i0 = idx.clamp(0, (n - width) as isize) as usize;
        // divided differences
        let xs: Vec<f64> = (0..width).map(|j| u0 + step * (i0 + j) as f64).collect();
        let mut coef: Vec<f64> = values[i0..i0 + width].to_vec();
        for k in 1..width {
            for j in (k..width).rev() {
                coef[j] = (coef[j] - coef[j - 1]) / (xs[j] - xs[j - k]);
            }
        }
        let mut p = coef[width - 1];
        let mut dp = 0.0;
        let mut ddp = 0.0;
        for k in (0..width - 1).rev() {
            let dx = u - xs[k];
            ddp = ddp * dx + 2.0 * dp;
            dp = dp * dx + p;
            p = p * dx + coef[k];
        }
        Ok(match deriv {
            0 => p,
            1 => dp,
            _ => ddp,
        })
    }
}

/// Central finite differences per the fixed step policy: 5-point stencils with
/// step max(1e-5, 1e-5*|u|). Used as an independent derivative oracle.
pub fn fd_derivative<F>(f: F, u: f64, order: u8) -> Result<f64, ProfileError>
where
    F: Fn(f64) -> Result<f64, ProfileError>,
{
    let h = 1e-5_f64.max(1e-5 * u.abs());
    let fm2 = f(u - 2.0 * h)?;
    let fm1 = f(u - h)?;
    let fp1 = f(u + h)?;
    let fp2 = f(u + 2.0 * h)?;
    match order {
        1 => Ok((fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)),
        2 => {
            let f0 = f(u)?;
            Ok((-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h))
        }
        _ => panic!("order must be 1 or 2"),
    }
}

/// Striction angle from λ = cot σ, with σ ∈ (−π/2, π/2] and σ = π/2 ⟺ λ = 0.
pub fn sigma_from_lambda(lambda: f64) -> f64 {
    if lambda == 0.0 {
        PI / 2.0
    } else {
        (1.0 / lambda).atan()
    }
}

/// The complete invariant system of a skew ruled surface.
///
/// λ = cot σ is stored as the primary striction quantity so that orthoids
/// (σ = π/2) carry an exact λ = 0 instead of cot-singularity noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantProfile {
    k: ScalarProfile,
    delta: ScalarProfile,
    lambda: ScalarProfile,
    domain: (f64, f64),
}

impl InvariantProfile {
    /// Validates δ ≠ 0 and the sign coupling sign σ = sign δ on a 100-point
    /// grid before accepting the profile.
    pub fn new(
        k: ScalarProfile,
        delta: ScalarProfile,
        lambda: ScalarProfile,
        domain: (f64, f64),
    ) -> Result<Self, ProfileError> {
        if !(domain.0 < domain.1) {
            return Err(ProfileError::InvariantViolation(format!(
                "empty domain [{}, {}]",
                domain.0, domain.1
            )));
        }
        let p = InvariantProfile { k, delta, lambda, domain };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), ProfileError> {
        let (lo, hi) = self.domain;
        let n = 100;
        for i in 0..n {
            let u = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let d = self.delta.eval(u)?;
            let l = self.lambda.eval(u)?;
            if d == 0.0 || !d.is_finite() {
                return Err(ProfileError::InvariantViolation(format!(
                    "δ({u}) = {d}; surface must be skew"
                )));
            }
            // sign σ = sign δ; λ = 0 means σ = π/2, which forces δ > 0.
            // λ within 1e-6 of zero counts as zero (σ within 1e-6 of π/2)
            // so that profiles built from sampled data are not rejected over
            // extraction noise.
            if l.abs() <= 1e-6 {
                if d < 0.0 {
                    return Err(ProfileError::InvariantViolation(format!(
                        "σ({u}) = π/2 (λ = 0) requires δ > 0, got δ = {d}"
                    )));
                }
            } else if l.signum() != d.signum() {
                return Err(ProfileError::InvariantViolation(format!(
                    "sign σ ≠ sign δ at u = {u}: λ = {l}, δ = {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn k_profile(&self) -> &ScalarProfile {
        &self.k
    }

    pub fn delta_profile(&self) -> &ScalarProfile {
        &self.delta
    }

    pub fn lambda_profile(&self) -> &ScalarProfile {
        &self.lambda
    }

    fn check_domain(&self, u: f64) -> Result<(), ProfileError> {
        let (lo, hi) = self.domain;
        let eps = 1e-9 * (hi - lo).max(1.0);
        if u < lo - eps || u > hi + eps {
            return Err(ProfileError::Domain { u, lo, hi });
        }
        Ok(())
    }

    pub fn k(&self, u: f64) -> Result<f64, ProfileError> {
        self.check_domain(u)?;
        self.k.eval(u)
    }

    pub fn delta(&self, u: f64) -> Result<f64, ProfileError> {
        self.check_domain(u)?;
        self.delta.eval(u)
    }

    pub fn lambda(&self, u: f64) -> Result<f64, ProfileError> {
        self.check_domain(u)?;
        self.lambda.eval(u)
    }

    pub fn sigma(&self, u: f64) -> Result<f64, ProfileError> {
        Ok(sigma_from_lambda(self.lambda(u)?))
    }

    pub fn delta_prime(&self, u: f64) -> Result<f64, ProfileError> {
        self.check_domain(u)?;
        self.delta.derivative(u, 1)
    }

    pub fn lambda_prime(&self, u: f64) -> Result<f64, ProfileError> {
        self.check_domain(u)?;
        self.lambda.derivative(u, 1)
    }
}

/// Builds one of the named surface classes.
///
/// Recognized names: `helicoid` (δ₀), `edlinger` (k₀, δ₀),
/// `const_drall_orthoid` (k₀, δ₀), `const_drall_conoid` (λ₀, δ₀).
/// Arbitrary profiles go through [`InvariantProfile::new`] instead.
pub fn make_builtin_profile(
    name: &str,
    params: &BTreeMap<String, f64>,
    domain: (f64, f64),
) -> Result<InvariantProfile, ProfileError> {
    let get = |key: &'static str| -> Result<f64, ProfileError> {
        params.get(key).copied().ok_or(ProfileError::MissingParam(key))
    };
    let c = ScalarProfile::constant;
    match name {
        "helicoid" => {
            let d0 = get("delta0")?;
            InvariantProfile::new(c(0.0), c(d0), c(0.0), domain)
        }
        "edlinger" => {
            let k0 = get("k0")?;
            let d0 = get("delta0")?;
            if k0 == 0.0 {
                return Err(ProfileError::InvariantViolation(
                    "edlinger requires k₀ ≠ 0".into(),
                ));
            }
            InvariantProfile::new(c(k0), c(d0), c(-1.0 / k0), domain)
        }
        "const_drall_orthoid" => {
            let k0 = get("k0")?;
            let d0 = get("delta0")?;
            InvariantProfile::new(c(k0), c(d0), c(0.0), domain)
        }
        "const_drall_conoid" => {
            let l0 = get("lambda0")?;
            let d0 = get("delta0")?;
            InvariantProfile::new(c(0.0), c(d0), c(l0), domain)
        }
        other => Err(ProfileError::InvalidBuiltin(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
    }

    #[test]
    fn constant_profile_evaluates_everywhere() {
        let p = ScalarProfile::constant(1.0);
        assert_eq!(p.eval(3.7).unwrap(), 1.0);
    }

    #[test]
    fn expression_profile_matches_identity() {
        let p = ScalarProfile::parse("sin(u)").unwrap();
        assert!((p.eval(PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_of_squares_interpolates() {
        let values: Vec<f64> = (0..11).map(|i| (i as f64 * 0.1).powi(2)).collect();
        let p = ScalarProfile::table(0.0, 0.1, values);
        assert!((p.eval(0.5).unwrap() - 0.25).abs() < 1e-9);
        assert!((p.eval(0.537).unwrap() - 0.537_f64.powi(2)).abs() < 1e-9);
        assert_eq!(p.sample_spacing(), Some(0.1));
    }

    #[test]
    fn table_rejects_out_of_domain_query() {
        let p = ScalarProfile::table(0.0, 0.1, vec![0.0; 11]);
        assert!(matches!(p.eval(1.5), Err(ProfileError::Domain { .. })));
    }

    #[test]
    fn constant_derivative_is_zero() {
        let p = ScalarProfile::constant(1.0);
        for u in grid(-3.0, 3.0, 7) {
            assert_eq!(p.derivative(u, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn symbolic_derivative_examples() {
        let p = ScalarProfile::parse("sin(u)").unwrap();
        assert!((p.derivative(0.0, 1).unwrap() - 1.0).abs() < 1e-8);
        let q = ScalarProfile::parse("u^3").unwrap();
        assert!((q.derivative(1.0, 2).unwrap() - 6.0).abs() < 1e-6);
    }

    #[test]
    fn symbolic_derivative_agrees_with_fd_oracle() {
        let p = ScalarProfile::parse("sin(u)*exp(u/3) + u^2").unwrap();
        for u in grid(-2.0, 2.0, 50) {
            let sym = p.derivative(u, 1).unwrap();
            let num = fd_derivative(|x| p.eval(x), u, 1).unwrap();
            let scale = sym.abs().max(1.0);
            assert!(
                (sym - num).abs() / scale < 1e-6,
                "mismatch at u={u}: {sym} vs {num}"
            );
        }
    }

    #[test]
    fn fd_oracle_richardson_consistency() {
        // the 5-point first-derivative stencil at two steps brackets the value
        let f = |x: f64| Ok(x.sin());
        let d = fd_derivative(f, 0.0, 1).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn small_table_derivative_rejected() {
        let p = ScalarProfile::table(0.0, 0.1, vec![0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(
            p.derivative(0.2, 1),
            Err(ProfileError::NonDifferentiableTable { .. })
        ));
    }

    #[test]
    fn table_derivative_accuracy() {
        let values: Vec<f64> = (0..=629).map(|i| (i as f64 * 0.01).sin()).collect();
        let p = ScalarProfile::table(0.0, 0.01, values);
        for u in grid(0.5, 5.5, 23) {
            assert!((p.derivative(u, 1).unwrap() - u.cos()).abs() < 1e-9);
            assert!((p.derivative(u, 2).unwrap() + u.sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn helicoid_builtin() {
        let mut params = BTreeMap::new();
        params.insert("delta0".to_string(), 1.0);
        let p = make_builtin_profile("helicoid", &params, (0.0, 2.0 * PI)).unwrap();
        for u in grid(0.0, 2.0 * PI, 10) {
            assert_eq!(p.k(u).unwrap(), 0.0);
            assert_eq!(p.lambda(u).unwrap(), 0.0);
            assert_eq!(p.delta(u).unwrap(), 1.0);
        }
    }

    #[test]
    fn edlinger_builtin_satisfies_class_conditions() {
        let mut params = BTreeMap::new();
        params.insert("k0".to_string(), -1.0);
        params.insert("delta0".to_string(), 1.0);
        let p = make_builtin_profile("edlinger", &params, (0.0, 2.0 * PI)).unwrap();
        for u in grid(0.0, 2.0 * PI, 10) {
            assert_eq!(p.lambda(u).unwrap(), 1.0);
            assert_eq!(p.delta_prime(u).unwrap(), 0.0);
            let kl1 = p.k(u).unwrap() * p.lambda(u).unwrap() + 1.0;
            assert_eq!(kl1, 0.0);
        }
    }

    #[test]
    fn conoid_builtin_satisfies_class_conditions() {
        let mut params = BTreeMap::new();
        params.insert("lambda0".to_string(), 1.0);
        params.insert("delta0".to_string(), 1.0);
        let p = make_builtin_profile("const_drall_conoid", &params, (0.0, 2.0 * PI)).unwrap();
        for u in grid(0.0, 2.0 * PI, 10) {
            assert_eq!(p.k(u).unwrap(), 0.0);
            assert_eq!(p.delta_prime(u).unwrap(), 0.0);
        }
    }

    #[test]
    fn invalid_builtin_name_rejected() {
        let params = BTreeMap::new();
        assert!(matches!(
            make_builtin_profile("moebius", &params, (0.0, 1.0)),
            Err(ProfileError::InvalidBuiltin(_))
        ));
    }

    #[test]
    fn vanishing_drall_rejected() {
        let k = ScalarProfile::constant(0.0);
        let d = ScalarProfile::parse("sin(u)").unwrap();
        let l = ScalarProfile::constant(0.0);
        assert!(matches!(
            InvariantProfile::new(k, d, l, (0.0, PI)),
            Err(ProfileError::InvariantViolation(_))
        ));
    }

    #[test]
    fn sign_mismatch_rejected() {
        // λ > 0 with δ < 0 violates sign σ = sign δ
        let k = ScalarProfile::constant(0.0);
        let d = ScalarProfile::constant(-1.0);
        let l = ScalarProfile::constant(1.0);
        assert!(InvariantProfile::new(k, d, l, (0.0, 1.0)).is_err());
        // σ = π/2 (λ = 0) with δ < 0 likewise
        let k = ScalarProfile::constant(0.0);
        let d = ScalarProfile::constant(-1.0);
        let l = ScalarProfile::constant(0.0);
        assert!(InvariantProfile::new(k, d, l, (0.0, 1.0)).is_err());
    }

    #[test]
    fn lambda_sigma_consistency_on_grid() {
        let k = ScalarProfile::constant(0.3);
        let d = ScalarProfile::parse("1 + 0.1*sin(u)").unwrap();
        let l = ScalarProfile::constant(0.2);
        let p = InvariantProfile::new(k, d, l, (0.0, 6.0)).unwrap();
        for u in grid(0.0, 6.0, 100) {
            let lam = p.lambda(u).unwrap();
            let sig = p.sigma(u).unwrap();
            assert!((lam * sig.sin() - sig.cos()).abs() <= 1e-12);
            assert!(p.delta(u).unwrap() != 0.0);
        }
    }
}
