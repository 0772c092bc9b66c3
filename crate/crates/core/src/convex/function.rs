use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use super::envelope::{exponential_envelope, EnvelopeBound};
use super::integrate::{integrate, QuadratureSpec};
use super::potential::{Gradient, Potential};
use crate::bodies::ConvexBody;
use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// f = e^{−φ} together with its support K_f = closure{φ < ∞}.
#[derive(Debug, Clone)]
pub struct LogConcaveFn {
    potential: Potential,
    support: ConvexBody,
    integral: Arc<OnceLock<f64>>,
    envelope: Arc<OnceLock<EnvelopeBound>>,
}

impl LogConcaveFn {
    /// e^{−φ}; the support is derived from the potential's domain.
    pub fn new(potential: Potential) -> Result<Self> {
        let support = potential.domain()?;
        Self::with_support(potential, support)
    }

    pub(crate) fn with_support(potential: Potential, support: ConvexBody) -> Result<Self> {
        check_dim(potential.dim(), support.dim())?;
        Ok(Self { potential, support, integral: Arc::default(), envelope: Arc::default() })
    }

    /// e^{−|x|²/2}.
    pub fn gaussian(n: usize) -> Self {
        Self::new(Potential::half_square(n)).expect("quadratic potential")
    }

    /// 𝟙_K.
    pub fn indicator(body: ConvexBody) -> Self {
        let n = body.dim();
        let p = Potential::with_indicator(Potential::constant(n, 0.0), body.clone()).expect("matching dimensions");
        Self::with_support(p, body).expect("matching dimensions")
    }

    /// e^{−(x₁+…+xₙ)} on the nonnegative orthant.
    pub fn half_exponential(n: usize) -> Self {
        let body = ConvexBody::axis_box(vec![0.0; n], vec![f64::INFINITY; n]).expect("orthant");
        let p = Potential::with_indicator(Potential::Linear { b: vec![1.0; n], c: 0.0 }, body).expect("dims");
        Self::new(p).expect("orthant exponential")
    }

    /// e^{−α|x|^p}.
    pub fn power(n: usize, alpha: f64, p: f64) -> Result<Self> {
        Self::new(Potential::power_norm(n, alpha, p)?)
    }

    /// e^{−⟨b,x⟩−c} restricted to K.
    pub fn linear_on(b: Vec<f64>, c: f64, body: ConvexBody) -> Result<Self> {
        Self::new(Potential::with_indicator(Potential::Linear { b, c }, body)?)
    }

    /// exp(−s(1/(1−|x|²/r²) − 1)) on the open ball of radius r; vanishes on
    /// the boundary sphere.
    pub fn barrier(n: usize, radius: f64, scale: f64) -> Result<Self> {
        Self::new(Potential::barrier(n, radius, scale)?)
    }

    /// exp(−½(x−m)ᵀA(x−m)).
    pub fn gaussian_with(mean: Vec<f64>, a: DMatrix<f64>) -> Result<Self> {
        if !linalg::is_spd(&a) {
            return Err(Error::InvalidArgument("covariance form must be SPD".into()));
        }
        let n = mean.len();
        let q = Potential::quadratic(a, vec![0.0; n], 0.0)?;
        Self::new(Potential::affine(q, mean, vec![0.0; n], 0.0))
    }

    /// x ↦ f(x − a).
    pub fn translate(&self, a: &[f64]) -> Result<Self> {
        check_dim(self.dim(), a.len())?;
        let n = self.dim();
        let p = Potential::affine(self.potential.clone(), a.to_vec(), vec![0.0; n], 0.0);
        Self::with_support(p, self.support.translate(a))
    }

    /// e^c·f.
    pub fn scale_exp(&self, c: f64) -> Result<Self> {
        let n = self.dim();
        let p = Potential::affine(self.potential.clone(), vec![0.0; n], vec![0.0; n], -c);
        Self::with_support(p, self.support.clone())
    }

    /// f·𝟙_K.
    pub fn restrict(&self, body: &ConvexBody) -> Result<Self> {
        let support = super::potential::intersect(&self.support, body)?;
        let p = Potential::with_indicator(self.potential.clone(), body.clone())?;
        Self::with_support(p, support)
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn support(&self) -> &ConvexBody {
        &self.support
    }

    /// e^{−φ(x)}, with e^{−∞} = 0.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let v = self.potential.value(x);
        if v == f64::INFINITY {
            0.0
        } else {
            (-v).exp()
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Gradient> {
        self.potential.gradient(x)
    }

    /// sup f = e^{−inf φ}, when the infimum is known in closed form.
    pub fn max_value(&self) -> Option<f64> {
        self.potential.infimum().map(|m| (-m).exp())
    }

    /// (t·f)(x) = f(x/t)^t.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        let p = self.potential.dilate(t)?;
        Self::with_support(p, self.support.scale(t))
    }

    /// ∫f with the default quadrature, cached.
    pub fn integral(&self) -> Result<f64> {
        if let Some(v) = self.integral.get() {
            return Ok(*v);
        }
        let v = integrate(self, &QuadratureSpec::default())?.value;
        Ok(*self.integral.get_or_init(|| v))
    }

    /// Exponential envelope f ≤ A e^{−c|x|}, cached.
    pub fn envelope(&self) -> Result<EnvelopeBound> {
        if let Some(e) = self.envelope.get() {
            return Ok(e.clone());
        }
        let e = exponential_envelope(self)?;
        Ok(self.envelope.get_or_init(|| e).clone())
    }

    /// Fails unless 0 < ∫f < ∞.
    pub fn check_integrable(&self) -> Result<f64> {
        let v = self.integral().map_err(|e| match e {
            Error::ZeroFunction => Error::IntegralOutOfRange("f vanishes identically".into()),
            Error::NoEnvelope | Error::Divergent(_) => Error::IntegralOutOfRange(e.to_string()),
            other => other,
        })?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::IntegralOutOfRange(format!("∫f = {v}")));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_of_basic_forms() {
        let ind = LogConcaveFn::indicator(ConvexBody::interval(0.0, 1.0).unwrap());
        assert_eq!(ind.evaluate(&[0.5]), 1.0);
        assert_eq!(ind.evaluate(&[2.0]), 0.0);
        assert_eq!(LogConcaveFn::gaussian(2).evaluate(&[0.0, 0.0]), 1.0);
        let h = LogConcaveFn::half_exponential(1);
        assert_eq!(h.evaluate(&[-0.1]), 0.0);
        assert!((h.evaluate(&[2.0]) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn dilation_of_indicator_scales_support() {
        let l = ConvexBody::interval(-1.0, 2.0).unwrap();
        let d = LogConcaveFn::indicator(l).dilate(2.0).unwrap();
        assert_eq!(d.evaluate(&[3.9]), 1.0);
        assert_eq!(d.evaluate(&[4.1]), 0.0);
        assert_eq!(d.evaluate(&[-1.9]), 1.0);
        assert_eq!(d.evaluate(&[-2.1]), 0.0);
        let f = LogConcaveFn::gaussian(1);
        let same = f.dilate(1.0).unwrap();
        assert_eq!(same.evaluate(&[0.3]), f.evaluate(&[0.3]));
    }

    #[test]
    fn translation_and_scaling() {
        let f = LogConcaveFn::gaussian(2).translate(&[1.0, -2.0]).unwrap();
        assert!((f.evaluate(&[1.0, -2.0]) - 1.0).abs() < 1e-15);
        let g = LogConcaveFn::half_exponential(1).scale_exp(0.5).unwrap();
        assert!((g.evaluate(&[0.0]) - 0.5f64.exp()).abs() < 1e-15);
    }
}
