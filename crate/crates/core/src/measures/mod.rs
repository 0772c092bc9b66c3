//! Weighted point measures standing for μ_f, ν_f and S_K.

mod build;

pub use build::{
    boundary_rule, build_mu, build_nu, centering_defect, essential_continuity_test, nu_mass_bound,
    nu_refinement_change, BoundaryNode, CenteringDefect,
};


use crate::linalg::{KahanSum, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Euclidean,
    /// Unit sphere S^{n−1}; in 1D the two points ±1.
    Sphere,
}

impl Domain {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Euclidean => "euclidean",
            Self::Sphere => "sphere",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Mu,
    Nu,
    SurfaceArea,
    Custom,
}

impl Provenance {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Mu => "mu",
            Self::Nu => "nu",
            Self::SurfaceArea => "surface-area",
            Self::Custom => "custom",
        }
    }
}

/// Finite weighted point cloud. Points are stored flat, `dim` coordinates
/// per atom, in construction order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    domain: Domain,
    provenance: Provenance,
}

impl DiscreteMeasure {
    pub fn euclidean(dim: usize, provenance: Provenance) -> Self {
        Self { dim, points: Vec::new(), weights: Vec::new(), domain: Domain::Euclidean, provenance }
    }

    pub fn sphere(dim: usize, provenance: Provenance) -> Self {
        Self { dim, points: Vec::new(), weights: Vec::new(), domain: Domain::Sphere, provenance }
    }

    /// Appends an atom. Negative or non-finite weights are a programming error.
    pub fn push(&mut self, point: &[f64], weight: f64) {
        debug_assert_eq!(point.len(), self.dim);
        debug_assert!(weight >= 0.0 && weight.is_finite(), "bad weight {weight}");
        self.points.extend_from_slice(point);
        self.weights.push(weight);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points.chunks_exact(self.dim.max(1)).zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = KahanSum::new();
        for &w in &self.weights {
            s.add(w);
        }
        s.value()
    }

    /// Σ weight·ψ(point), compensated, in atom order. Atoms of zero weight are
    /// skipped so that ψ = +∞ there does not poison the sum.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, psi: F) -> f64 {
        let mut s = KahanSum::new();
        for (p, w) in self.atoms() {
            if w > 0.0 {
                s.add(w * psi(p));
            }
        }
        s.value()
    }

    /// Same as [`Self::integrate`] with ψ evaluated in parallel; the sum is
    /// still taken in atom order.
    pub fn integrate_par<F: Fn(&[f64]) -> f64 + Sync>(&self, psi: F) -> f64 {
        use rayon::prelude::*;
        let vals: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let w = self.weights[i];
                if w > 0.0 {
                    w * psi(self.point(i))
                } else {
                    0.0
                }
            })
            .collect();
        let mut s = KahanSum::new();
        for v in vals {
            s.add(v);
        }
        s.value()
    }

    /// First moment ∫x dm.
    pub fn moment(&self) -> Vec<f64> {
        let mut acc = [KahanSum::new(); MAX_DIM];
        for (p, w) in self.atoms() {
            for k in 0..self.dim {
                acc[k].add(w * p[k]);
            }
        }
        acc[..self.dim].iter().map(KahanSum::value).collect()
    }

    /// Merges atoms sitting at identical points (exact equality), keeping the
    /// first occurrence's position in the order.
    pub fn merged(&self) -> Self {
        let mut out = Self { points: Vec::new(), weights: Vec::new(), ..self.clone() };
        for (p, w) in self.atoms() {
            match (0..out.len()).find(|&i| out.point(i) == p) {
                Some(i) => out.weights[i] += w,
                None => out.push(p, w),
            }
        }
        out
    }

    /// Rescales all weights by `s ≥ 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Self { weights: self.weights.iter().map(|w| w * s).collect(), ..self.clone() }
    }
}

/// ∫ψ dm, the free-function form of [`DiscreteMeasure::integrate`].
pub fn measure_integrate<F: Fn(&[f64]) -> f64>(m: &DiscreteMeasure, psi: F) -> f64 {
    m.integrate(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{surface_area_measure, ConvexBody};

    #[test]
    fn square_surface_measure_balances() {
        let sq = ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let s = surface_area_measure(&sq).unwrap();
        assert_eq!(s.len(), 4);
        assert!((s.total_mass() - 8.0).abs() < 1e-14);
        let m = s.moment();
        assert!(m.iter().all(|v| v.abs() < 1e-14));
        for (_, w) in s.atoms() {
            assert!((w - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn interval_surface_measure_and_asymmetric_perimeter() {
        let iv = ConvexBody::interval(0.0, 1.0).unwrap();
        let s = surface_area_measure(&iv).unwrap();
        let l = ConvexBody::interval(-1.0, 2.0).unwrap();
        assert_eq!(measure_integrate(&s, |p| l.support(p)), 3.0);
    }

    #[test]
    fn merge_combines_duplicate_atoms() {
        let mut m = DiscreteMeasure::euclidean(1, Provenance::Custom);
        m.push(&[1.0], 0.5);
        m.push(&[-1.0], 0.25);
        m.push(&[1.0], 0.5);
        let mm = m.merged();
        assert_eq!(mm.len(), 2);
        assert_eq!(mm.weight(0), 1.0);
    }
}
