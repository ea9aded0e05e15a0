//! Quadrature on the reference triangle and reference segment.

use crate::scalar::Real;

/// Barycentric points and weights normalized to the element measure
/// (weights sum to one).
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    pub degree: usize,
}

impl<T: Real> QuadratureRule<T> {
    /// Symmetric 6-point rule, exact for polynomials of degree 4.
    pub fn triangle_degree4() -> Self {
        const A1: f64 = 0.445_948_490_915_964_886_318_329_253_883;
        const W1: f64 = 0.223_381_589_678_011_465_695_007_008_433;
        const A2: f64 = 0.091_576_213_509_770_743_459_571_463_402_2;
        const W2: f64 = 0.109_951_743_655_321_867_638_326_324_9;
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (a, w) in [(A1, W1), (A2, W2)] {
            let a = T::lit(a);
            let b = T::one() - a - a;
            points.extend([[a, a, b], [b, a, a], [a, b, a]]);
            weights.extend([T::lit(w); 3]);
        }
        QuadratureRule {
            points,
            weights,
            degree: 4,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre rule on [0, 1] with `(parameter, weight)` pairs, weights summing to one.
pub fn gauss_segment<T: Real>() -> [(T, T); 4] {
    // 4 points, exact to degree 7
    let x = [
        (0.339_981_043_584_856_264_802_665_759_103, 0.652_145_154_862_546_142_626_936_050_778),
        (0.861_136_311_594_052_575_223_946_488_893, 0.347_854_845_137_453_857_373_063_949_222),
    ];
    let half = T::lit(0.5);
    [
        (half - half * T::lit(x[1].0), half * T::lit(x[1].1)),
        (half - half * T::lit(x[0].0), half * T::lit(x[0].1)),
        (half + half * T::lit(x[0].0), half * T::lit(x[0].1)),
        (half + half * T::lit(x[1].0), half * T::lit(x[1].1)),
    ]
}

/// Barycentric lattice of the given order (`(order + 1)(order + 2) / 2` points).
pub fn barycentric_lattice<T: Real>(order: usize) -> Vec<[T; 3]> {
    let n = T::from_usize_lossy(order);
    let mut pts = Vec::new();
    for i in 0..=order {
        for j in 0..=(order - i) {
            let k = order - i - j;
            pts.push([
                T::from_usize_lossy(i) / n,
                T::from_usize_lossy(j) / n,
                T::from_usize_lossy(k) / n,
            ]);
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn degree4_rule_exact_on_monomials() {
        let rule = QuadratureRule::<f64>::triangle_degree4();
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 1.0).abs() < 1e-15);
        // reference triangle (0,0),(1,0),(0,1): x = b1, y = b2, area 1/2
        for a in 0..=4u32 {
            for b in 0..=(4 - a) {
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                let q: f64 = 0.5
                    * rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum::<f64>();
                assert!(((q - exact) / exact).abs() < 1e-14, "x^{a} y^{b}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn segment_rule_exact_to_degree7() {
        let rule = gauss_segment::<f64>();
        for k in 0..=7 {
            let q: f64 = rule.iter().map(|&(s, w)| w * s.powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn lattice_contains_vertices() {
        let pts = barycentric_lattice::<f64>(4);
        assert_eq!(pts.len(), 15);
        for v in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            assert!(pts.contains(&v));
        }
    }
}
