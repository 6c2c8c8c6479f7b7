//! Simultaneous root finding by the Aberth-Ehrlich iteration.

use num_complex::Complex64;
use rand::Rng;

use super::poly::{Polynomial, RootList};
use crate::error::{Error, Result};
use crate::linalg::rng::{slots, stream};

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootFinderOptions {
    /// Acceptance bound on `max_k |P(b_k)| / sum_i |c_i| max(1, |b_k|)^i`.
    pub tol: f64,
    pub max_iter: usize,
    /// Seeds the angular jitter of the starting circle.
    pub seed: u64,
}

impl Default for RootFinderOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
            seed: 0,
        }
    }
}

/// Coefficient-scaled magnitude used for both freezing and acceptance.
fn scale_at(p: &Polynomial, z: Complex64) -> f64 {
    let r = z.norm().max(1.0);
    p.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

/// Largest scaled residual `|P(z)| / scale(z)` over `roots`.
pub fn scaled_residual(p: &Polynomial, roots: &[Complex64]) -> f64 {
    roots
        .iter()
        .map(|&z| p.eval(z).norm() / scale_at(p, z))
        .fold(0.0, f64::max)
}

/// All roots of `p`, clustered numerically where `p` has multiple roots.
///
/// Starts from a circle of radius `1 + max|c_i|` (monic coefficients) around
/// the root centroid, with golden-angle spacing and seeded jitter, then runs
/// Gauss-Seidel Aberth updates and a short Newton polish.
pub fn find_roots(p: &Polynomial, opts: &RootFinderOptions) -> Result<RootList> {
    let degree = p.degree();
    if degree == 0 || p.leading() == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidInput("root finding needs degree >= 1".into()));
    }
    let lead = p.leading();
    let monic = Polynomial {
        coeffs: p.coeffs.iter().map(|&c| c / lead).collect(),
    };
    if degree == 1 {
        return RootList::new(vec![-monic.coeffs[0]]);
    }

    let centroid = -monic.coeffs[degree - 1] / degree as f64;
    let radius = 1.0 + monic.coeffs[..degree].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut rng = stream(opts.seed, 0, slots::ROOTS);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let jitter: f64 = rng.random_range(0.0..0.1);
            centroid + Complex64::from_polar(radius, k as f64 * GOLDEN_ANGLE + jitter)
        })
        .collect();

    let mut frozen = vec![false; degree];
    let mut iterations = 0;
    while iterations < opts.max_iter && frozen.iter().any(|f| !f) {
        iterations += 1;
        for k in 0..degree {
            if frozen[k] {
                continue;
            }
            let (v, dv) = monic.eval_with_derivative(z[k]);
            if v == Complex64::new(0.0, 0.0)
                || v.norm() <= 4.0 * f64::EPSILON * monic.eval_magnitude(z[k])
            {
                frozen[k] = true;
                continue;
            }
            if dv == Complex64::new(0.0, 0.0) {
                // stationary point: nudge off it and try again next sweep
                z[k] += Complex64::from_polar(f64::EPSILON.sqrt() * radius, k as f64);
                continue;
            }
            let ratio = v / dv;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != k && z[j] != z[k])
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[k] -= step;
            if step.norm() <= 2.0 * f64::EPSILON * z[k].norm().max(1.0) {
                frozen[k] = true;
            }
        }
    }

    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = monic.eval_with_derivative(*zk);
            if dv == Complex64::new(0.0, 0.0) {
                break;
            }
            let candidate = *zk - v / dv;
            if monic.eval(candidate).norm() < v.norm() {
                *zk = candidate;
            } else {
                break;
            }
        }
    }

    polish_clusters(&monic, &mut z);

    let residual = scaled_residual(&monic, &z);
    if residual <= opts.tol {
        RootList::new(z)
    } else {
        Err(Error::NoConvergence {
            iterations,
            residual,
        })
    }
}

/// Recenters numerically unresolved clusters.
///
/// Approximations to an `m`-fold root stall anywhere in a noise ball of
/// radius about `(eps * scale / |p^(m)/m!|)^(1/m)`, so their mean can be far
/// less accurate than a simple root. The centroid of such a cluster is a
/// simple root of `p^(m-1)`; Newton on that derivative pins it down and the
/// cluster is shifted onto it, preserving the relative offsets.
fn polish_clusters(p: &Polynomial, z: &mut [Complex64]) {
    let mut assigned = vec![false; z.len()];
    for i in 0..z.len() {
        if assigned[i] {
            continue;
        }
        let reach = 1e-2 * z[i].norm().max(1.0);
        let group: Vec<usize> = (i..z.len())
            .filter(|&j| !assigned[j] && (z[j] - z[i]).norm() <= reach)
            .collect();
        for &j in &group {
            assigned[j] = true;
        }
        let m = group.len();
        if m < 2 {
            continue;
        }
        let mean = group.iter().map(|&j| z[j]).sum::<Complex64>() / m as f64;
        let spread = group.iter().map(|&j| (z[j] - mean).norm()).fold(0.0, f64::max);

        let mut lower = p.clone();
        for _ in 0..m - 1 {
            lower = lower.derivative();
        }
        let upper = lower.derivative();
        let factorial: f64 = (1..=m).map(|k| k as f64).product();
        let taylor = upper.eval(mean).norm() / factorial;
        if taylor == 0.0 {
            continue;
        }
        let noise = (f64::EPSILON * p.eval_magnitude(mean) / taylor).powf(1.0 / m as f64);
        if spread > 16.0 * noise {
            continue;
        }
        let mut center = mean;
        let mut value = lower.eval(center).norm();
        for _ in 0..8 {
            let slope = upper.eval(center);
            if slope == Complex64::new(0.0, 0.0) {
                break;
            }
            let next = center - lower.eval(center) / slope;
            let next_value = lower.eval(next).norm();
            if next_value < value {
                center = next;
                value = next_value;
            } else {
                break;
            }
        }
        for &j in &group {
            z[j] = center + (z[j] - mean);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::poly::{coeffs_from_roots, differentiate};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn double_root_at_origin() {
        let p = Polynomial {
            coeffs: vec![c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
        };
        let r = find_roots(&p, &RootFinderOptions::default()).unwrap();
        assert_eq!(r.degree(), 2);
        for z in r.roots() {
            assert!(z.norm() < 1e-7);
        }
    }

    #[test]
    fn plus_minus_one() {
        let p = Polynomial {
            coeffs: vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        };
        let r = sorted(find_roots(&p, &RootFinderOptions::default()).unwrap().roots().to_vec());
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn critical_points_of_one_two_three() {
        // 3z^2 - 12z + 11, roots 2 -+ 1/sqrt(3) by the quadratic formula
        let roots = RootList::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        let dp = differentiate(&coeffs_from_roots(&roots));
        assert_eq!(dp.coeffs, vec![c(11.0, 0.0), c(-12.0, 0.0), c(3.0, 0.0)]);
        let disc: f64 = 144.0 - 4.0 * 3.0 * 11.0;
        let expected = [(12.0 - disc.sqrt()) / 6.0, (12.0 + disc.sqrt()) / 6.0];
        assert!((expected[0] - (2.0 - 1.0 / 3f64.sqrt())).abs() < 1e-15);
        let r = sorted(find_roots(&dp, &RootFinderOptions::default()).unwrap().roots().to_vec());
        for (got, want) in r.iter().zip(expected) {
            assert!((got - c(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn triple_cluster_is_accepted() {
        let roots = RootList::new(vec![c(0.5, 0.5); 4]).unwrap();
        let p = coeffs_from_roots(&roots).to_polynomial();
        let r = find_roots(&p, &RootFinderOptions::default()).unwrap();
        for z in r.roots() {
            assert!((z - c(0.5, 0.5)).norm() < 1e-3);
        }
        let mean: Complex64 = r.roots().iter().sum::<Complex64>() / 4.0;
        assert!((mean - c(0.5, 0.5)).norm() < 1e-12, "{mean}");
    }

    #[test]
    fn constant_is_rejected() {
        let p = Polynomial {
            coeffs: vec![c(1.0, 0.0)],
        };
        assert!(find_roots(&p, &RootFinderOptions::default()).is_err());
    }

    #[test]
    fn too_few_iterations_reports_no_convergence() {
        let roots = RootList::new((0..12).map(|k| c(k as f64, 0.3 * k as f64)).collect()).unwrap();
        let p = coeffs_from_roots(&roots).to_polynomial();
        let opts = RootFinderOptions {
            max_iter: 1,
            ..Default::default()
        };
        assert!(matches!(find_roots(&p, &opts), Err(Error::NoConvergence { iterations: 1, .. })));
    }
}
