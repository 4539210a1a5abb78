//! Closed-form proximal operators for the operator-splitting solver.
//!
//! - `soft_threshold`: prox of `t * ||.||_1`, componentwise shrinkage.
//! - `project_l1_ball`: Euclidean projection onto `{x : ||x||_1 <= r}`.
//! - `prox_linf`: prox of `t * ||.||_inf` via Moreau decomposition,
//!   `prox(v) = v - t * P_ball(v / t)` with the unit l1 ball.
//! - `prox_affine`: Euclidean projection onto `{x : E x = b}`,
//!   `z - E'(EE')^{-1}(E z - b)`.

use crate::error::{Error, Result};
use crate::numerics::{norm1, Matrix, SpdFactorization};

/// Outcome of an l1-ball projection: the projected point and the shrinkage
/// threshold that achieves it (`0` when the input is already inside).
#[derive(Debug, Clone)]
pub struct L1BallProjection {
    pub projected: Vec<f64>,
    pub lambda_star: f64,
}

/// Which root-finding route the l1-ball projection uses. The exact sort is
/// the default; bisection on `phi(lambda) = ||S_lambda(v)||_1 - r` is kept
/// for cross-checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1ProjectionMethod {
    SortExact,
    Bisection,
}

/// Componentwise soft thresholding `S_t(v)_i = sign(v_i) max(|v_i| - t, 0)`.
pub fn soft_threshold(v: &[f64], t: f64) -> Result<Vec<f64>> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::invalid(format!(
            "soft threshold needs t >= 0, got {t}"
        )));
    }
    Ok(v.iter().map(|&x| soft_threshold_scalar(x, t)).collect())
}

#[inline]
pub(crate) fn soft_threshold_scalar(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Projects `v` onto the l1 ball of the given radius (exact sort route).
pub fn project_l1_ball(v: &[f64], radius: f64) -> Result<L1BallProjection> {
    project_l1_ball_via(v, radius, L1ProjectionMethod::SortExact)
}

pub fn project_l1_ball_via(
    v: &[f64],
    radius: f64,
    method: L1ProjectionMethod,
) -> Result<L1BallProjection> {
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::invalid(format!(
            "l1-ball projection needs radius > 0, got {radius}"
        )));
    }
    if norm1(v) <= radius {
        return Ok(L1BallProjection {
            projected: v.to_vec(),
            lambda_star: 0.0,
        });
    }
    let lambda_star = match method {
        L1ProjectionMethod::SortExact => threshold_by_sort(v, radius),
        L1ProjectionMethod::Bisection => threshold_by_bisection(v, radius),
    };
    Ok(L1BallProjection {
        projected: v
            .iter()
            .map(|&x| soft_threshold_scalar(x, lambda_star))
            .collect(),
        lambda_star,
    })
}

/// Exact threshold: sort magnitudes descending, find the largest active set
/// size k with `w_k > (sum_{i<=k} w_i - r) / k`, and read lambda off it.
fn threshold_by_sort(v: &[f64], radius: f64) -> f64 {
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut lambda = 0.0;
    for (k, &w) in mags.iter().enumerate() {
        cum += w;
        let candidate = (cum - radius) / (k as f64 + 1.0);
        if candidate < w {
            lambda = candidate;
        } else {
            break;
        }
    }
    lambda.max(0.0)
}

/// Bisection on the non-increasing `phi(lambda) = ||S_lambda(v)||_1 - r`.
fn threshold_by_bisection(v: &[f64], radius: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mass: f64 = v
            .iter()
            .map(|&x| soft_threshold_scalar(x, mid).abs())
            .sum();
        if mass > radius {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Prox of `t * ||.||_inf`: the minimizer of `t ||u||_inf + 0.5 ||u - v||^2`.
pub fn prox_linf(v: &[f64], t: f64) -> Result<Vec<f64>> {
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::invalid(format!("prox_linf needs t > 0, got {t}")));
    }
    let scaled: Vec<f64> = v.iter().map(|x| x / t).collect();
    let proj = project_l1_ball(&scaled, 1.0)?;
    Ok(v.iter()
        .zip(&proj.projected)
        .map(|(x, p)| x - t * p)
        .collect())
}

/// Euclidean projection of `z` onto `{x : E x = b}` given a factorization of
/// `E E'`.
pub fn prox_affine(
    z: &[f64],
    e: &Matrix,
    factor: &SpdFactorization,
    b: &[f64],
) -> Result<Vec<f64>> {
    if e.cols() != z.len() || e.rows() != b.len() || factor.dim() != e.rows() {
        return Err(Error::invalid(format!(
            "prox_affine: E is {}x{}, z has {}, b has {}, factor dim {}",
            e.rows(),
            e.cols(),
            z.len(),
            b.len(),
            factor.dim()
        )));
    }
    let mut resid = e.matvec(z)?;
    for (r, bi) in resid.iter_mut().zip(b) {
        *r -= bi;
    }
    let mult = factor.solve(&resid)?;
    let correction = e.matvec_t(&mult)?;
    Ok(z.iter().zip(&correction).map(|(zi, c)| zi - c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm2;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn soft_threshold_formula() {
        assert_eq!(
            soft_threshold(&[2.0, -0.5, 1.5], 1.0).unwrap(),
            vec![1.0, 0.0, 0.5]
        );
        let v = [0.3, -1.2, 4.0];
        assert_eq!(soft_threshold(&v, 0.0).unwrap(), v.to_vec());
        assert_eq!(soft_threshold(&[3.0, -3.0], 5.0).unwrap(), vec![0.0, 0.0]);
        assert!(soft_threshold(&v, -1.0).is_err());
    }

    #[test]
    fn l1_projection_cases() {
        let r = project_l1_ball(&[3.0, 0.0], 1.0).unwrap();
        assert!((r.projected[0] - 1.0).abs() < 1e-12 && r.projected[1].abs() < 1e-12);
        assert!((r.lambda_star - 2.0).abs() < 1e-12);

        let r = project_l1_ball(&[0.3, -0.2], 1.0).unwrap();
        assert_eq!(r.projected, vec![0.3, -0.2]);
        assert_eq!(r.lambda_star, 0.0);

        // phi(lambda) = (0.6-lambda) + (0.6-lambda) - 1 = 0 at lambda = 0.1
        let r = project_l1_ball(&[0.6, 0.6], 1.0).unwrap();
        assert!((r.projected[0] - 0.5).abs() < 1e-12);
        assert!((r.projected[1] - 0.5).abs() < 1e-12);
        assert!((r.lambda_star - 0.1).abs() < 1e-12);

        assert!(project_l1_ball(&[1.0], 0.0).is_err());
    }

    #[test]
    fn l1_projection_methods_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..8);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let radius = rng.gen_range(0.1..2.0);
            let a = project_l1_ball_via(&v, radius, L1ProjectionMethod::SortExact).unwrap();
            let b = project_l1_ball_via(&v, radius, L1ProjectionMethod::Bisection).unwrap();
            for (x, y) in a.projected.iter().zip(&b.projected) {
                assert!((x - y).abs() < 1e-9, "sort vs bisection mismatch");
            }
        }
    }

    #[test]
    fn prox_linf_annihilates_small_inputs() {
        // ||v||_1 <= t puts v/t inside the unit ball, so the prox returns 0.
        let v = [0.2, -0.3, 0.1];
        let out = prox_linf(&v, 1.0).unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn prox_linf_one_dimensional_reduction() {
        // With v = [3, 0] and t = 1 the minimizer shrinks the max entry by t.
        let out = prox_linf(&[3.0, 0.0], 1.0).unwrap();
        assert!((out[0] - 2.0).abs() < 1e-12 && out[1].abs() < 1e-12);
        assert!(prox_linf(&[1.0], 0.0).is_err());
    }

    #[test]
    fn prox_affine_cases() {
        let e = Matrix::identity(2).unwrap();
        let f = SpdFactorization::new(&e.aat()).unwrap();
        let out = prox_affine(&[9.0, -4.0], &e, &f, &[1.0, 2.0]).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-12 && (out[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn prox_affine_fixed_point_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let e = Matrix::new(3, 7, (0..21).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let f = SpdFactorization::new(&e.aat()).unwrap();
        let x0: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = e.matvec(&x0).unwrap();

        // fixed point: a feasible z is returned unchanged
        let out = prox_affine(&x0, &e, &f, &b).unwrap();
        for (a, c) in out.iter().zip(&x0) {
            assert!((a - c).abs() < 1e-10);
        }

        // general z: feasibility plus (z - out) orthogonal to null(E)
        let z: Vec<f64> = (0..7).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let out = prox_affine(&z, &e, &f, &b).unwrap();
        let back = e.matvec(&out).unwrap();
        for (a, c) in back.iter().zip(&b) {
            assert!((a - c).abs() < 1e-8);
        }
        for _ in 0..20 {
            // random null-space direction: w - E'(EE')^-1 E w
            let w: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nw = prox_affine(&w, &e, &f, &vec![0.0; 3]).unwrap();
            let moved: Vec<f64> = z.iter().zip(&out).map(|(a, b)| a - b).collect();
            assert!(crate::numerics::dot(&moved, &nw).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn moreau_identity_exact(v in proptest::collection::vec(-10.0f64..10.0, 1..12)) {
            let p = project_l1_ball(&v, 1.0).unwrap();
            let q = prox_linf(&v, 1.0).unwrap();
            for i in 0..v.len() {
                prop_assert!((p.projected[i] + q[i] - v[i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn projection_stays_in_ball(
            v in proptest::collection::vec(-10.0f64..10.0, 1..12),
            radius in 0.05f64..5.0,
        ) {
            let p = project_l1_ball(&v, radius).unwrap();
            prop_assert!(norm1(&p.projected) <= radius + 1e-9);
            if norm1(&v) > radius {
                prop_assert!((norm1(&p.projected) - radius).abs() <= 1e-9);
            } else {
                prop_assert!(p.lambda_star == 0.0);
            }
        }

        #[test]
        fn phi_nonincreasing(
            v in proptest::collection::vec(-5.0f64..5.0, 1..10),
        ) {
            let mut prev = f64::INFINITY;
            for step in 0..50 {
                let lambda = step as f64 * 0.1;
                let mass: f64 = v.iter().map(|&x| soft_threshold_scalar(x, lambda).abs()).sum();
                prop_assert!(mass <= prev + 1e-12);
                prev = mass;
            }
        }

        #[test]
        fn proxes_nonexpansive(
            pair in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..10),
            t in 0.05f64..4.0,
        ) {
            let x: Vec<f64> = pair.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pair.iter().map(|p| p.1).collect();
            let gap: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let d = norm2(&gap);

            let (sx, sy) = (soft_threshold(&x, t).unwrap(), soft_threshold(&y, t).unwrap());
            let ds: Vec<f64> = sx.iter().zip(&sy).map(|(a, b)| a - b).collect();
            prop_assert!(norm2(&ds) <= d + 1e-12);

            let (px, py) = (prox_linf(&x, t).unwrap(), prox_linf(&y, t).unwrap());
            let dp: Vec<f64> = px.iter().zip(&py).map(|(a, b)| a - b).collect();
            prop_assert!(norm2(&dp) <= d + 1e-12);

            let (bx, by) = (
                project_l1_ball(&x, t).unwrap().projected,
                project_l1_ball(&y, t).unwrap().projected,
            );
            let db: Vec<f64> = bx.iter().zip(&by).map(|(a, b)| a - b).collect();
            prop_assert!(norm2(&db) <= d + 1e-12);
        }
    }
}
