//! The one-parameter family of regular spherical 3-simplices.
//!
//! A member is determined by any one of: edge length `x`, face plane angle
//! `alpha`, or dihedral angle `phi`. The three are coupled by
//!
//! ```text
//! cos(x/2)     * 2 sin(alpha/2) = 1
//! cos(alpha/2) * 2 sin(phi/2)   = 1
//! ```
//!
//! with `x` in (0, arccos(-1/3)), `alpha` in (pi/3, 2pi/3) and `phi` in
//! (arctan 2*sqrt(2), pi). At the upper endpoint the simplex degenerates to
//! a hemisphere (Gram rank 3). Vertices are realized in 4-space with a fixed
//! lower-triangular orientation so outputs are reproducible bit for bit at
//! a given precision.

use crate::error::{Error, Result};
use crate::hiprec::{arccos_hp, arcsin_hp, HiReal};

/// A point of the unit 3-sphere in 4-space.
pub type Vertex = [HiReal; 4];

/// Edge length of the degenerate (hemisphere) member: arccos(-1/3).
pub fn x_star(digits: usize) -> HiReal {
    let third = HiReal::from_i64(1, digits).divi(3);
    arccos_hp(&third.neg_r()).expect("1/3 is inside [-1,1]")
}

/// Lower endpoint of the dihedral domain: arctan(2*sqrt(2)), the dihedral
/// angle of the flat regular tetrahedron.
pub fn phi_min(digits: usize) -> HiReal {
    HiReal::from_i64(8, digits).sqrt().atan()
}

/// Face plane angle from the edge length (open domain 0 < x < x_star).
pub fn edge_to_face_angle(x: &HiReal) -> Result<HiReal> {
    let digits = x.digits();
    if !x.is_positive() || x >= &x_star(digits) {
        return Err(Error::Domain(format!(
            "edge length {} outside (0, arccos(-1/3))",
            x.to_decimal_sig(12)
        )));
    }
    // alpha = 2 arcsin(1 / (2 cos(x/2)))
    let arg = x.divi(2).cos().muli(2).recip();
    Ok(arcsin_hp(&arg)?.muli(2))
}

/// Dihedral angle from the face plane angle (open domain pi/3 < alpha < 2pi/3).
pub fn face_angle_to_dihedral(alpha: &HiReal) -> Result<HiReal> {
    let digits = alpha.digits();
    let pi = HiReal::pi(digits);
    if alpha <= &pi.divi(3) || alpha >= &pi.muli(2).divi(3) {
        return Err(Error::Domain(format!(
            "face angle {} outside (pi/3, 2pi/3)",
            alpha.to_decimal_sig(12)
        )));
    }
    // phi = 2 arcsin(1 / (2 cos(alpha/2)))
    let arg = alpha.divi(2).cos().muli(2).recip();
    Ok(arcsin_hp(&arg)?.muli(2))
}

/// Edge length from the dihedral angle (open domain arctan(2 sqrt 2) < phi < pi).
pub fn dihedral_to_edge(phi: &HiReal) -> Result<HiReal> {
    let digits = phi.digits();
    if phi <= &phi_min(digits) || phi >= &HiReal::pi(digits) {
        return Err(Error::Domain(format!(
            "dihedral {} outside (arctan 2*sqrt(2), pi)",
            phi.to_decimal_sig(12)
        )));
    }
    // x = 2 arccos( sin(phi/2) / sqrt(4 sin^2(phi/2) - 1) )
    let s = phi.divi(2).sin();
    let radicand = s.square().muli(4).subi(1);
    if !radicand.is_positive() {
        return Err(Error::Domain(
            "dihedral indistinguishable from the lower endpoint at this precision".into(),
        ));
    }
    let ratio = &s / &radicand.sqrt();
    Ok(arccos_hp(&ratio)?.muli(2))
}

/// The coupled (edge, face angle, dihedral) triple of one family member.
#[derive(Clone, Debug)]
pub struct SimplexParams {
    pub x: HiReal,
    pub alpha: HiReal,
    pub phi: HiReal,
}

impl SimplexParams {
    pub fn from_edge(x: &HiReal) -> Result<Self> {
        let alpha = edge_to_face_angle(x)?;
        let phi = face_angle_to_dihedral(&alpha)?;
        Ok(SimplexParams {
            x: x.clone(),
            alpha,
            phi,
        })
    }

    pub fn from_dihedral(phi: &HiReal) -> Result<Self> {
        let x = dihedral_to_edge(phi)?;
        let alpha = edge_to_face_angle(&x)?;
        Ok(SimplexParams {
            x,
            alpha,
            phi: phi.clone(),
        })
    }
}

/// Four unit vectors in 4-space together with their Gram matrix.
#[derive(Clone, Debug)]
pub struct SphericalSimplex {
    vertices: [Vertex; 4],
    gram: [[HiReal; 4]; 4],
    digits: usize,
}

pub fn dot4(a: &Vertex, b: &Vertex) -> HiReal {
    let mut acc = &a[0] * &b[0];
    for k in 1..4 {
        acc = &acc + &(&a[k] * &b[k]);
    }
    acc
}

impl SphericalSimplex {
    /// Builds a simplex from explicit vertices, recomputing the Gram matrix.
    pub fn from_vertices(vertices: [Vertex; 4], digits: usize) -> Self {
        let gram = std::array::from_fn(|i| std::array::from_fn(|j| dot4(&vertices[i], &vertices[j])));
        SphericalSimplex {
            vertices,
            gram,
            digits,
        }
    }

    pub fn vertices(&self) -> &[Vertex; 4] {
        &self.vertices
    }

    pub fn gram(&self) -> &[[HiReal; 4]; 4] {
        &self.gram
    }

    pub fn digits(&self) -> usize {
        self.digits
    }

    /// Normalized vertex sum; only defined for nondegenerate simplices.
    pub fn centroid(&self) -> Vertex {
        let mut sum: Vertex = std::array::from_fn(|k| {
            let mut acc = self.vertices[0][k].clone();
            for v in &self.vertices[1..] {
                acc = &acc + &v[k];
            }
            acc
        });
        let norm = dot4(&sum, &sum).sqrt();
        for c in sum.iter_mut() {
            *c = &*c / &norm;
        }
        sum
    }

    /// Vertex coordinates as columns of an f64 matrix (row r, column = vertex).
    pub fn vertex_matrix_f64(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.vertices[c][r].to_f64()))
    }

    /// Cone coefficients of `p` in the vertex basis: solves V c = p.
    /// Fails with `SingularSimplex` when the Gram rank is below 4.
    pub fn barycentric(&self, p: &Vertex) -> Result<[HiReal; 4]> {
        let digits = self.digits;
        let m: [[HiReal; 4]; 4] =
            std::array::from_fn(|r| std::array::from_fn(|c| self.vertices[c][r].clone()));
        solve4(&m, p, digits).ok_or_else(|| {
            Error::SingularSimplex("vertex matrix has rank < 4 (hemisphere endpoint?)".into())
        })
    }

    /// Membership oracle: `p` lies in the simplex iff all cone coefficients
    /// are >= -eps with eps = 10^(-digits/2).
    pub fn contains(&self, p: &Vertex) -> Result<bool> {
        let eps = HiReal::pow10(-(self.digits as i64) / 2, self.digits);
        let coeffs = self.barycentric(p)?;
        Ok(coeffs.iter().all(|c| c >= &eps.neg_r()))
    }
}

/// Gaussian elimination with partial pivoting; `None` when a pivot falls
/// below 10^(-digits/2).
#[allow(clippy::needless_range_loop)]
fn solve4(m: &[[HiReal; 4]; 4], rhs: &[HiReal; 4], digits: usize) -> Option<[HiReal; 4]> {
    let mut a: Vec<Vec<HiReal>> = (0..4)
        .map(|r| {
            let mut row: Vec<HiReal> = m[r].to_vec();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    let pivot_floor = HiReal::pow10(-(digits as i64) / 2, digits);
    for col in 0..4 {
        let (best, best_abs) = (col..4)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if best_abs < pivot_floor {
            return None;
        }
        a.swap(col, best);
        for r in col + 1..4 {
            let factor = &a[r][col] / &a[col][col];
            for k in col..5 {
                a[r][k] = &a[r][k] - &(&factor * &a[col][k]);
            }
        }
    }
    let mut out: [HiReal; 4] = std::array::from_fn(|_| HiReal::zero(digits));
    for col in (0..4).rev() {
        let mut acc = a[col][4].clone();
        for k in col + 1..4 {
            acc = &acc - &(&a[col][k] * &out[k]);
        }
        out[col] = &acc / &a[col][col];
    }
    Some(out)
}

/// Inverts a 4x4 f64 matrix; `None` when a pivot is below `pivot_floor`.
/// Used by the sampling-grade membership paths.
pub fn invert4_f64(m: &[[f64; 4]; 4], pivot_floor: f64) -> Option<[[f64; 4]; 4]> {
    let mut a = *m;
    let mut inv = [[0.0f64; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let best = (col..4)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
            .unwrap();
        if a[best][col].abs() < pivot_floor {
            return None;
        }
        a.swap(col, best);
        inv.swap(col, best);
        let d = a[col][col];
        for k in 0..4 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                for k in 0..4 {
                    a[r][k] -= f * a[col][k];
                    inv[r][k] -= f * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

/// Realizes sigma(x) with the canonical lower-triangular orientation: first
/// vertex at e1, second in the span of e1,e2 with positive second
/// coordinate, and so on. The degenerate endpoint x = x_star is allowed and
/// produces a rank-3 Gram matrix (fourth coordinate exactly zero).
#[allow(clippy::needless_range_loop)]
pub fn make_vertices(x: &HiReal) -> Result<SphericalSimplex> {
    let digits = x.digits();
    if !x.is_positive() {
        return Err(Error::Domain("edge length must be positive".into()));
    }
    let c = x.cos();
    let third = HiReal::from_i64(1, digits).divi(3);
    let band = HiReal::pow10(-(digits as i64) + 8, digits);
    if (&third.neg_r() - &c) > band {
        return Err(Error::Domain(format!(
            "cos x = {} < -1/3: Gram matrix not positive semidefinite",
            c.to_decimal_sig(12)
        )));
    }
    let one = HiReal::from_i64(1, digits);
    let gram: [[HiReal; 4]; 4] =
        std::array::from_fn(|i| std::array::from_fn(|j| if i == j { one.clone() } else { c.clone() }));

    // lower-triangular factorization with a clamp for the rank-3 endpoint
    let zero = HiReal::zero(digits);
    let mut l: [[HiReal; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    for i in 0..4 {
        for j in 0..=i {
            let mut acc = gram[i][j].clone();
            for k in 0..j {
                acc = &acc - &(&l[i][k] * &l[j][k]);
            }
            if i == j {
                // the rank-3 endpoint leaves a residual of either sign
                if acc.abs() <= band {
                    acc = zero.clone();
                } else if acc.is_negative() {
                    return Err(Error::Domain(
                        "Gram matrix not positive semidefinite".into(),
                    ));
                }
                l[i][j] = acc.sqrt();
            } else if l[j][j].is_zero() {
                l[i][j] = zero.clone();
            } else {
                l[i][j] = &acc / &l[j][j];
            }
        }
    }
    Ok(SphericalSimplex {
        vertices: l,
        gram,
        digits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hr(v: f64, digits: usize) -> HiReal {
        HiReal::from_f64(v, digits)
    }

    #[test]
    fn landmark_x_star_is_about_1_5_percent_above_three_fifths_pi() {
        let d = 60;
        let ratio = &x_star(d) / &HiReal::pi(d).muli(3).divi(5);
        assert!(ratio > hr(1.010, d) && ratio < hr(1.020, d));
    }

    #[test]
    fn landmark_29pi_74_near_phi_min() {
        // the gap is 2.0527e-4
        let d = 60;
        let diff = (&HiReal::pi(d).muli(29).divi(74) - &phi_min(d)).abs();
        assert!(diff > hr(2.0e-4, d) && diff < hr(2.1e-4, d));
    }

    #[test]
    fn self_dual_right_angle_case() {
        let d = 60;
        let pi = HiReal::pi(d);
        let half_pi = pi.divi(2);
        let tol = HiReal::pow10(-(d as i64) + 6, d);
        let alpha = edge_to_face_angle(&half_pi).unwrap();
        assert!((&alpha - &half_pi).abs() <= tol);
        let phi = face_angle_to_dihedral(&half_pi).unwrap();
        assert!((&phi - &half_pi).abs() <= tol);
        let x = dihedral_to_edge(&half_pi).unwrap();
        assert!((&x - &half_pi).abs() <= tol);
    }

    #[test]
    fn conversion_domain_errors() {
        let d = 40;
        assert!(edge_to_face_angle(&HiReal::zero(d)).is_err());
        assert!(edge_to_face_angle(&x_star(d)).is_err());
        assert!(face_angle_to_dihedral(&HiReal::pi(d).divi(3)).is_err());
        assert!(face_angle_to_dihedral(&HiReal::pi(d)).is_err());
        assert!(dihedral_to_edge(&phi_min(d)).is_err());
        assert!(dihedral_to_edge(&HiReal::pi(d)).is_err());
    }

    #[test]
    fn paper_limit_endpoints() {
        let d = 60;
        let pi = HiReal::pi(d);
        // x -> 0+: alpha -> pi/3; x -> x_*-: alpha -> 2pi/3
        let a_lo = edge_to_face_angle(&HiReal::pow10(-12, d)).unwrap();
        assert!((&a_lo - &pi.divi(3)).abs() < hr(1e-10, d));
        let near_star = &x_star(d) - &HiReal::pow10(-12, d);
        let a_hi = edge_to_face_angle(&near_star).unwrap();
        assert!((&a_hi - &pi.muli(2).divi(3)).abs() < hr(1e-5, d));
        // phi -> pi-: x -> x_*
        let x_hi = dihedral_to_edge(&(&pi - &HiReal::pow10(-12, d))).unwrap();
        assert!((&x_hi - &x_star(d)).abs() < hr(1e-5, d));
        // alpha -> pi/3+: phi -> arctan 2 sqrt 2
        let p_lo = face_angle_to_dihedral(&(&pi.divi(3) + &HiReal::pow10(-12, d))).unwrap();
        assert!((&p_lo - &phi_min(d)).abs() < hr(1e-5, d));
        assert_eq!(phi_min(d).to_decimal_sig(11), "1.2309594173e0");
    }

    #[test]
    fn dihedral_two_thirds_pi_matches_direct_evaluation() {
        let d = 60;
        let x = dihedral_to_edge(&HiReal::pi(d).muli(2).divi(3)).unwrap();
        // 2 arccos(sqrt(3)/(2 sqrt(2)))
        let direct = arccos_hp(&(&HiReal::from_i64(3, d).sqrt() / &HiReal::from_i64(2, d).sqrt().muli(2)))
            .unwrap()
            .muli(2);
        assert!((&x - &direct).abs() <= HiReal::pow10(-(d as i64) + 6, d));
        assert_eq!(x.to_decimal_sig(11), "1.8234765819e0");
    }

    #[test]
    fn round_trip_200_samples() {
        let d = 60;
        let tol = HiReal::pow10(-(d as i64) + 5, d);
        let lo = hr(0.01, d);
        let span = &(&x_star(d) - &hr(0.02, d)) - &lo;
        for i in 0..200 {
            let x = &lo + &(&span * &hr((i as f64 + 0.5) / 200.0, d));
            let alpha = edge_to_face_angle(&x).unwrap();
            let phi = face_angle_to_dihedral(&alpha).unwrap();
            let back = dihedral_to_edge(&phi).unwrap();
            assert!(
                (&back - &x).abs() <= tol,
                "round trip failed at x = {}",
                x.to_decimal_sig(10)
            );
        }
    }

    #[test]
    #[allow(clippy::type_complexity)]
    fn conversions_strictly_increasing() {
        let d = 40;
        let n = 200;
        let maps: [(&dyn Fn(&HiReal) -> Result<HiReal>, HiReal, HiReal); 3] = [
            (
                &edge_to_face_angle,
                hr(1e-3, d),
                &x_star(d) - &hr(1e-3, d),
            ),
            (
                &face_angle_to_dihedral,
                &HiReal::pi(d).divi(3) + &hr(1e-3, d),
                &HiReal::pi(d).muli(2).divi(3) - &hr(1e-3, d),
            ),
            (
                &dihedral_to_edge,
                &phi_min(d) + &hr(1e-3, d),
                &HiReal::pi(d) - &hr(1e-3, d),
            ),
        ];
        for (f, lo, hi) in maps.iter() {
            let span = hi - lo;
            let mut prev: Option<HiReal> = None;
            for i in 0..=n {
                let arg = lo + &(&span * &hr(i as f64 / n as f64, d));
                let val = f(&arg).unwrap();
                if let Some(p) = prev {
                    assert!(val > p, "not increasing at sample {i}");
                }
                prev = Some(val);
            }
        }
    }

    #[test]
    fn coupling_invariants_hold() {
        let d = 60;
        let tol = HiReal::pow10(-(d as i64) + 6, d);
        let one = HiReal::from_i64(1, d);
        let p = SimplexParams::from_edge(&hr(1.2, d)).unwrap();
        let lhs2 = &p.x.divi(2).cos() * &p.alpha.divi(2).sin().muli(2);
        assert!((&lhs2 - &one).abs() <= tol);
        let lhs3 = &p.alpha.divi(2).cos() * &p.phi.divi(2).sin().muli(2);
        assert!((&lhs3 - &one).abs() <= tol);
    }

    #[test]
    fn right_angle_vertices_are_standard_basis() {
        let d = 60;
        let s = make_vertices(&HiReal::pi(d).divi(2)).unwrap();
        let tol = HiReal::pow10(-(d as i64) + 6, d);
        for (i, v) in s.vertices().iter().enumerate() {
            for (k, c) in v.iter().enumerate() {
                let want = if i == k { 1 } else { 0 };
                assert!((&(c.clone()) - &HiReal::from_i64(want, d)).abs() <= tol);
            }
        }
    }

    #[test]
    fn gram_reproduces_cos_x_and_distances() {
        let d = 50;
        let x = hr(1.3, d);
        let s = make_vertices(&x).unwrap();
        let tol = HiReal::pow10(-(d as i64) + 6, d);
        let c = x.cos();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { HiReal::from_i64(1, d) } else { c.clone() };
                assert!((&s.gram()[i][j] - &want).abs() <= tol);
                if i != j {
                    let dist = arccos_hp(&dot4(&s.vertices()[i], &s.vertices()[j])).unwrap();
                    assert!((&dist - &x).abs() <= tol);
                }
            }
        }
    }

    #[test]
    fn hemisphere_endpoint_has_rank_three() {
        let d = 60;
        let s = make_vertices(&x_star(d)).unwrap();
        // fourth coordinate collapses to exactly zero after the clamp
        assert!(s.vertices()[3][3].is_zero());
        let probe: Vertex = std::array::from_fn(|k| HiReal::from_i64(i64::from(k == 0), d));
        assert!(matches!(
            s.contains(&probe),
            Err(Error::SingularSimplex(_))
        ));
    }

    #[test]
    fn membership_oracle() {
        let d = 50;
        let s = make_vertices(&hr(1.0, d)).unwrap();
        let c = s.centroid();
        assert!(s.contains(&c).unwrap());
        let anti: Vertex = std::array::from_fn(|k| c[k].neg_r());
        assert!(!s.contains(&anti).unwrap());
        let v0: Vertex = std::array::from_fn(|k| s.vertices()[0][k].clone());
        assert!(s.contains(&v0).unwrap());
    }

    #[test]
    fn edge_too_long_is_rejected() {
        let d = 40;
        let too_long = &x_star(d) + &hr(1e-6, d);
        assert!(make_vertices(&too_long).is_err());
    }
}
