//! Facet-reflection orbits of a seed simplex on the 3-sphere.
//!
//! Starting from one regular simplex, each generation consists of the
//! mirror images of known tiles across their facet hyperplanes that have
//! not been seen before. Tiles are deduplicated by a quantized canonical
//! key: coordinates are rounded to a fixed number of decimal digits, with
//! a guard band around rounding midpoints that escalates the quantum when
//! a coordinate sits too close to a rounding boundary. Whether the orbit
//! closes (and whether coverage multiplicity is constant on the free set)
//! is reported as evidence only; nothing is asserted about the open
//! hypotheses behind the construction.

use std::collections::{HashMap, HashSet};

use num_rational::BigRational;
use num_traits::Signed;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hiprec::{decimal_str_to_rational, rational_round, HiReal};
use crate::simplex::{dihedral_to_edge, dot4, invert4_f64, make_vertices, SphericalSimplex, Vertex};

/// Orthogonal transform of 4-space (here: facet reflections, det = -1).
#[derive(Clone, Debug)]
pub struct Isometry {
    pub matrix: [[HiReal; 4]; 4],
}

/// One simplex of the orbit with its generation index.
#[derive(Clone, Debug)]
pub struct Tile {
    pub simplex: SphericalSimplex,
    pub depth: usize,
    /// Facet of the parent that generated this tile; None for the seed.
    pub parent_facet: Option<usize>,
}

type KeyedTile = (Vec<u8>, SphericalSimplex);

/// Coverage count at one sampled point of the free set.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicitySample {
    pub point: [f64; 4],
    pub count: usize,
}

/// Outcome of an orbit exploration.
#[derive(Clone, Debug)]
pub struct OrbitReport {
    /// |T_n| per generation; ends with 0 exactly when the orbit closed.
    pub tiles_per_depth: Vec<usize>,
    pub distinct_tiles: usize,
    pub distinct_vertices: usize,
    pub closed: bool,
    /// True when max_tiles stopped the expansion (a normal outcome).
    pub capped: bool,
    pub multiplicity_samples: Vec<MultiplicitySample>,
}

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub max_depth: usize,
    pub max_tiles: usize,
    /// Rounding quantum (decimal digits) for canonical keys.
    pub quantum: usize,
    /// Working precision of the vertex arithmetic.
    pub digits: usize,
    pub sample_seed: u64,
    pub sample_count: usize,
    /// Barycentric distance from a tile boundary below which a sample point
    /// is rejected from the free set.
    pub w_band: f64,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            max_depth: 8,
            max_tiles: 20_000,
            quantum: 40,
            digits: 60,
            sample_seed: 1,
            sample_count: 100,
            w_band: 1e-8,
        }
    }
}

fn det3(m: &[[HiReal; 3]; 3]) -> HiReal {
    let a = &m[0][0] * &(&(&m[1][1] * &m[2][2]) - &(&m[1][2] * &m[2][1]));
    let b = &m[0][1] * &(&(&m[1][0] * &m[2][2]) - &(&m[1][2] * &m[2][0]));
    let c = &m[0][2] * &(&(&m[1][0] * &m[2][1]) - &(&m[1][1] * &m[2][0]));
    &(&a - &b) + &c
}

/// Unit normal of the central hyperplane through three vertices
/// (generalized cross product; the sign is immaterial for a reflection).
fn facet_normal(rows: [&Vertex; 3], digits: usize) -> Result<Vertex> {
    let mut n: Vertex = std::array::from_fn(|_| HiReal::zero(digits));
    for (k, nk) in n.iter_mut().enumerate() {
        let minor: [[HiReal; 3]; 3] = std::array::from_fn(|r| {
            let mut cols = (0..4).filter(|&c| c != k);
            std::array::from_fn(|_| rows[r][cols.next().unwrap()].clone())
        });
        let d = det3(&minor);
        *nk = if k % 2 == 0 { d } else { d.neg_r() };
    }
    let norm2 = dot4(&n, &n);
    if norm2.sqrt() < HiReal::pow10(-(digits as i64) / 2, digits) {
        return Err(Error::SingularSimplex(
            "facet vertices are linearly dependent".into(),
        ));
    }
    let norm = norm2.sqrt();
    for c in n.iter_mut() {
        *c = &*c / &norm;
    }
    Ok(n)
}

/// Mirror image of `s` across the hyperplane containing facet `facet`
/// (the facet opposite vertex `facet`). The shared facet vertices are kept
/// verbatim; only the opposite vertex moves.
pub fn reflect_across_facet(
    s: &SphericalSimplex,
    facet: usize,
) -> Result<(SphericalSimplex, Isometry)> {
    assert!(facet < 4, "facet index out of range");
    let digits = s.digits();
    let vs = s.vertices();
    let kept: Vec<usize> = (0..4).filter(|&j| j != facet).collect();
    let n = facet_normal([&vs[kept[0]], &vs[kept[1]], &vs[kept[2]]], digits)?;

    let two = HiReal::from_i64(2, digits);
    let proj = &two * &dot4(&n, &vs[facet]);
    let reflected: Vertex = std::array::from_fn(|k| &vs[facet][k] - &(&proj * &n[k]));
    let vertices: [Vertex; 4] = std::array::from_fn(|i| {
        if i == facet {
            reflected.clone()
        } else {
            vs[i].clone()
        }
    });
    let matrix: [[HiReal; 4]; 4] = std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let id = HiReal::from_i64(i64::from(r == c), digits);
            &id - &(&(&two * &n[r]) * &n[c])
        })
    });
    Ok((
        SphericalSimplex::from_vertices(vertices, digits),
        Isometry { matrix },
    ))
}

/// Rounds one coordinate to `quantum` decimal digits. Returns None when the
/// value sits within the guard band of a rounding midpoint (the caller must
/// escalate the quantum).
fn quantize_coord(c: &HiReal, quantum: usize, digits: usize) -> Option<num_bigint::BigInt> {
    let rc = decimal_str_to_rational(&c.to_decimal_sig(digits.saturating_sub(5)))
        .expect("own rendering parses");
    let scaled = rc * BigRational::from_integer(num_bigint::BigInt::from(10).pow(quantum as u32));
    let nearest = rational_round(&scaled);
    let frac = (&scaled - BigRational::from_integer(nearest.clone())).abs();
    // two-sided band: |frac| within 1/100 of the midpoint 1/2 is unstable
    let midpoint_band = BigRational::new(49.into(), 100.into());
    if frac > midpoint_band {
        None
    } else {
        Some(nearest)
    }
}

fn quantize_vertex(
    v: &Vertex,
    quantum: usize,
    digits: usize,
) -> Option<[num_bigint::BigInt; 4]> {
    let mut out: [num_bigint::BigInt; 4] = std::array::from_fn(|_| num_bigint::BigInt::from(0));
    for (k, c) in v.iter().enumerate() {
        out[k] = quantize_coord(c, quantum, digits)?;
    }
    Some(out)
}

/// Stable key for a single vertex, escalating the quantum past rounding
/// midpoints.
fn vertex_key(v: &Vertex, quantum: usize, digits: usize) -> Result<String> {
    let mut q = quantum;
    while q + 12 <= digits {
        if let Some(coords) = quantize_vertex(v, q, digits) {
            let parts: Vec<String> = coords.iter().map(|n| n.to_string()).collect();
            return Ok(format!("q{}:{}", q, parts.join(",")));
        }
        q += 2;
    }
    Err(Error::KeyUnstable(format!(
        "vertex coordinate stuck on a rounding boundary up to quantum {q} at {digits} digits"
    )))
}

/// Canonical byte-string key of a simplex as a point set: vertices are
/// quantized, sorted, and serialized. Equal simplices (up to working-
/// precision noise far from the quantization band) map to equal keys.
pub fn canonical_key(s: &SphericalSimplex, quantum: usize) -> Result<Vec<u8>> {
    let digits = s.digits();
    let mut q = quantum;
    while q + 12 <= digits {
        let quantized: Option<Vec<[num_bigint::BigInt; 4]>> = s
            .vertices()
            .iter()
            .map(|v| quantize_vertex(v, q, digits))
            .collect();
        if let Some(mut rows) = quantized {
            rows.sort();
            let body: Vec<String> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            return Ok(format!("q{}:{}", q, body.join(";")).into_bytes());
        }
        q += 2;
    }
    Err(Error::KeyUnstable(format!(
        "simplex coordinates stuck on rounding boundaries up to quantum {q} at {} digits",
        digits
    )))
}

/// Breadth-first reflection orbit of the regular simplex with dihedral
/// angle `seed_phi` (a rational multiple of pi: phi = pi * p / q).
///
/// Expansion stops at closure (a generation with no unseen tiles), at
/// `max_depth` generations, or at `max_tiles` (reported as capped, not an
/// error). Multiplicity is sampled at `sample_count` pseudo-random points
/// kept away from every generated tile boundary by `w_band`.
pub fn explore(seed_phi: &BigRational, opts: &ExploreOptions) -> Result<OrbitReport> {
    let digits = opts.digits;
    let phi = &HiReal::pi(digits) * &HiReal::from_rational(seed_phi, digits)?;
    let x = dihedral_to_edge(&phi)?;
    let seed = make_vertices(&x)?;

    let mut tiles: Vec<Tile> = vec![Tile {
        simplex: seed,
        depth: 0,
        parent_facet: None,
    }];
    let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
    seen.insert(canonical_key(&tiles[0].simplex, opts.quantum)?, 0);

    let mut tiles_per_depth = vec![1usize];
    let mut closed = false;
    let mut capped = false;
    let mut frontier: Vec<usize> = vec![0];

    'generations: for _depth in 0..opts.max_depth {
        // reflections of the whole frontier, in deterministic order
        let children: Vec<(usize, Result<KeyedTile>)> = frontier
            .par_iter()
            .flat_map_iter(|&idx| {
                let parent = &tiles[idx].simplex;
                (0..4).map(move |facet| {
                    let r = reflect_across_facet(parent, facet).and_then(|(img, _iso)| {
                        let key = canonical_key(&img, opts.quantum)?;
                        Ok((key, img))
                    });
                    (facet, r)
                })
            })
            .collect();

        let mut next_frontier = Vec::new();
        let depth_now = tiles_per_depth.len();
        let mut new_count = 0usize;
        for (facet, child) in children {
            let (key, simplex) = child?;
            if seen.contains_key(&key) {
                continue;
            }
            if tiles.len() >= opts.max_tiles {
                capped = true;
                tiles_per_depth.push(new_count);
                break 'generations;
            }
            seen.insert(key, tiles.len());
            tiles.push(Tile {
                simplex,
                depth: depth_now,
                parent_facet: Some(facet),
            });
            next_frontier.push(tiles.len() - 1);
            new_count += 1;
        }
        tiles_per_depth.push(new_count);
        if new_count == 0 {
            closed = true;
            break;
        }
        frontier = next_frontier;
    }

    // distinct vertices across every generation
    let mut vertex_keys: HashSet<String> = HashSet::new();
    for tile in &tiles {
        for v in tile.simplex.vertices() {
            vertex_keys.insert(vertex_key(v, opts.quantum, digits)?);
        }
    }

    let multiplicity_samples = sample_multiplicity(&tiles, opts)?;

    Ok(OrbitReport {
        distinct_tiles: tiles.len(),
        distinct_vertices: vertex_keys.len(),
        tiles_per_depth,
        closed,
        capped,
        multiplicity_samples,
    })
}

/// Coverage counts at pseudo-random points of the free set (every
/// barycentric coordinate of every tile at least `w_band` from zero).
fn sample_multiplicity(tiles: &[Tile], opts: &ExploreOptions) -> Result<Vec<MultiplicitySample>> {
    let inverses: Vec<[[f64; 4]; 4]> = tiles
        .iter()
        .map(|t| {
            invert4_f64(&t.simplex.vertex_matrix_f64(), 1e-9).ok_or_else(|| {
                Error::SingularSimplex("orbit tile is numerically rank-deficient".into())
            })
        })
        .collect::<Result<_>>()?;

    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(opts.sample_seed);
    let mut samples = Vec::with_capacity(opts.sample_count);
    let max_attempts = opts.sample_count.saturating_mul(1000).max(1000);
    let mut attempts = 0usize;
    while samples.len() < opts.sample_count && attempts < max_attempts {
        attempts += 1;
        let mut p = [0.0f64; 4];
        let mut norm2 = 0.0;
        for c in p.iter_mut() {
            *c = StandardNormal.sample(&mut rng);
            norm2 += *c * *c;
        }
        if norm2 < 1e-30 {
            continue;
        }
        let inv_norm = norm2.sqrt().recip();
        for c in p.iter_mut() {
            *c *= inv_norm;
        }
        let mut in_free_set = true;
        let mut count = 0usize;
        for inv in &inverses {
            let mut inside = true;
            for row in inv {
                let coeff: f64 = (0..4).map(|k| row[k] * p[k]).sum();
                if coeff.abs() < opts.w_band {
                    in_free_set = false;
                    break;
                }
                if coeff < 0.0 {
                    inside = false;
                }
            }
            if !in_free_set {
                break;
            }
            count += usize::from(inside);
        }
        if in_free_set {
            samples.push(MultiplicitySample { point: p, count });
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn br(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn right_angle_seed(digits: usize) -> SphericalSimplex {
        let x = dihedral_to_edge(&HiReal::pi(digits).divi(2)).unwrap();
        make_vertices(&x).unwrap()
    }

    #[test]
    fn coordinate_reflection_of_the_orthant_seed() {
        let d = 60;
        let s = right_angle_seed(d);
        let tol = HiReal::pow10(-(d as i64) + 8, d);
        // facet 0 = {v1, v2, v3} spans the coordinate hyperplane x0 = 0;
        // the image of v0 = e1 is -e1
        let (img, iso) = reflect_across_facet(&s, 0).unwrap();
        assert!((&img.vertices()[0][0] + &HiReal::from_i64(1, d)).abs() <= tol);
        for k in 1..4 {
            assert!(img.vertices()[0][k].abs() <= tol);
        }
        // the isometry matrix is diag(-1, 1, 1, 1)
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c {
                    if r == 0 {
                        -1
                    } else {
                        1
                    }
                } else {
                    0
                };
                assert!((&iso.matrix[r][c] - &HiReal::from_i64(want, d)).abs() <= tol);
            }
        }
    }

    #[test]
    fn double_reflection_is_identity() {
        let d = 50;
        let x = dihedral_to_edge(&HiReal::pi(d).muli(2).divi(3)).unwrap();
        let s = make_vertices(&x).unwrap();
        let (once, _) = reflect_across_facet(&s, 2).unwrap();
        let (twice, _) = reflect_across_facet(&once, 2).unwrap();
        let tol = HiReal::pow10(-(d as i64) + 10, d);
        for i in 0..4 {
            for k in 0..4 {
                assert!((&twice.vertices()[i][k] - &s.vertices()[i][k]).abs() <= tol);
            }
        }
    }

    #[test]
    fn reflection_preserves_the_gram_matrix() {
        let d = 50;
        let x = dihedral_to_edge(&HiReal::pi(d).muli(2).divi(3)).unwrap();
        let s = make_vertices(&x).unwrap();
        let tol = HiReal::pow10(-(d as i64) + 10, d);
        for facet in 0..4 {
            let (img, _) = reflect_across_facet(&s, facet).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert!((&img.gram()[i][j] - &s.gram()[i][j]).abs() <= tol);
                }
            }
        }
    }

    #[test]
    fn keys_ignore_vertex_order_and_separate_reflections() {
        let d = 60;
        let s = right_angle_seed(d);
        let vs = s.vertices().clone();
        let permuted = SphericalSimplex::from_vertices(
            [vs[2].clone(), vs[0].clone(), vs[3].clone(), vs[1].clone()],
            d,
        );
        assert_eq!(
            canonical_key(&s, 40).unwrap(),
            canonical_key(&permuted, 40).unwrap()
        );
        let (img, _) = reflect_across_facet(&s, 1).unwrap();
        assert_ne!(canonical_key(&s, 40).unwrap(), canonical_key(&img, 40).unwrap());
    }

    #[test]
    fn orthant_orbit_closes_at_sixteen() {
        let report = explore(&br(1, 2), &ExploreOptions::default()).unwrap();
        assert!(report.closed);
        assert!(!report.capped);
        assert_eq!(report.distinct_tiles, 16);
        assert_eq!(report.distinct_vertices, 8);
        assert_eq!(report.tiles_per_depth, vec![1, 4, 6, 4, 1, 0]);
        assert_eq!(report.multiplicity_samples.len(), 100);
        assert!(report.multiplicity_samples.iter().all(|s| s.count == 1));
    }

    #[test]
    fn depth_cap_reports_partial_orbit() {
        let opts = ExploreOptions {
            max_depth: 1,
            ..ExploreOptions::default()
        };
        let report = explore(&br(1, 2), &opts).unwrap();
        assert_eq!(report.tiles_per_depth, vec![1, 4]);
        assert!(!report.closed);
        assert!(!report.capped);
        assert_eq!(report.distinct_tiles, 5);
    }

    #[test]
    fn tile_cap_is_a_normal_outcome() {
        // 3pi/5 is not a tiling dihedral; the orbit grows until the cap
        let opts = ExploreOptions {
            max_depth: 8,
            max_tiles: 120,
            sample_count: 10,
            ..ExploreOptions::default()
        };
        let report = explore(&br(3, 5), &opts).unwrap();
        assert!(report.capped);
        assert!(!report.closed);
        assert_eq!(report.distinct_tiles, 120);
    }

    #[test]
    fn five_cell_orbit_closes_at_five() {
        // facet reflections reproduce the {3,3,3} tiling: 5 cells, 5 vertices
        let opts = ExploreOptions {
            sample_count: 50,
            ..ExploreOptions::default()
        };
        let a = explore(&br(2, 3), &opts).unwrap();
        assert!(a.closed && !a.capped);
        assert_eq!(a.distinct_tiles, 5);
        assert_eq!(a.distinct_vertices, 5);
        assert_eq!(a.tiles_per_depth, vec![1, 4, 0]);
        assert!(a.multiplicity_samples.iter().all(|s| s.count == 1));
        let b = explore(&br(2, 3), &opts).unwrap();
        assert_eq!(a.tiles_per_depth, b.tiles_per_depth);
        assert_eq!(a.multiplicity_samples, b.multiplicity_samples);
    }

    #[test]
    fn six_hundred_cell_orbit_closes_at_six_hundred() {
        // facet reflections reproduce the {3,3,5} tiling: 600 cells,
        // 120 vertices, every free-set point covered exactly once
        let opts = ExploreOptions {
            max_depth: 20,
            max_tiles: 1000,
            sample_count: 30,
            ..ExploreOptions::default()
        };
        let r = explore(&br(2, 5), &opts).unwrap();
        assert!(r.closed && !r.capped);
        assert_eq!(r.distinct_tiles, 600);
        assert_eq!(r.distinct_vertices, 120);
        assert!(r.multiplicity_samples.iter().all(|s| s.count == 1));
    }

    #[test]
    fn children_share_a_facet_with_their_parent() {
        // every reflected tile keeps exactly 3 vertex keys of its parent
        let d = 60;
        let x = dihedral_to_edge(&HiReal::pi(d).muli(2).divi(3)).unwrap();
        let s = make_vertices(&x).unwrap();
        let parent_keys: HashSet<String> = s
            .vertices()
            .iter()
            .map(|v| vertex_key(v, 40, d).unwrap())
            .collect();
        for facet in 0..4 {
            let (img, _) = reflect_across_facet(&s, facet).unwrap();
            let shared = img
                .vertices()
                .iter()
                .filter(|v| parent_keys.contains(&vertex_key(v, 40, d).unwrap()))
                .count();
            assert_eq!(shared, 3);
        }
    }

    #[test]
    fn orthant_tiles_partition_the_sphere() {
        // 1e5 random points each lie in exactly one of the 16 tiles
        let opts = ExploreOptions::default();
        let d = opts.digits;
        let x = dihedral_to_edge(&HiReal::pi(d).divi(2)).unwrap();
        let seed = make_vertices(&x).unwrap();
        let mut tiles = vec![Tile {
            simplex: seed,
            depth: 0,
            parent_facet: None,
        }];
        // expand exhaustively by hand
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        seen.insert(canonical_key(&tiles[0].simplex, opts.quantum).unwrap());
        let mut i = 0;
        while i < tiles.len() {
            for facet in 0..4 {
                let (img, _) = reflect_across_facet(&tiles[i].simplex, facet).unwrap();
                let key = canonical_key(&img, opts.quantum).unwrap();
                if seen.insert(key) {
                    tiles.push(Tile {
                        simplex: img,
                        depth: 0,
                        parent_facet: Some(facet),
                    });
                }
            }
            i += 1;
        }
        assert_eq!(tiles.len(), 16);
        let inverses: Vec<[[f64; 4]; 4]> = tiles
            .iter()
            .map(|t| invert4_f64(&t.simplex.vertex_matrix_f64(), 1e-9).unwrap())
            .collect();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        for _ in 0..100_000 {
            let mut p = [0.0f64; 4];
            let mut norm2 = 0.0;
            for c in p.iter_mut() {
                *c = StandardNormal.sample(&mut rng);
                norm2 += *c * *c;
            }
            let inv_norm = norm2.sqrt().recip();
            for c in p.iter_mut() {
                *c *= inv_norm;
            }
            let holders = inverses
                .iter()
                .filter(|inv| {
                    inv.iter()
                        .all(|row| (0..4).map(|k| row[k] * p[k]).sum::<f64>() > 0.0)
                })
                .count();
            assert_eq!(holders, 1);
        }
    }
}
