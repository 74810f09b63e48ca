//! Exact facet enumeration for tiny technologies by double description,
//! with closed-form expansion and contraction bounds read off the facets.
//! Independent of the simplex code; used to cross-check it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::technology::{Rts, Technology};

pub const MAX_DIMENSION: usize = 4;
pub const MAX_GENERATORS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance too large for enumeration: m+s = {dim} (max {MAX_DIMENSION}), columns = {gens} (max {MAX_GENERATORS})")]
    InstanceTooLarge { dim: usize, gens: usize },
    #[error("no facet bounds output {0}: every facet normal has u_{0} = 0")]
    DivisionByZeroNormal(usize),
    #[error("coordinate {0} of the point is zero")]
    ZeroCoordinate(usize),
}

/// Facet `v.x - u.y >= sigma` of the envelopment set, with `sum v + sum u = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub sigma: f64,
}

impl Facet {
    /// `v.x - u.y - sigma`; nonnegative on the set, zero on the facet.
    pub fn slack(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(&self.v, x) - dot(&self.u, y) - self.sigma
    }

    pub fn is_positive(&self) -> bool {
        self.v.iter().chain(&self.u).all(|c| *c > 0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Points and recession directions generating the envelopment set, as
/// concatenated `(x, y)` vectors.
pub fn generators(tech: &Technology) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (m, s) = (tech.m(), tech.s());
    let ds = tech.dataset();
    let joined = |x: &[f64], y: &[f64]| x.iter().chain(y).copied().collect::<Vec<f64>>();
    let mut points = Vec::new();
    let mut rays = Vec::new();
    match tech.rts() {
        Rts::VrsTo => {
            points.extend(ds.dmus().iter().map(|d| joined(&d.x, &d.y)));
            rays.extend(
                tech.tradeoffs()
                    .columns
                    .iter()
                    .map(|c| joined(&c.r_minus, &c.r_plus)),
            );
        }
        Rts::Crs => {
            points.push(vec![0.0; m + s]);
            rays.extend(ds.dmus().iter().map(|d| joined(&d.x, &d.y)));
        }
    }
    for k in 0..m + s {
        let mut e = vec![0.0; m + s];
        e[k] = if k < m { 1.0 } else { -1.0 };
        rays.push(e);
    }
    (points, rays)
}

type Vector = Vec<BigRational>;

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite data")
}

fn rdot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (p, q)| acc + p * q)
}

/// Scales to integers with unit content so equal rays compare equal.
fn primitive(v: Vector) -> Vector {
    use num_integer::Integer;
    let mut den = BigInt::from(1);
    for c in &v {
        den = den.lcm(c.denom());
    }
    let ints: Vec<BigInt> = v
        .iter()
        .map(|c| (c * BigRational::from(den.clone())).to_integer())
        .collect();
    let mut g = BigInt::zero();
    for c in &ints {
        g = g.gcd(c);
    }
    if g.is_zero() {
        return v;
    }
    ints.into_iter()
        .map(|c| BigRational::from(c / &g))
        .collect()
}

struct Ray {
    h: Vector,
    /// Indices of processed constraints tight at this ray.
    zero: Vec<usize>,
}

/// Extreme rays of the cone `{ h : h.g >= 0 for every g }` in the space
/// spanned by the constraints; the constraint rows must span the space.
fn extreme_rays(constraints: &[Vector], dim: usize) -> Vec<Vector> {
    let mut lineality: Vec<Vector> = (0..dim)
        .map(|k| {
            (0..dim)
                .map(|j| BigRational::from_integer((j == k).into()))
                .collect()
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();
    for (k, g) in constraints.iter().enumerate() {
        if let Some(pos) = lineality.iter().position(|l| !rdot(g, l).is_zero()) {
            let mut l = lineality.swap_remove(pos);
            let gl = rdot(g, &l);
            if gl.is_negative() {
                l.iter_mut().for_each(|c| *c = -c.clone());
            }
            let gl = gl.abs();
            for other in lineality.iter_mut() {
                let f = rdot(g, other) / &gl;
                for (o, lc) in other.iter_mut().zip(&l) {
                    *o -= &f * lc;
                }
            }
            for ray in rays.iter_mut() {
                let f = rdot(g, &ray.h) / &gl;
                if !f.is_zero() {
                    for (o, lc) in ray.h.iter_mut().zip(&l) {
                        *o -= &f * lc;
                    }
                }
                ray.zero.push(k);
            }
            // lineality vectors are orthogonal to every earlier constraint
            rays.push(Ray {
                h: primitive(l),
                zero: (0..k).collect(),
            });
            continue;
        }
        let values: Vec<BigRational> = rays.iter().map(|r| rdot(g, &r.h)).collect();
        let (mut pos, mut neg, mut zer) = (Vec::new(), Vec::new(), Vec::new());
        for (idx, v) in values.iter().enumerate() {
            if v.is_positive() {
                pos.push(idx);
            } else if v.is_negative() {
                neg.push(idx);
            } else {
                zer.push(idx);
            }
        }
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common: Vec<usize> = rays[p]
                    .zero
                    .iter()
                    .filter(|z| rays[q].zero.contains(z))
                    .copied()
                    .collect();
                let adjacent = !rays.iter().enumerate().any(|(idx, r)| {
                    idx != p && idx != q && common.iter().all(|z| r.zero.contains(z))
                });
                if !adjacent {
                    continue;
                }
                let (vp, vq) = (&values[p], &values[q]);
                let h: Vector = rays[q]
                    .h
                    .iter()
                    .zip(&rays[p].h)
                    .map(|(a, b)| vp * a - vq * b)
                    .collect();
                let mut zero = common;
                zero.push(k);
                fresh.push(Ray {
                    h: primitive(h),
                    zero,
                });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(pos.len() + zer.len() + fresh.len());
        for idx in pos {
            next.push(Ray {
                h: rays[idx].h.clone(),
                zero: rays[idx].zero.clone(),
            });
        }
        for idx in zer {
            let mut zero = rays[idx].zero.clone();
            zero.push(k);
            next.push(Ray {
                h: rays[idx].h.clone(),
                zero,
            });
        }
        next.extend(fresh);
        rays = next;
    }
    assert!(lineality.is_empty(), "generators must span the space");
    rays.into_iter().map(|r| r.h).collect()
}

/// Complete facet list of the envelopment set, duplicates removed.
pub fn enumerate_facets(tech: &Technology) -> Result<Vec<Facet>, OracleError> {
    let (m, s) = (tech.m(), tech.s());
    let gens = tech.columns();
    if m + s > MAX_DIMENSION || gens > MAX_GENERATORS {
        return Err(OracleError::InstanceTooLarge { dim: m + s, gens });
    }
    let (points, rays) = generators(tech);
    let homogenize = |lead: i64, v: &[f64]| -> Vector {
        std::iter::once(BigRational::from_integer(lead.into()))
            .chain(v.iter().map(|c| rat(*c)))
            .collect()
    };
    let mut constraints: Vec<Vector> = points.iter().map(|p| homogenize(1, p)).collect();
    constraints.extend(rays.iter().map(|r| homogenize(0, r)));

    let mut facets: Vec<Facet> = Vec::new();
    let mut seen: Vec<Vector> = Vec::new();
    for h in extreme_rays(&constraints, m + s + 1) {
        if h[1..].iter().all(Zero::is_zero) {
            continue;
        }
        // h0 + a.z >= 0  ->  v = a_x, u = -a_y, sigma = -h0
        let total: BigRational = h[1..=m].iter().cloned().sum::<BigRational>()
            - h[m + 1..].iter().cloned().sum::<BigRational>();
        let normalized: Vector = h.iter().map(|c| c / &total).collect();
        if seen.contains(&normalized) {
            continue;
        }
        let f = |c: &BigRational| c.to_f64().expect("finite rational");
        facets.push(Facet {
            v: normalized[1..=m].iter().map(f).collect(),
            u: normalized[m + 1..].iter().map(|c| f(&-c)).collect(),
            sigma: f(&-normalized[0].clone()),
        });
        seen.push(normalized);
    }
    Ok(facets)
}

/// Largest factor on output `r` from the facets that bound it.
pub fn phi_natural(facets: &[Facet], x: &[f64], y: &[f64], r: usize) -> Result<f64, OracleError> {
    if y[r] <= 0.0 {
        return Err(OracleError::ZeroCoordinate(r));
    }
    let bound = facets
        .iter()
        .filter(|f| f.u[r] > 0.0)
        .map(|f| {
            let rest = dot(&f.u, y) - f.u[r] * y[r];
            (dot(&f.v, x) - rest - f.sigma) / (f.u[r] * y[r])
        })
        .fold(f64::INFINITY, f64::min);
    if bound.is_finite() {
        Ok(bound)
    } else {
        Err(OracleError::DivisionByZeroNormal(r))
    }
}

/// Smallest factor on input `i` from the facets that bound it, clamped at 0.
pub fn theta_natural(facets: &[Facet], x: &[f64], y: &[f64], i: usize) -> Result<f64, OracleError> {
    if x[i] <= 0.0 {
        return Err(OracleError::ZeroCoordinate(i));
    }
    let bound = facets
        .iter()
        .filter(|f| f.v[i] > 0.0)
        .map(|f| {
            let rest = dot(&f.v, x) - f.v[i] * x[i];
            (f.sigma + dot(&f.u, y) - rest) / (f.v[i] * x[i])
        })
        .fold(0.0f64, f64::max);
    Ok(bound)
}
