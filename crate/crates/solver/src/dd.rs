//! Double-description conversion from a vertex list to the facet list of its convex hull.
//!
//! Facets are the extreme rays of the cone `{(h₀, h) : h₀ + h·v ≥ 0 for every vertex v}`,
//! built by inserting one vertex constraint at a time with a combinatorial adjacency test.

use crate::scalar::Scalar;
use crate::SolverError;

/// Facet `offset + normal·v ≥ 0`, tight on the vertices listed in `support`.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet<T> {
    pub offset: T,
    pub normal: Vec<T>,
    pub support: Vec<usize>,
}

impl<T: Scalar> Facet<T> {
    pub fn eval(&self, v: &[T]) -> T {
        self.normal.iter().zip(v).fold(self.offset.clone(), |acc, (h, x)| acc + h.clone() * x.clone())
    }
}

/// Affine hull description reported for lower-dimensional input.
#[derive(Clone, Debug)]
pub struct AffineHull<T> {
    pub dimension: usize,
    /// Equations `e₀ + e·v = 0` satisfied by every vertex.
    pub equations: Vec<Vec<T>>,
}

#[derive(Clone, Debug)]
pub enum HullOutcome<T> {
    Facets(Vec<Facet<T>>),
    Degenerate(AffineHull<T>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn and(&self, o: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_superset(&self, o: &BitSet) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray<T> {
    y: Vec<T>,
    zeros: BitSet,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Row-echelon elimination; returns indices of a maximal independent subset of `rows`.
fn independent_rows<T: Scalar>(rows: &[Vec<T>]) -> Vec<usize> {
    let mut basis: Vec<(Vec<T>, usize)> = Vec::new();
    let mut chosen = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        for (b, p) in &basis {
            if !v[*p].is_zero() {
                let f = v[*p].clone() / b[*p].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= f.clone() * y.clone();
                }
            }
        }
        let pivot = (0..v.len())
            .filter(|&k| !v[k].near_zero())
            .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap_or(std::cmp::Ordering::Equal));
        if let Some(p) = pivot {
            basis.push((v, p));
            chosen.push(i);
        }
    }
    chosen
}

/// Null space basis of the matrix with the given rows.
fn null_space<T: Scalar>(rows: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).filter(|&i| !m[i][c].near_zero()).max_by(|&a, &b| {
            m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap_or(std::cmp::Ordering::Equal)
        }) else {
            continue;
        };
        m.swap(r, p);
        let piv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= f.clone() * y.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); ncols];
            v[f] = T::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -m[i][f].clone();
            }
            T::normalize_direction(&mut v);
            v
        })
        .collect()
}

/// Inverse of a square matrix by Gauss-Jordan elimination.
fn invert<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .filter(|&i| !m[i][c].near_zero())
            .max_by(|&x, &y| m[x][c].abs().partial_cmp(&m[y][c].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        m.swap(c, p);
        let piv = m[c][c].clone();
        for x in m[c].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        let prow = m[c].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != c && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= f.clone() * y.clone();
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Computes the facets of the convex hull of `vertices` (all of equal dimension).
///
/// Lower-dimensional input is reported as [`HullOutcome::Degenerate`] with its affine hull.
pub fn double_description<T: Scalar>(vertices: &[Vec<T>]) -> Result<HullOutcome<T>, SolverError> {
    let Some(first) = vertices.first() else {
        return Err(SolverError::Dimension("no vertices".into()));
    };
    let d = first.len();
    if vertices.iter().any(|v| v.len() != d) {
        return Err(SolverError::Dimension("vertices have different dimensions".into()));
    }
    let n = vertices.len();
    let rows: Vec<Vec<T>> = vertices
        .iter()
        .map(|v| std::iter::once(T::one()).chain(v.iter().cloned()).collect())
        .collect();

    let basis = independent_rows(&rows);
    if basis.len() < d + 1 {
        return Ok(HullOutcome::Degenerate(AffineHull {
            dimension: basis.len().saturating_sub(1),
            equations: null_space(&rows, d + 1),
        }));
    }

    let a0: Vec<Vec<T>> = basis.iter().map(|&i| rows[i].clone()).collect();
    let inv = invert(&a0).ok_or_else(|| SolverError::Numerical("singular initial basis".into()))?;
    let mut processed = BitSet::new(n);
    for &i in &basis {
        processed.set(i);
    }
    let mut rays: Vec<Ray<T>> = (0..=d)
        .map(|k| {
            let mut y: Vec<T> = inv.iter().map(|row| row[k].clone()).collect();
            T::normalize_direction(&mut y);
            let mut zeros = BitSet::new(n);
            for &i in &basis {
                if dot(&rows[i], &y).near_zero() {
                    zeros.set(i);
                }
            }
            Ray { y, zeros }
        })
        .collect();

    for i in 0..n {
        if processed.get(i) {
            continue;
        }
        let vals: Vec<T> = rays.iter().map(|r| dot(&rows[i], &r.y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_pos()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_neg()).collect();
        for (k, r) in rays.iter_mut().enumerate() {
            if vals[k].near_zero() {
                r.zeros.set(i);
            }
        }
        if neg.is_empty() {
            processed.set(i);
            continue;
        }

        let mut fresh = Vec::new();
        // Rays adjacent in the current cone span a 2-face: ≥ d−1 common tight constraints and
        // no third ray tight on all of them.
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].zeros.and(&rays[q].zeros);
                if common.count() + 1 < d {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != q && r.zeros.is_superset(&common));
                if blocked {
                    continue;
                }
                let vp = vals[p].clone();
                let vq = vals[q].clone();
                let mut y: Vec<T> = rays[q]
                    .y
                    .iter()
                    .zip(&rays[p].y)
                    .map(|(yq, yp)| vp.clone() * yq.clone() - vq.clone() * yp.clone())
                    .collect();
                T::normalize_direction(&mut y);
                let mut zeros = common;
                zeros.set(i);
                fresh.push(Ray { y, zeros });
            }
        }
        let mut next: Vec<Ray<T>> = Vec::with_capacity(rays.len() + fresh.len());
        for (k, r) in rays.into_iter().enumerate() {
            if !vals[k].is_neg() {
                next.push(r);
            }
        }
        next.extend(fresh);
        rays = next;
        processed.set(i);
    }

    let facets = rays
        .into_iter()
        .map(|r| {
            let support: Vec<usize> = (0..n).filter(|&i| dot(&rows[i], &r.y).near_zero()).collect();
            let mut y = r.y;
            let offset = y.remove(0);
            Facet { offset, normal: y, support }
        })
        .collect();
    Ok(HullOutcome::Facets(facets))
}

/// Rank of the affine hull of the listed points (number of affinely independent points − 1).
pub fn affine_rank<T: Scalar>(points: &[Vec<T>]) -> usize {
    let rows: Vec<Vec<T>> = points
        .iter()
        .map(|v| std::iter::once(T::one()).chain(v.iter().cloned()).collect())
        .collect();
    independent_rows(&rows).len().saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn facets(v: Vec<Vec<BigRational>>) -> Vec<Facet<BigRational>> {
        match double_description(&v).unwrap() {
            HullOutcome::Facets(f) => f,
            HullOutcome::Degenerate(h) => panic!("unexpected degenerate input: {h:?}"),
        }
    }

    #[test]
    fn unit_square() {
        let f = facets(vec![vec![q(0), q(0)], vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(1)]]);
        assert_eq!(f.len(), 4);
        for facet in &f {
            assert_eq!(facet.support.len(), 2);
        }
    }

    #[test]
    fn three_simplex() {
        let f = facets(vec![
            vec![q(0), q(0), q(0)],
            vec![q(1), q(0), q(0)],
            vec![q(0), q(1), q(0)],
            vec![q(0), q(0), q(1)],
        ]);
        assert_eq!(f.len(), 4);
    }

    #[test]
    fn cube_with_interior_points() {
        let mut v = Vec::new();
        for i in 0..8i64 {
            v.push(vec![q(i & 1), q((i >> 1) & 1), q((i >> 2) & 1)]);
        }
        v.push(vec![BigRational::new(1.into(), 2.into()); 3]);
        let f = facets(v);
        assert_eq!(f.len(), 6);
        assert!(f.iter().all(|x| x.support.len() == 4 && !x.support.contains(&8)));
    }

    #[test]
    fn float_path_matches() {
        let v = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0], vec![2.0, 2.0], vec![1.0, 3.0]];
        match double_description(&v).unwrap() {
            HullOutcome::Facets(f) => assert_eq!(f.len(), 5),
            _ => panic!(),
        }
    }

    #[test]
    fn degenerate_input_reports_affine_hull() {
        let v = vec![vec![q(0), q(0), q(1)], vec![q(1), q(0), q(1)], vec![q(0), q(1), q(1)]];
        match double_description(&v).unwrap() {
            HullOutcome::Degenerate(h) => {
                assert_eq!(h.dimension, 2);
                assert_eq!(h.equations.len(), 1);
                for p in &v {
                    let e = &h.equations[0];
                    let val = e[0].clone() + dot(&e[1..], p);
                    assert_eq!(val, q(0));
                }
            }
            _ => panic!("expected degenerate"),
        }
    }
}
