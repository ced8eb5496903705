//! Minimisation of a linear objective over a small bounded polytope by vertex
//! enumeration.
//!
//! The polytopes here have at most a dozen facets in two or three dimensions,
//! so trying every `N`-subset of bounding hyperplanes is cheap and exact up to
//! rounding.

/// Halfspace `normal . x <= offset`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Halfspace<const N: usize> {
    pub normal: [f64; N],
    pub offset: f64,
}

impl<const N: usize> Halfspace<N> {
    pub const fn new(normal: [f64; N], offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    #[inline]
    fn slack(&self, x: &[f64; N]) -> f64 {
        self.offset - dot(&self.normal, x)
    }
}

/// Feasibility slack allowed when filtering candidate vertices.
const FEAS_TOL: f64 = 1e-9;
/// Objective values closer than this are treated as ties.
const TIE_TOL: f64 = 1e-12;
/// Pivot magnitude below which a hyperplane subset is considered singular.
const PIVOT_TOL: f64 = 1e-12;

/// Minimises `objective . x` over the intersection of `halfspaces`.
///
/// Returns `None` when no vertex is feasible, which for a bounded set means
/// the set is empty. Among minimisers the lexicographically smallest vertex
/// is returned.
pub(crate) fn minimize_linear<const N: usize>(
    objective: &[f64; N],
    halfspaces: &[Halfspace<N>],
) -> Option<(f64, [f64; N])> {
    let m = halfspaces.len();
    if m < N {
        return None;
    }
    let mut best: Option<(f64, [f64; N])> = None;
    let mut idx = [0usize; N];
    for (k, slot) in idx.iter_mut().enumerate() {
        *slot = k;
    }
    loop {
        if let Some(x) = intersect(halfspaces, &idx) {
            if halfspaces.iter().all(|h| h.slack(&x) >= -FEAS_TOL) {
                let value = dot(objective, &x);
                best = match best {
                    None => Some((value, x)),
                    Some((bv, bx)) => {
                        if value < bv - TIE_TOL || (value <= bv + TIE_TOL && lex_less(&x, &bx)) {
                            Some((value.min(bv), x))
                        } else {
                            Some((bv, bx))
                        }
                    }
                };
            }
        }
        if !next_combination(&mut idx, m) {
            break;
        }
    }
    // Report the objective at the chosen vertex itself, not a tied neighbour.
    best.map(|(_, x)| (dot(objective, &x), x))
}

fn lex_less<const N: usize>(a: &[f64; N], b: &[f64; N]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

#[inline]
fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Advances `idx` to the next increasing `N`-subset of `0..m`.
fn next_combination<const N: usize>(idx: &mut [usize; N], m: usize) -> bool {
    let mut i = N;
    while i > 0 {
        i -= 1;
        if idx[i] < m - N + i {
            idx[i] += 1;
            for j in i + 1..N {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves the square system formed by the selected hyperplanes held at
/// equality, by Gaussian elimination with partial pivoting.
fn intersect<const N: usize>(halfspaces: &[Halfspace<N>], idx: &[usize; N]) -> Option<[f64; N]> {
    let mut a = [[0.0; N]; N];
    let mut b = [0.0; N];
    for (row, &k) in idx.iter().enumerate() {
        a[row] = halfspaces[k].normal;
        b[row] = halfspaces[k].offset;
    }
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < PIVOT_TOL {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for c in col..N {
                    a[row][c] -= factor * a[col][c];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for c in row + 1..N {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> alloc::vec::Vec<Halfspace<3>> {
        let mut hs = alloc::vec::Vec::new();
        for d in 0..3 {
            let mut n = [0.0; 3];
            n[d] = -1.0;
            hs.push(Halfspace::new(n, 0.0));
            n[d] = 1.0;
            hs.push(Halfspace::new(n, 1.0));
        }
        hs
    }

    #[test]
    fn combinations_are_enumerated_once() {
        let mut idx = [0, 1, 2];
        let mut count = 1;
        while next_combination(&mut idx, 7) {
            count += 1;
        }
        assert_eq!(count, 35);
    }

    #[test]
    fn cube_minimum_is_at_a_corner() {
        let (v, x) = minimize_linear(&[1.0, -2.0, 0.5], &unit_cube()).unwrap();
        assert_eq!(x, [0.0, 1.0, 0.0]);
        assert_eq!(v, -2.0);
    }

    #[test]
    fn ties_pick_the_lexicographically_smallest_vertex() {
        let (v, x) = minimize_linear(&[0.0, 0.0, 1.0], &unit_cube()).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(x, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn cut_plane_creates_new_vertices() {
        let mut hs = unit_cube();
        // x + y + z >= 1.5
        hs.push(Halfspace::new([-1.0, -1.0, -1.0], -1.5));
        let (v, x) = minimize_linear(&[1.0, 1.0, 1.0], &hs).unwrap();
        assert!((v - 1.5).abs() < 1e-12);
        assert!((x.iter().sum::<f64>() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn empty_polytope_reports_none() {
        let mut hs = unit_cube();
        hs.push(Halfspace::new([1.0, 1.0, 1.0], -0.5));
        assert!(minimize_linear(&[1.0, 0.0, 0.0], &hs).is_none());
    }

    #[test]
    fn square_in_two_dimensions() {
        let hs = [
            Halfspace::new([-1.0, 0.0], 0.0),
            Halfspace::new([1.0, 0.0], 2.0),
            Halfspace::new([0.0, -1.0], 0.0),
            Halfspace::new([0.0, 1.0], 1.0),
        ];
        let (v, x) = minimize_linear(&[-1.0, -1.0], &hs).unwrap();
        assert_eq!(x, [2.0, 1.0]);
        assert_eq!(v, -3.0);
    }
}
