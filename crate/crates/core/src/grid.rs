//! Lexicographic indexing of `F^d` and the size caps every enumeration honours.

use crate::error::{Error, Result};

/// Size caps. Exceeding one yields [`Error::InstanceTooLarge`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Max entries of a dense function on `F^d` (also caps surface enumeration).
    pub max_grid: u128,
    /// Max `p^d` for the affine-subspace witness search.
    pub max_subspace_grid: u128,
    /// Max ordered pairs `|E|^2` for sumset accumulation.
    pub max_pairs: u128,
    /// Max triples `|E|^3` for the M1/M2 decomposition.
    pub max_triples: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_grid: 10_000_000,
            max_subspace_grid: 1_000_000,
            max_pairs: 50_000_000,
            max_triples: 2_000_000_000,
        }
    }
}

impl Limits {
    pub fn check(&self, what: &'static str, size: u128, cap: u128) -> Result<()> {
        if size > cap {
            Err(Error::InstanceTooLarge { what, size, cap })
        } else {
            Ok(())
        }
    }
}

/// `p^d` as `u128`, saturating.
pub fn pow_size(p: u32, d: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..d {
        acc = acc.saturating_mul(p as u128);
    }
    acc
}

/// The coordinate grid `F^d`, first coordinate most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub p: u32,
    pub d: usize,
}

impl Grid {
    pub fn new(p: u32, d: usize, limits: &Limits) -> Result<Self> {
        limits.check("dense grid", pow_size(p, d), limits.max_grid)?;
        Ok(Grid { p, d })
    }

    pub fn len(&self) -> usize {
        pow_size(self.p, self.d) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, coords: &[u32]) -> usize {
        debug_assert_eq!(coords.len(), self.d);
        coords.iter().fold(0usize, |acc, &c| acc * self.p as usize + c as usize)
    }

    pub fn coords_into(&self, mut idx: usize, out: &mut [u32]) {
        let p = self.p as usize;
        for slot in out.iter_mut().rev() {
            *slot = (idx % p) as u32;
            idx /= p;
        }
    }

    pub fn coords(&self, idx: usize) -> Vec<u32> {
        let mut out = vec![0; self.d];
        self.coords_into(idx, &mut out);
        out
    }

    /// Index of `a - b` (coordinatewise mod p) given the two indices.
    pub fn sub_index(&self, a: usize, b: usize) -> usize {
        let p = self.p as usize;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.d {
            let (x, y) = (a % p, b % p);
            out += ((x + p - y) % p) * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }

    /// Index of `a + b` (coordinatewise mod p).
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        let p = self.p as usize;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.d {
            out += ((a % p + b % p) % p) * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }

    /// Visits every point in lexicographic order.
    pub fn for_each(&self, mut f: impl FnMut(usize, &[u32])) {
        let mut coords = vec![0u32; self.d];
        for idx in 0..self.len() {
            f(idx, &coords);
            for c in coords.iter_mut().rev() {
                *c += 1;
                if *c < self.p {
                    break;
                }
                *c = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_and_order() {
        let g = Grid { p: 5, d: 3 };
        let mut seen = 0;
        g.for_each(|idx, c| {
            assert_eq!(idx, seen);
            assert_eq!(g.index(c), idx);
            assert_eq!(g.coords(idx), c);
            seen += 1;
        });
        assert_eq!(seen, 125);
        assert_eq!(g.index(&[0, 0, 1]), 1);
        assert_eq!(g.index(&[1, 0, 0]), 25);
    }

    #[test]
    fn add_sub_indices() {
        let g = Grid { p: 7, d: 2 };
        let a = g.index(&[3, 6]);
        let b = g.index(&[5, 2]);
        assert_eq!(g.coords(g.sub_index(a, b)), vec![5, 4]);
        assert_eq!(g.coords(g.add_index(a, b)), vec![1, 1]);
    }

    #[test]
    fn cap_enforced() {
        let limits = Limits { max_grid: 100, ..Limits::default() };
        assert!(Grid::new(3, 4, &limits).is_ok());
        assert!(matches!(Grid::new(3, 5, &limits), Err(Error::InstanceTooLarge { .. })));
    }
}
