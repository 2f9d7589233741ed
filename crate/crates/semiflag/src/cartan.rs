//! Root data for the supported simply-laced finite types.

use std::collections::BTreeSet;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One as _, Zero as _};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The supported Cartan types. All are symmetric and of finite type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CartanType {
    A1,
    #[serde(rename = "A1xA1")]
    A1xA1,
    A2,
    A3,
}

impl CartanType {
    pub const ALL: [CartanType; 4] = [
        CartanType::A1,
        CartanType::A1xA1,
        CartanType::A2,
        CartanType::A3,
    ];

    /// Size of the index set I.
    pub fn rank(self) -> usize {
        match self {
            CartanType::A1 => 1,
            CartanType::A1xA1 | CartanType::A2 => 2,
            CartanType::A3 => 3,
        }
    }

    /// Cartan matrix entry a_ij (0-based indices).
    pub fn a(self, i: usize, j: usize) -> i64 {
        if i == j {
            return 2;
        }
        match self {
            CartanType::A1 => unreachable!("rank 1 has a single index"),
            CartanType::A1xA1 => 0,
            CartanType::A2 => -1,
            CartanType::A3 => {
                if i.abs_diff(j) == 1 {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CartanType::A1 => "A1",
            CartanType::A1xA1 => "A1xA1",
            CartanType::A2 => "A2",
            CartanType::A3 => "A3",
        }
    }

    pub fn parse_name(s: &str) -> Result<Self> {
        match s {
            "A1" => Ok(CartanType::A1),
            "A1xA1" | "A1XA1" | "a1xa1" => Ok(CartanType::A1xA1),
            "A2" => Ok(CartanType::A2),
            "A3" => Ok(CartanType::A3),
            other => Err(Error::Parse(format!("unknown Cartan type {other:?}"))),
        }
    }

    /// Positive roots in simple-root coordinates.
    pub fn positive_roots(self) -> Vec<Vec<u32>> {
        match self {
            CartanType::A1 => vec![vec![1]],
            CartanType::A1xA1 => vec![vec![1, 0], vec![0, 1]],
            CartanType::A2 => vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            CartanType::A3 => vec![
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 0, 1],
                vec![1, 1, 0],
                vec![0, 1, 1],
                vec![1, 1, 1],
            ],
        }
    }

    /// Dimension of the irreducible module with the given highest weight,
    /// from the product formula over positive roots.
    pub fn weyl_dim(self, lambda: &Weight) -> u64 {
        let mut num = 1u64;
        let mut den = 1u64;
        for root in self.positive_roots() {
            let lam_rho: u64 = root
                .iter()
                .enumerate()
                .map(|(j, &c)| c as u64 * (lambda.0[j] as u64 + 1))
                .sum();
            let rho: u64 = root.iter().map(|&c| c as u64).sum();
            num *= lam_rho;
            den *= rho;
        }
        num / den
    }

    /// Expresses a weight drop (given in fundamental-weight coordinates) as a
    /// nonnegative integer combination of simple roots, or errors if it is not
    /// one. Used to read off how many lowering steps separate a basis vector
    /// from the highest weight.
    pub fn root_coordinates(self, drop: &[i64]) -> Result<Vec<u32>> {
        let rank = self.rank();
        // Solve A c = drop exactly over the rationals (A is symmetric).
        let mut m: Vec<Vec<BigRational>> = (0..rank)
            .map(|i| {
                (0..=rank)
                    .map(|j| {
                        if j < rank {
                            BigRational::from_integer(BigInt::from(self.a(i, j)))
                        } else {
                            BigRational::from_integer(BigInt::from(drop[i]))
                        }
                    })
                    .collect()
            })
            .collect();
        for col in 0..rank {
            let pivot = (col..rank)
                .find(|&r| !m[r][col].is_zero())
                .ok_or_else(|| Error::Internal("singular Cartan matrix".into()))?;
            m.swap(col, pivot);
            let p = m[col][col].clone();
            for j in col..=rank {
                m[col][j] = &m[col][j] / &p;
            }
            for r in 0..rank {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for j in col..=rank {
                        m[r][j] = &m[r][j] - &f * &m[col][j];
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(rank);
        for (i, row) in m.iter().enumerate() {
            let c = &row[rank];
            if !c.denom().is_one() || c.numer() < &BigInt::zero() {
                return Err(Error::Internal(format!(
                    "weight drop {drop:?} is not a nonnegative root combination (coordinate {i})"
                )));
            }
            out.push(u32::try_from(c.numer()).map_err(|_| {
                Error::Internal("root coordinate does not fit in u32".into())
            })?);
        }
        Ok(out)
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A dominant weight, stored as its fundamental-weight coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Weight(pub Vec<u32>);

impl Weight {
    pub fn zero(rank: usize) -> Weight {
        Weight(vec![0; rank])
    }

    /// The single fundamental weight at 0-based index `i`.
    pub fn fundamental(rank: usize, i: usize) -> Weight {
        let mut v = vec![0; rank];
        v[i] = 1;
        Weight(v)
    }

    pub fn height(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&n| n == 0)
    }

    /// Indices with nonzero coefficient (0-based).
    pub fn support(&self) -> BTreeSet<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n != 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// supp(λ) ⊆ I−J, the condition for λ to index a component of a point.
    pub fn supported_outside(&self, j: &BTreeSet<usize>) -> bool {
        self.support().is_disjoint(j)
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn checked_sub(&self, other: &Weight) -> Option<Weight> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Weight(out))
    }

    /// The text key used in file names and JSON maps, e.g. `1,1`.
    pub fn key(&self) -> String {
        self.0
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse(rank: usize, s: &str) -> Result<Weight> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != rank {
            return Err(Error::Parse(format!(
                "weight {s:?} has {} coordinates, expected {rank}",
                parts.len()
            )));
        }
        let mut v = Vec::with_capacity(rank);
        for p in parts {
            v.push(
                p.parse()
                    .map_err(|_| Error::Parse(format!("bad weight coordinate {p:?}")))?,
            );
        }
        Ok(Weight(v))
    }

    /// All weights of the given rank with height in `1..=max_height` and
    /// support inside I−J, in a fixed deterministic order.
    pub fn enumerate(rank: usize, j: &BTreeSet<usize>, max_height: u32) -> Vec<Weight> {
        let mut out = Vec::new();
        // Count in mixed radix with per-digit cap max_height, then filter.
        let mut current = vec![0u32; rank];
        loop {
            let w = Weight(current.clone());
            if w.height() >= 1 && w.height() <= max_height && w.supported_outside(j) {
                out.push(w);
            }
            let mut idx = 0;
            loop {
                if idx == rank {
                    out.sort_by_key(|w| (w.height(), w.0.clone()));
                    return out;
                }
                if current[idx] < max_height {
                    current[idx] += 1;
                    break;
                }
                current[idx] = 0;
                idx += 1;
            }
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Parses a CLI `--J` value such as `""`, `2` or `1,3` into 0-based indices.
pub fn parse_j_subset(c: CartanType, s: &str) -> Result<BTreeSet<usize>> {
    let mut j = BTreeSet::new();
    let s = s.trim();
    if s.is_empty() {
        return Ok(j);
    }
    for part in s.split(',') {
        let one_based: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad index {part:?} in J")))?;
        if one_based == 0 || one_based > c.rank() {
            return Err(Error::Parse(format!(
                "index {one_based} out of range for {c}"
            )));
        }
        j.insert(one_based - 1);
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartan_matrices_are_symmetric_simply_laced() {
        for c in CartanType::ALL {
            for i in 0..c.rank() {
                assert_eq!(c.a(i, i), 2);
                for j in 0..c.rank() {
                    if i != j {
                        assert_eq!(c.a(i, j), c.a(j, i));
                        assert!(c.a(i, j) == 0 || c.a(i, j) == -1);
                    }
                }
            }
        }
    }

    #[test]
    fn weyl_dimensions() {
        assert_eq!(CartanType::A1.weyl_dim(&Weight(vec![4])), 5);
        assert_eq!(CartanType::A1xA1.weyl_dim(&Weight(vec![2, 2])), 9);
        assert_eq!(CartanType::A2.weyl_dim(&Weight(vec![1, 1])), 8);
        assert_eq!(CartanType::A2.weyl_dim(&Weight(vec![2, 2])), 27);
        assert_eq!(CartanType::A3.weyl_dim(&Weight(vec![0, 1, 0])), 6);
        assert_eq!(CartanType::A3.weyl_dim(&Weight(vec![1, 0, 1])), 15);
    }

    #[test]
    fn root_coordinates_invert_the_cartan_matrix() {
        // In A2, α1 = 2ω1 − ω2.
        let c = CartanType::A2;
        assert_eq!(c.root_coordinates(&[2, -1]).unwrap(), vec![1, 0]);
        assert_eq!(c.root_coordinates(&[1, 1]).unwrap(), vec![1, 1]);
        assert!(c.root_coordinates(&[1, 0]).is_err());
    }

    #[test]
    fn weight_support_and_membership() {
        let w = Weight(vec![1, 0]);
        let j: BTreeSet<usize> = [1].into_iter().collect();
        assert!(w.supported_outside(&j));
        assert_eq!(w.support(), [0].into_iter().collect());
        let v = Weight(vec![1, 1]);
        assert!(!v.supported_outside(&j));
    }

    #[test]
    fn weight_enumeration_is_sorted_and_filtered() {
        let j: BTreeSet<usize> = BTreeSet::new();
        let ws = Weight::enumerate(2, &j, 2);
        assert_eq!(
            ws,
            vec![
                Weight(vec![0, 1]),
                Weight(vec![1, 0]),
                Weight(vec![0, 2]),
                Weight(vec![1, 1]),
                Weight(vec![2, 0]),
            ]
        );
        let j: BTreeSet<usize> = [1].into_iter().collect();
        let ws = Weight::enumerate(2, &j, 3);
        assert_eq!(
            ws,
            vec![Weight(vec![1, 0]), Weight(vec![2, 0]), Weight(vec![3, 0])]
        );
    }
}
