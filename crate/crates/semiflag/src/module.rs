//! Based modules, their semifield transports, tensor objects and the
//! structure-constant tables of the equivariant splitting.
//!
//! A [`BasedModule`] is a finite basis together with natural-number matrices
//! for the divided powers of the raising and lowering operators and an
//! integer weight function per index. Transporting along a semifield K turns
//! the basis into the free K-semivector space of finitely supported formal
//! sums, modelled by [`SemiVector`]: absent coefficients are the adjoined
//! element, stored entries never are.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num::{BigUint, Zero as _};

use crate::cartan::{CartanType, Weight};
use crate::error::{Error, Result};
use crate::semifield::{ExtElem, KElem, SemifieldTag};

/// A sparse matrix with natural-number entries, stored by column:
/// `cols[b]` lists the nonzero entries of the image of basis element `b`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NatMatrix {
    pub cols: BTreeMap<usize, Vec<(usize, BigUint)>>,
}

impl NatMatrix {
    pub fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    /// Matrix product `self ∘ other` (apply `other` first), formed over ℕ.
    pub fn compose(&self, other: &NatMatrix) -> NatMatrix {
        let mut cols: BTreeMap<usize, BTreeMap<usize, BigUint>> = BTreeMap::new();
        for (&b, mid) in &other.cols {
            let acc = cols.entry(b).or_default();
            for (m, c1) in mid {
                if let Some(out) = self.cols.get(m) {
                    for (t, c2) in out {
                        let e = acc.entry(*t).or_insert_with(BigUint::zero);
                        *e += c1 * c2;
                    }
                }
            }
        }
        NatMatrix {
            cols: cols
                .into_iter()
                .map(|(b, m)| (b, m.into_iter().filter(|(_, c)| !c.is_zero()).collect()))
                .filter(|(_, v): &(usize, Vec<_>)| !v.is_empty())
                .collect(),
        }
    }

    /// Scales every entry by a natural number (dropping everything for 0).
    pub fn scaled(&self, c: &BigUint) -> NatMatrix {
        if c.is_zero() {
            return NatMatrix::default();
        }
        NatMatrix {
            cols: self
                .cols
                .iter()
                .map(|(b, v)| (*b, v.iter().map(|(t, e)| (*t, e * c)).collect()))
                .collect(),
        }
    }
}

/// A basis with natural-number operator data: the transportable description
/// of an irreducible highest-weight module in its canonical basis.
#[derive(Debug, Clone)]
pub struct BasedModule {
    pub cartan: CartanType,
    pub lambda: Weight,
    pub basis: Vec<String>,
    pub highest: usize,
    /// `e_ops[i][n-1]` is the n-th divided power of the i-th raising operator.
    pub e_ops: Vec<Vec<NatMatrix>>,
    pub f_ops: Vec<Vec<NatMatrix>>,
    /// `weights[i][b]` is the i-th weight of basis element `b`.
    pub weights: Vec<Vec<i64>>,
    /// Lowering degree of each basis element below the highest weight.
    degrees: Vec<u32>,
    label_index: HashMap<String, usize>,
}

impl PartialEq for BasedModule {
    fn eq(&self, other: &Self) -> bool {
        self.cartan == other.cartan
            && self.lambda == other.lambda
            && self.basis == other.basis
            && self.highest == other.highest
            && self.e_ops == other.e_ops
            && self.f_ops == other.f_ops
            && self.weights == other.weights
    }
}

impl BasedModule {
    /// Assembles and validates a based module. Every structural invariant is
    /// checked here so that loaded files and generated data go through the
    /// same gate.
    pub fn new(
        cartan: CartanType,
        lambda: Weight,
        basis: Vec<String>,
        highest: usize,
        e_ops: Vec<Vec<NatMatrix>>,
        f_ops: Vec<Vec<NatMatrix>>,
        weights: Vec<Vec<i64>>,
    ) -> Result<Arc<BasedModule>> {
        let key = format!("{cartan}[{lambda}]");
        let dim = basis.len();
        let rank = cartan.rank();
        if lambda.0.len() != rank {
            return Err(Error::Validation(key, "weight rank mismatch".into()));
        }
        if dim == 0 || highest >= dim {
            return Err(Error::Validation(key, "bad basis or highest index".into()));
        }
        if e_ops.len() != rank || f_ops.len() != rank || weights.len() != rank {
            return Err(Error::Validation(key, "operator family rank mismatch".into()));
        }
        let mut label_index = HashMap::with_capacity(dim);
        for (idx, label) in basis.iter().enumerate() {
            if label_index.insert(label.clone(), idx).is_some() {
                return Err(Error::Validation(key, format!("duplicate label {label}")));
            }
        }
        for i in 0..rank {
            if weights[i].len() != dim {
                return Err(Error::Validation(key, "weight table length mismatch".into()));
            }
            if weights[i][highest] != lambda.0[i] as i64 {
                return Err(Error::Validation(
                    key,
                    format!("highest vector has weight {} at {i}", weights[i][highest]),
                ));
            }
            // The raising operators annihilate the highest-weight vector.
            if let Some(first) = e_ops[i].first() {
                if first.cols.contains_key(&highest) {
                    return Err(Error::Validation(
                        key,
                        format!("raising operator {i} does not kill the highest vector"),
                    ));
                }
            }
            let spread = weights[i].iter().max().unwrap() - weights[i].iter().min().unwrap();
            let bound = (spread / 2) as usize;
            if e_ops[i].len() != bound || f_ops[i].len() != bound {
                return Err(Error::Validation(
                    key,
                    format!(
                        "operator family {i} has lengths ({}, {}), expected {bound}",
                        e_ops[i].len(),
                        f_ops[i].len()
                    ),
                ));
            }
            for (ops, sign, op_char) in [(&e_ops[i], 1i64, 'e'), (&f_ops[i], -1i64, 'f')] {
                for (n1, m) in ops.iter().enumerate() {
                    let n = n1 as i64 + 1;
                    for (&b, col) in &m.cols {
                        if b >= dim {
                            return Err(Error::Validation(key, "matrix index out of range".into()));
                        }
                        for (t, c) in col {
                            if *t >= dim {
                                return Err(Error::Validation(key, "matrix index out of range".into()));
                            }
                            if c.is_zero() {
                                return Err(Error::Positivity {
                                    module: key,
                                    op: op_char,
                                    i: i + 1,
                                    n: n as usize,
                                    from: basis[b].clone(),
                                    to: basis[*t].clone(),
                                    value: "0 (stored zero)".into(),
                                });
                            }
                            if weights[i][*t] != weights[i][b] + sign * 2 * n {
                                return Err(Error::Validation(
                                    key,
                                    format!(
                                        "{op_char}^({n})_{} moves weight {} to {}, expected shift {}",
                                        i + 1,
                                        weights[i][b],
                                        weights[i][*t],
                                        sign * 2 * n
                                    ),
                                ));
                            }
                        }
                    }
                }
            }
        }
        // Lowering degrees must exist; this also certifies that every basis
        // weight sits under the highest weight.
        let mut degrees = Vec::with_capacity(dim);
        for b in 0..dim {
            let drop: Vec<i64> = (0..rank)
                .map(|i| lambda.0[i] as i64 - weights[i][b])
                .collect();
            let coords = cartan
                .root_coordinates(&drop)
                .map_err(|e| Error::Validation(key.clone(), e.to_string()))?;
            degrees.push(coords.iter().sum());
        }
        if degrees[highest] != 0 {
            return Err(Error::Validation(key, "highest vector has nonzero degree".into()));
        }
        Ok(Arc::new(BasedModule {
            cartan,
            lambda,
            basis,
            highest,
            e_ops,
            f_ops,
            weights,
            degrees,
            label_index,
        }))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn key(&self) -> String {
        format!("{}[{}]", self.cartan, self.lambda)
    }

    pub fn same_module(&self, other: &BasedModule) -> bool {
        self.cartan == other.cartan && self.lambda == other.lambda
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    /// n-th divided power of the raising operator at index `i`; `None` past
    /// the nilpotency bound (where it is zero).
    pub fn e_op(&self, i: usize, n: usize) -> Option<&NatMatrix> {
        self.e_ops[i].get(n - 1)
    }

    pub fn f_op(&self, i: usize, n: usize) -> Option<&NatMatrix> {
        self.f_ops[i].get(n - 1)
    }

    pub fn nilpotency_bound(&self, i: usize) -> usize {
        self.e_ops[i].len()
    }

    pub fn degree(&self, b: usize) -> u32 {
        self.degrees[b]
    }

    pub fn weight_of(&self, b: usize) -> Vec<i64> {
        (0..self.cartan.rank()).map(|i| self.weights[i][b]).collect()
    }
}

/// A finitely supported formal sum over a module basis with coefficients in
/// the extended semifield; the sparse form never stores the adjoined element.
#[derive(Debug, Clone)]
pub struct SemiVector {
    pub module: Arc<BasedModule>,
    pub semifield: SemifieldTag,
    pub coeffs: BTreeMap<usize, KElem>,
}

impl PartialEq for SemiVector {
    fn eq(&self, other: &Self) -> bool {
        self.module.same_module(&other.module)
            && self.semifield == other.semifield
            && self.coeffs == other.coeffs
    }
}

impl SemiVector {
    pub fn zero(module: Arc<BasedModule>, semifield: SemifieldTag) -> SemiVector {
        SemiVector {
            module,
            semifield,
            coeffs: BTreeMap::new(),
        }
    }

    /// The basis vector at `index` with unit coefficient.
    pub fn unit(module: Arc<BasedModule>, semifield: SemifieldTag, index: usize) -> SemiVector {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(index, KElem::one(semifield));
        SemiVector {
            module,
            semifield,
            coeffs,
        }
    }

    pub fn from_entries<I>(
        module: Arc<BasedModule>,
        semifield: SemifieldTag,
        entries: I,
    ) -> Result<SemiVector>
    where
        I: IntoIterator<Item = (usize, ExtElem)>,
    {
        let mut coeffs = BTreeMap::new();
        for (b, v) in entries {
            if b >= module.dim() {
                return Err(Error::Internal(format!(
                    "index {b} out of range for {}",
                    module.key()
                )));
            }
            match v {
                ExtElem::Bottom => {}
                ExtElem::Val(k) => {
                    if k.tag() != semifield {
                        return Err(Error::SemifieldMismatch(
                            semifield.name().into(),
                            k.tag().name().into(),
                        ));
                    }
                    coeffs.insert(b, k);
                }
            }
        }
        Ok(SemiVector {
            module,
            semifield,
            coeffs,
        })
    }

    pub fn get(&self, b: usize) -> ExtElem {
        match self.coeffs.get(&b) {
            Some(k) => ExtElem::Val(k.clone()),
            None => ExtElem::Bottom,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    fn check_compatible(&self, other: &SemiVector) -> Result<()> {
        if !self.module.same_module(&other.module) {
            return Err(Error::BasisMismatch(self.module.key(), other.module.key()));
        }
        if self.semifield != other.semifield {
            return Err(Error::SemifieldMismatch(
                self.semifield.name().into(),
                other.semifield.name().into(),
            ));
        }
        Ok(())
    }

    /// Coefficient-wise addition.
    pub fn add(&self, other: &SemiVector) -> Result<SemiVector> {
        self.check_compatible(other)?;
        let mut coeffs = self.coeffs.clone();
        for (b, k) in &other.coeffs {
            match coeffs.get_mut(b) {
                Some(existing) => *existing = existing.add(k)?,
                None => {
                    coeffs.insert(*b, k.clone());
                }
            }
        }
        Ok(SemiVector {
            module: self.module.clone(),
            semifield: self.semifield,
            coeffs,
        })
    }

    /// Coefficient-wise scalar multiplication; scaling by the adjoined
    /// element gives the zero vector.
    pub fn scale(&self, k: &ExtElem) -> Result<SemiVector> {
        match k {
            ExtElem::Bottom => Ok(SemiVector::zero(self.module.clone(), self.semifield)),
            ExtElem::Val(v) => {
                if v.tag() != self.semifield {
                    return Err(Error::SemifieldMismatch(
                        self.semifield.name().into(),
                        v.tag().name().into(),
                    ));
                }
                let mut coeffs = BTreeMap::new();
                for (b, c) in &self.coeffs {
                    coeffs.insert(*b, v.mul(c)?);
                }
                Ok(SemiVector {
                    module: self.module.clone(),
                    semifield: self.semifield,
                    coeffs,
                })
            }
        }
    }

    /// Transport of a natural-number matrix: output coefficients are the
    /// extended-semifield sums of `c`-fold repetitions of the inputs.
    pub fn apply_matrix(&self, m: &NatMatrix) -> Result<SemiVector> {
        let dim = self.module.dim();
        let mut out: BTreeMap<usize, KElem> = BTreeMap::new();
        for (b, coeff) in &self.coeffs {
            let Some(col) = m.cols.get(b) else { continue };
            for (t, c) in col {
                if *t >= dim {
                    return Err(Error::Internal(format!(
                        "matrix target {t} out of range for {}",
                        self.module.key()
                    )));
                }
                let term = ExtElem::nat_scale(c, &ExtElem::Val(coeff.clone()));
                if let ExtElem::Val(v) = term {
                    match out.get_mut(t) {
                        Some(existing) => *existing = existing.add(&v)?,
                        None => {
                            out.insert(*t, v);
                        }
                    }
                }
            }
        }
        Ok(SemiVector {
            module: self.module.clone(),
            semifield: self.semifield,
            coeffs: out,
        })
    }

    /// Renders the vector using basis labels, e.g. `{b0: 1, b1: 2/3}`.
    pub fn display(&self) -> String {
        if self.is_zero() {
            return "{}".into();
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(b, k)| format!("{}: {}", self.module.basis[*b], k))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for SemiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

/// The basis of a tensor object: ordered pairs from two module bases.
#[derive(Debug, Clone)]
pub struct TensorBasis {
    pub left: Arc<BasedModule>,
    pub right: Arc<BasedModule>,
}

impl TensorBasis {
    pub fn new(left: Arc<BasedModule>, right: Arc<BasedModule>) -> TensorBasis {
        TensorBasis { left, right }
    }

    pub fn size(&self) -> usize {
        self.left.dim() * self.right.dim()
    }

    pub fn same_basis(&self, other: &TensorBasis) -> bool {
        self.left.same_module(&other.left) && self.right.same_module(&other.right)
    }

    pub fn key(&self) -> String {
        format!("{} (x) {}", self.left.key(), self.right.key())
    }
}

/// A finitely supported formal sum over a tensor basis.
#[derive(Debug, Clone)]
pub struct TensorVector {
    pub basis: TensorBasis,
    pub semifield: SemifieldTag,
    pub coeffs: BTreeMap<(usize, usize), KElem>,
}

impl PartialEq for TensorVector {
    fn eq(&self, other: &Self) -> bool {
        self.basis.same_basis(&other.basis)
            && self.semifield == other.semifield
            && self.coeffs == other.coeffs
    }
}

impl TensorVector {
    pub fn zero(basis: TensorBasis, semifield: SemifieldTag) -> TensorVector {
        TensorVector {
            basis,
            semifield,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn get(&self, p: (usize, usize)) -> ExtElem {
        match self.coeffs.get(&p) {
            Some(k) => ExtElem::Val(k.clone()),
            None => ExtElem::Bottom,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &TensorVector) -> Result<TensorVector> {
        if !self.basis.same_basis(&other.basis) {
            return Err(Error::BasisMismatch(self.basis.key(), other.basis.key()));
        }
        if self.semifield != other.semifield {
            return Err(Error::SemifieldMismatch(
                self.semifield.name().into(),
                other.semifield.name().into(),
            ));
        }
        let mut coeffs = self.coeffs.clone();
        for (p, k) in &other.coeffs {
            match coeffs.get_mut(p) {
                Some(existing) => *existing = existing.add(k)?,
                None => {
                    coeffs.insert(*p, k.clone());
                }
            }
        }
        Ok(TensorVector {
            basis: self.basis.clone(),
            semifield: self.semifield,
            coeffs,
        })
    }

    pub fn scale(&self, k: &ExtElem) -> Result<TensorVector> {
        match k {
            ExtElem::Bottom => Ok(TensorVector::zero(self.basis.clone(), self.semifield)),
            ExtElem::Val(v) => {
                let mut coeffs = BTreeMap::new();
                for (p, c) in &self.coeffs {
                    coeffs.insert(*p, v.mul(c)?);
                }
                Ok(TensorVector {
                    basis: self.basis.clone(),
                    semifield: self.semifield,
                    coeffs,
                })
            }
        }
    }

    pub fn display(&self) -> String {
        if self.is_zero() {
            return "{}".into();
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|((b, b2), k)| {
                format!(
                    "({},{}): {}",
                    self.basis.left.basis[*b], self.basis.right.basis[*b2], k
                )
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// The coefficient-wise product map from a pair of semivectors into the
/// tensor object. It is homogeneous in each slot but not jointly additive,
/// so it is not a morphism of semivector spaces.
pub fn tensor_product(v: &SemiVector, w: &SemiVector) -> Result<TensorVector> {
    if v.semifield != w.semifield {
        return Err(Error::SemifieldMismatch(
            v.semifield.name().into(),
            w.semifield.name().into(),
        ));
    }
    let basis = TensorBasis::new(v.module.clone(), w.module.clone());
    let mut coeffs = BTreeMap::new();
    for (b, x) in &v.coeffs {
        for (b2, y) in &w.coeffs {
            coeffs.insert((*b, *b2), x.mul(y)?);
        }
    }
    Ok(TensorVector {
        basis,
        semifield: v.semifield,
        coeffs,
    })
}

/// Structure constants of the equivariant splitting of a sum of two highest
/// weights: row `b` of the table lists the coefficients of the image of `b`
/// in the tensor basis. All constants are strictly positive naturals.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    pub cartan: CartanType,
    pub lambda: Weight,
    pub lambda2: Weight,
    pub rows: Vec<Vec<(usize, usize, BigUint)>>,
}

impl GammaTable {
    pub fn total_weight(&self) -> Weight {
        self.lambda.add(&self.lambda2)
    }

    pub fn key(&self) -> String {
        format!("{}({} | {})", self.cartan, self.lambda, self.lambda2)
    }

    /// Transport along K: apply the table as a natural-number matrix from the
    /// total-weight module into the tensor object.
    pub fn apply(&self, x: &SemiVector, tb: &TensorBasis) -> Result<TensorVector> {
        if x.module.cartan != self.cartan || x.module.lambda != self.total_weight() {
            return Err(Error::BasisMismatch(
                x.module.key(),
                format!("{}[{}]", self.cartan, self.total_weight()),
            ));
        }
        if tb.left.lambda != self.lambda || tb.right.lambda != self.lambda2 {
            return Err(Error::BasisMismatch(tb.key(), self.key()));
        }
        let mut out = TensorVector::zero(tb.clone(), x.semifield);
        for (b, coeff) in &x.coeffs {
            for (b1, b1p, e) in &self.rows[*b] {
                let term = ExtElem::nat_scale(e, &ExtElem::Val(coeff.clone()));
                if let ExtElem::Val(v) = term {
                    match out.coeffs.get_mut(&(*b1, *b1p)) {
                        Some(existing) => *existing = existing.add(&v)?,
                        None => {
                            out.coeffs.insert((*b1, *b1p), v);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// The table for the swapped pair of weights.
    pub fn swapped(&self) -> GammaTable {
        GammaTable {
            cartan: self.cartan,
            lambda: self.lambda2.clone(),
            lambda2: self.lambda.clone(),
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(b1, b2, e)| (*b2, *b1, e.clone())).collect())
                .collect(),
        }
    }

    /// Transposed view: tensor pair -> contributions from total-weight basis
    /// elements. This is the multiplication rule of the semiring.
    pub fn pair_contributions(&self) -> BTreeMap<(usize, usize), Vec<(usize, BigUint)>> {
        let mut out: BTreeMap<(usize, usize), Vec<(usize, BigUint)>> = BTreeMap::new();
        for (b, row) in self.rows.iter().enumerate() {
            for (b1, b1p, e) in row {
                out.entry((*b1, *b1p)).or_default().push((b, e.clone()));
            }
        }
        out
    }

    /// Checks positivity, the unit row at the highest weight, and weight
    /// compatibility against the three modules involved.
    pub fn validate(
        &self,
        total: &BasedModule,
        left: &BasedModule,
        right: &BasedModule,
    ) -> Result<()> {
        let key = self.key();
        if self.rows.len() != total.dim() {
            return Err(Error::Validation(key, "row count mismatch".into()));
        }
        let hw_row = &self.rows[total.highest];
        if hw_row.len() != 1
            || hw_row[0].0 != left.highest
            || hw_row[0].1 != right.highest
            || hw_row[0].2 != BigUint::from(1u32)
        {
            return Err(Error::Validation(
                key,
                "highest-weight row is not the unit pair".into(),
            ));
        }
        for (b, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::Validation(key, format!("empty row at {b}")));
            }
            for (b1, b1p, e) in row {
                if e.is_zero() {
                    return Err(Error::Validation(key, "stored zero constant".into()));
                }
                if *b1 >= left.dim() || *b1p >= right.dim() {
                    return Err(Error::Validation(key, "pair index out of range".into()));
                }
                for i in 0..self.cartan.rank() {
                    if total.weights[i][b] != left.weights[i][*b1] + right.weights[i][*b1p] {
                        return Err(Error::Validation(
                            key,
                            format!("weight incompatibility at row {b}, pair ({b1},{b1p})"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    fn nat(entries: &[(usize, &[(usize, u32)])]) -> NatMatrix {
        NatMatrix {
            cols: entries
                .iter()
                .map(|(b, col)| {
                    (
                        *b,
                        col.iter().map(|(t, c)| (*t, BigUint::from(*c))).collect(),
                    )
                })
                .collect(),
        }
    }

    /// The two-dimensional module of the rank-1 type: basis (highest, lowest).
    pub fn a1_v1() -> Arc<BasedModule> {
        BasedModule::new(
            CartanType::A1,
            Weight(vec![1]),
            vec!["b0".into(), "b1".into()],
            0,
            vec![vec![nat(&[(1, &[(0, 1)])])]],
            vec![vec![nat(&[(0, &[(1, 1)])])]],
            vec![vec![1, -1]],
        )
        .unwrap()
    }

    /// The three-dimensional rank-1 module with highest weight 2.
    pub fn a1_v2() -> Arc<BasedModule> {
        BasedModule::new(
            CartanType::A1,
            Weight(vec![2]),
            vec!["b0".into(), "b1".into(), "b2".into()],
            0,
            vec![vec![
                nat(&[(1, &[(0, 2)]), (2, &[(1, 1)])]),
                nat(&[(2, &[(0, 1)])]),
            ]],
            vec![vec![
                nat(&[(0, &[(1, 1)]), (1, &[(2, 2)])]),
                nat(&[(0, &[(2, 1)])]),
            ]],
            vec![vec![2, 0, -2]],
        )
        .unwrap()
    }

    /// Splitting table for 2 = 1 + 1 in rank 1.
    pub fn a1_gamma_11() -> GammaTable {
        GammaTable {
            cartan: CartanType::A1,
            lambda: Weight(vec![1]),
            lambda2: Weight(vec![1]),
            rows: vec![
                vec![(0, 0, BigUint::from(1u32))],
                vec![(0, 1, BigUint::from(1u32)), (1, 0, BigUint::from(1u32))],
                vec![(1, 1, BigUint::from(1u32))],
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::semifield::{random_ext, SemifieldTag};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ext(tag: SemifieldTag, s: &str) -> ExtElem {
        ExtElem::parse(tag, s).unwrap()
    }

    #[test]
    fn zero_vector_is_neutral() {
        let m = a1_v2();
        let z = SemiVector::zero(m.clone(), SemifieldTag::Tropical);
        let v = SemiVector::from_entries(
            m,
            SemifieldTag::Tropical,
            [(0, ext(SemifieldTag::Tropical, "3"))],
        )
        .unwrap();
        assert_eq!(z.add(&v).unwrap(), v);
        assert_eq!(v.add(&z).unwrap(), v);
    }

    #[test]
    fn tropical_addition_takes_minimum() {
        let m = a1_v2();
        let t = SemifieldTag::Tropical;
        let u = SemiVector::from_entries(m.clone(), t, [(0, ext(t, "1"))]).unwrap();
        let v = SemiVector::from_entries(m.clone(), t, [(0, ext(t, "4"))]).unwrap();
        let expect = SemiVector::from_entries(m, t, [(0, ext(t, "1"))]).unwrap();
        assert_eq!(u.add(&v).unwrap(), expect);
    }

    #[test]
    fn disjoint_supports_merge() {
        let m = a1_v2();
        let t = SemifieldTag::Rational;
        let u = SemiVector::from_entries(m.clone(), t, [(0, ext(t, "1/2"))]).unwrap();
        let v = SemiVector::from_entries(m.clone(), t, [(1, ext(t, "1/3"))]).unwrap();
        let expect = SemiVector::from_entries(
            m,
            t,
            [(0, ext(t, "1/2")), (1, ext(t, "1/3"))],
        )
        .unwrap();
        assert_eq!(u.add(&v).unwrap(), expect);
    }

    #[test]
    fn scaling_by_bottom_gives_zero() {
        let m = a1_v2();
        let t = SemifieldTag::Rational;
        let v = SemiVector::unit(m, t, 1);
        let scaled = v.scale(&ExtElem::Bottom).unwrap();
        assert!(scaled.is_zero());
        assert_eq!(v.scale(&ExtElem::one(t)).unwrap(), v);
    }

    #[test]
    fn tropical_scaling_shifts() {
        let m = a1_v2();
        let t = SemifieldTag::Tropical;
        let v = SemiVector::from_entries(m.clone(), t, [(0, ext(t, "2"))]).unwrap();
        let expect = SemiVector::from_entries(m, t, [(0, ext(t, "5"))]).unwrap();
        assert_eq!(v.scale(&ext(t, "3")).unwrap(), expect);
    }

    #[test]
    fn matrix_transport_on_lowest_vector() {
        // Raising the lowest vector of the weight-2 module lands on the
        // middle basis vector with unit coefficient.
        let m = a1_v2();
        for tag in SemifieldTag::ALL {
            let v = SemiVector::unit(m.clone(), tag, 2);
            let out = v.apply_matrix(m.e_op(0, 1).unwrap()).unwrap();
            assert_eq!(out, SemiVector::unit(m.clone(), tag, 1));
        }
    }

    #[test]
    fn zero_matrix_gives_zero_vector() {
        let m = a1_v2();
        let v = SemiVector::unit(m.clone(), SemifieldTag::Rational, 0);
        let out = v.apply_matrix(&NatMatrix::default()).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn matrix_composition_matches_sequential_application() {
        let m = a1_v2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ops = [
            m.e_op(0, 1).unwrap(),
            m.f_op(0, 1).unwrap(),
            m.e_op(0, 2).unwrap(),
            m.f_op(0, 2).unwrap(),
        ];
        for tag in SemifieldTag::ALL {
            for _ in 0..50 {
                let a = ops[rng.gen_range(0..ops.len())];
                let b = ops[rng.gen_range(0..ops.len())];
                let v = SemiVector::from_entries(
                    m.clone(),
                    tag,
                    (0..3).map(|i| (i, random_ext(&mut rng, tag))),
                )
                .unwrap();
                let sequential = v.apply_matrix(b).unwrap().apply_matrix(a).unwrap();
                let composed = v.apply_matrix(&a.compose(b)).unwrap();
                assert_eq!(sequential, composed);
            }
        }
    }

    #[test]
    fn product_map_examples() {
        let m = a1_v1();
        let t = SemifieldTag::Tropical;
        let z = SemiVector::zero(m.clone(), t);
        let v = SemiVector::from_entries(m.clone(), t, [(0, ext(t, "0"))]).unwrap();
        assert!(tensor_product(&z, &v).unwrap().is_zero());

        let u = SemiVector::from_entries(m.clone(), t, [(0, ext(t, "1")), (1, ext(t, "2"))])
            .unwrap();
        let prod = tensor_product(&u, &v).unwrap();
        assert_eq!(prod.get((0, 0)), ext(t, "1"));
        assert_eq!(prod.get((1, 0)), ext(t, "2"));
        assert_eq!(prod.get((1, 1)), ExtElem::Bottom);
    }

    #[test]
    fn product_of_units_is_unit_pair() {
        for tag in SemifieldTag::ALL {
            let m = a1_v1();
            let u = SemiVector::unit(m.clone(), tag, 0);
            let prod = tensor_product(&u, &u).unwrap();
            assert_eq!(prod.coeffs.len(), 1);
            assert_eq!(prod.get((0, 0)), ExtElem::one(tag));
        }
    }

    #[test]
    fn product_map_is_homogeneous_but_not_jointly_additive() {
        let m = a1_v1();
        let t = SemifieldTag::Rational;
        let u = SemiVector::unit(m.clone(), t, 0);
        let w = SemiVector::unit(m.clone(), t, 1);
        let k = ext(t, "2/3");
        let lhs = tensor_product(&u.scale(&k).unwrap(), &w).unwrap();
        let rhs = tensor_product(&u, &w).unwrap().scale(&k).unwrap();
        assert_eq!(lhs, rhs);

        // Joint additivity fails: cross terms appear.
        let sum_first = tensor_product(&u.add(&w).unwrap(), &u.add(&w).unwrap()).unwrap();
        let add_after = tensor_product(&u, &u)
            .unwrap()
            .add(&tensor_product(&w, &w).unwrap())
            .unwrap();
        assert_ne!(sum_first, add_after);
    }

    #[test]
    fn gamma_unit_row_sends_highest_to_pair_of_highests() {
        let g = a1_gamma_11();
        let total = a1_v2();
        let factor = a1_v1();
        g.validate(&total, &factor, &factor).unwrap();
        let tb = TensorBasis::new(factor.clone(), factor.clone());
        for tag in SemifieldTag::ALL {
            let x = SemiVector::unit(total.clone(), tag, 0);
            let out = g.apply(&x, &tb).unwrap();
            assert_eq!(out.coeffs.len(), 1);
            assert_eq!(out.get((0, 0)), ExtElem::one(tag));

            let z = SemiVector::zero(total.clone(), tag);
            assert!(g.apply(&z, &tb).unwrap().is_zero());
        }
    }

    #[test]
    fn gamma_swapped_flips_pairs() {
        let g = a1_gamma_11();
        let s = g.swapped();
        assert_eq!(s.rows[1][0].0, 1);
        assert_eq!(s.rows[1][0].1, 0);
        assert_eq!(s.swapped(), g);
    }

    #[test]
    fn semivector_space_axioms_on_samples() {
        let m = a1_v2();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for tag in SemifieldTag::ALL {
            for _ in 0..150 {
                let k = random_ext(&mut rng, tag);
                let k2 = random_ext(&mut rng, tag);
                let mk_vec = |rng: &mut ChaCha8Rng| {
                    SemiVector::from_entries(
                        m.clone(),
                        tag,
                        (0..3).map(|i| (i, random_ext(rng, tag))),
                    )
                    .unwrap()
                };
                let v = mk_vec(&mut rng);
                let w = mk_vec(&mut rng);
                // (k k') v = k (k' v)
                assert_eq!(
                    v.scale(&k2.mul(&k).unwrap()).unwrap(),
                    v.scale(&k2).unwrap().scale(&k).unwrap()
                );
                // (k + k') v = k v + k' v
                assert_eq!(
                    v.scale(&k.add(&k2).unwrap()).unwrap(),
                    v.scale(&k).unwrap().add(&v.scale(&k2).unwrap()).unwrap()
                );
                // k (v + w) = k v + k w
                assert_eq!(
                    v.add(&w).unwrap().scale(&k).unwrap(),
                    v.scale(&k).unwrap().add(&w.scale(&k).unwrap()).unwrap()
                );
                // k 0 = 0
                assert!(SemiVector::zero(m.clone(), tag)
                    .scale(&k)
                    .unwrap()
                    .is_zero());
            }
        }
    }

    #[test]
    fn basis_mismatch_is_rejected() {
        let a = SemiVector::unit(a1_v1(), SemifieldTag::One, 0);
        let b = SemiVector::unit(a1_v2(), SemifieldTag::One, 0);
        assert!(a.add(&b).is_err());
    }
}
