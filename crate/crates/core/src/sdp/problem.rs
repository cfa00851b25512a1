use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SdpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    pub(crate) fn sign(self) -> f64 {
        match self {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        }
    }
}

/// Variable block of a standard-form problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    /// Symmetric positive semidefinite matrix of the given side.
    Psd(usize),
    /// Nonnegative vector.
    Nonneg(usize),
    /// Unrestricted vector.
    Free(usize),
}

impl BlockKind {
    pub fn size(self) -> usize {
        match self {
            BlockKind::Psd(n) | BlockKind::Nonneg(n) | BlockKind::Free(n) => n,
        }
    }

    pub fn is_matrix(self) -> bool {
        matches!(self, BlockKind::Psd(_))
    }
}

/// Coefficient of one block in a constraint or in the objective.
///
/// For vector blocks only diagonal entries `(i, i, v)` are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub enum Coef {
    /// Upper-triangle entries `(i, j, v)`, `i <= j`, of a symmetric matrix.
    Entries(Vec<(usize, usize, f64)>),
    /// Full symmetric matrix.
    Dense(DMatrix<f64>),
    /// `scale * v v^T`.
    Rank1 { scale: f64, v: DVector<f64> },
}

impl Coef {
    /// Coefficient vector for a vector block.
    pub fn vector(values: &[f64]) -> Self {
        Coef::Entries(
            values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, i, *v))
                .collect(),
        )
    }

    /// A single diagonal entry.
    pub fn unit(i: usize, v: f64) -> Self {
        Coef::Entries(vec![(i, i, v)])
    }

    pub fn rank1(scale: f64, v: &[f64]) -> Self {
        Coef::Rank1 {
            scale,
            v: DVector::from_column_slice(v),
        }
    }

    /// Dense symmetric matrix of side `n`.
    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        match self {
            Coef::Entries(es) => {
                let mut m = DMatrix::zeros(n, n);
                for &(i, j, v) in es {
                    let (i, j) = if i <= j { (i, j) } else { (j, i) };
                    m[(i, j)] += v;
                    if i != j {
                        m[(j, i)] += v;
                    }
                }
                m
            }
            Coef::Dense(m) => m.clone(),
            Coef::Rank1 { scale, v } => v * v.transpose() * *scale,
        }
    }

    /// Diagonal of the coefficient, which is all a vector block sees.
    pub fn to_diag(&self, n: usize) -> DVector<f64> {
        match self {
            Coef::Entries(es) => {
                let mut d = DVector::zeros(n);
                for &(i, j, v) in es {
                    if i == j {
                        d[i] += v;
                    }
                }
                d
            }
            Coef::Dense(m) => m.diagonal(),
            Coef::Rank1 { scale, v } => v.map(|x| x * x * scale),
        }
    }

    fn check(&self, kind: BlockKind) -> Result<(), SdpError> {
        let n = kind.size();
        match self {
            Coef::Entries(es) => {
                for &(i, j, v) in es {
                    if i >= n || j >= n {
                        return Err(SdpError::Invalid(format!("entry ({i}, {j}) outside block of size {n}")));
                    }
                    if !kind.is_matrix() && i != j && v != 0.0 {
                        return Err(SdpError::Invalid("off-diagonal entry in a vector block".into()));
                    }
                    if !v.is_finite() {
                        return Err(SdpError::Invalid("non-finite coefficient".into()));
                    }
                }
            }
            Coef::Dense(m) => {
                if m.nrows() != n || m.ncols() != n {
                    return Err(SdpError::Invalid(format!(
                        "dense coefficient {}x{} in block of size {n}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                if (m - m.transpose()).abs().max() > 1e-12 * (1.0 + m.abs().max()) {
                    return Err(SdpError::Invalid("dense coefficient is not symmetric".into()));
                }
            }
            Coef::Rank1 { v, .. } => {
                if v.len() != n {
                    return Err(SdpError::Invalid(format!("rank-one vector of length {} in block of size {n}", v.len())));
                }
                if !kind.is_matrix() {
                    return Err(SdpError::Invalid("rank-one coefficient in a vector block".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub rhs: f64,
    pub terms: Vec<(usize, Coef)>,
}

/// `min/max sum_b <C_b, X_b>` subject to `sum_b <A_kb, X_b> = b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSdpProblem {
    sense: Sense,
    blocks: Vec<BlockKind>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, Coef)>,
}

impl BlockSdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            blocks: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn blocks(&self) -> &[BlockKind] {
        &self.blocks
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, Coef)] {
        &self.objective
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.rhs).collect()
    }

    pub fn add_block(&mut self, kind: BlockKind) -> usize {
        self.blocks.push(kind);
        self.blocks.len() - 1
    }

    pub fn add_constraint(&mut self, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            rhs,
            terms: Vec::new(),
        });
        self.constraints.len() - 1
    }

    /// Adds `coef` to constraint `k`'s coefficient on `block`.
    pub fn set_coef(&mut self, k: usize, block: usize, coef: Coef) -> Result<(), SdpError> {
        let kind = *self
            .blocks
            .get(block)
            .ok_or_else(|| SdpError::Invalid(format!("no block {block}")))?;
        coef.check(kind)?;
        let c = self
            .constraints
            .get_mut(k)
            .ok_or_else(|| SdpError::Invalid(format!("no constraint {k}")))?;
        c.terms.push((block, coef));
        Ok(())
    }

    pub fn set_rhs(&mut self, k: usize, rhs: f64) {
        self.constraints[k].rhs = rhs;
    }

    /// Adds `coef` to the objective coefficient on `block`.
    pub fn set_objective(&mut self, block: usize, coef: Coef) -> Result<(), SdpError> {
        let kind = *self
            .blocks
            .get(block)
            .ok_or_else(|| SdpError::Invalid(format!("no block {block}")))?;
        coef.check(kind)?;
        self.objective.push((block, coef));
        Ok(())
    }

    /// Dense objective coefficient of a matrix block.
    pub fn objective_dense(&self, block: usize) -> DMatrix<f64> {
        let n = self.blocks[block].size();
        let mut m = DMatrix::zeros(n, n);
        for (b, c) in &self.objective {
            if *b == block {
                m += c.to_dense(n);
            }
        }
        m
    }

    /// Objective coefficient of a vector block.
    pub fn objective_diag(&self, block: usize) -> DVector<f64> {
        let n = self.blocks[block].size();
        let mut d = DVector::zeros(n);
        for (b, c) in &self.objective {
            if *b == block {
                d += c.to_diag(n);
            }
        }
        d
    }

    /// Sorted, merged upper-triangle nonzeros of constraint `k` on `block`
    /// (`k = None` for the objective).
    pub fn entries(&self, k: Option<usize>, block: usize) -> Vec<(usize, usize, f64)> {
        let kind = self.blocks[block];
        let n = kind.size();
        let terms: Box<dyn Iterator<Item = &(usize, Coef)>> = match k {
            Some(k) => Box::new(self.constraints[k].terms.iter()),
            None => Box::new(self.objective.iter()),
        };
        let mut out = Vec::new();
        if kind.is_matrix() {
            let mut m = DMatrix::zeros(n, n);
            let mut any = false;
            for (b, c) in terms {
                if *b == block {
                    m += c.to_dense(n);
                    any = true;
                }
            }
            if any {
                for j in 0..n {
                    for i in 0..=j {
                        if m[(i, j)] != 0.0 {
                            out.push((i, j, m[(i, j)]));
                        }
                    }
                }
            }
        } else {
            let mut d = DVector::zeros(n);
            for (b, c) in terms {
                if *b == block {
                    d += c.to_diag(n);
                }
            }
            for i in 0..n {
                if d[i] != 0.0 {
                    out.push((i, i, d[i]));
                }
            }
        }
        out
    }

    /// True when both problems have the same sense, blocks, right-hand
    /// sides and (merged) coefficient entries.
    pub fn same_data(&self, other: &Self) -> bool {
        if self.sense != other.sense
            || self.blocks != other.blocks
            || self.rhs() != other.rhs()
        {
            return false;
        }
        (0..self.blocks.len()).all(|b| {
            self.entries(None, b) == other.entries(None, b)
                && (0..self.num_constraints()).all(|k| self.entries(Some(k), b) == other.entries(Some(k), b))
        })
    }
}
