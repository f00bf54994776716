//! Linear combinations of indexed families: partition-block sums, general coefficient
//! matrices, and weighted sums of several systems over a shared label grid.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SampledFunction;
use crate::wavepacket::{Family, Label, WavePacketSystem};

/// Disjoint blocks of labels covering a label set exactly. Block labels play the role
/// of the combined index `(r, s, t)` and blocks are kept in ascending block-label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPartition {
    blocks: Vec<(Label, Vec<Label>)>,
}

impl IndexPartition {
    pub fn new(blocks: Vec<(Label, Vec<Label>)>, domain: &[Label]) -> Result<Self> {
        let domain_set: BTreeSet<Label> = domain.iter().copied().collect();
        let mut seen_blocks = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for (block, members) in &blocks {
            if !seen_blocks.insert(*block) {
                return Err(Error::Partition(format!("block label {block} appears twice")));
            }
            if members.is_empty() {
                return Err(Error::Partition(format!("block {block} is empty")));
            }
            for m in members {
                if !domain_set.contains(m) {
                    return Err(Error::Partition(format!(
                        "block {block} contains {m}, which is not a system label"
                    )));
                }
                if !seen.insert(*m) {
                    return Err(Error::Partition(format!(
                        "blocks overlap: {m} appears in more than one block"
                    )));
                }
            }
        }
        if let Some(missing) = domain_set.difference(&seen).next() {
            return Err(Error::Partition(format!("label {missing} is not covered by any block")));
        }
        let mut blocks = blocks;
        blocks.sort_by_key(|(b, _)| *b);
        Ok(Self { blocks })
    }

    /// One block per label, with the block label equal to the member label.
    pub fn singletons(domain: &[Label]) -> Result<Self> {
        Self::new(domain.iter().map(|l| (*l, vec![*l])).collect(), domain)
    }

    pub fn blocks(&self) -> &[(Label, Vec<Label>)] {
        &self.blocks
    }

    pub fn block_labels(&self) -> Vec<Label> {
        self.blocks.iter().map(|(b, _)| *b).collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(|(_, m)| m.len()).max().unwrap_or(0)
    }
}

/// Scalars `alpha_{j,k,m}` attached to labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientFamily {
    alpha: BTreeMap<Label, Complex64>,
}

impl CoefficientFamily {
    pub fn new(alpha: BTreeMap<Label, Complex64>) -> Self {
        Self { alpha }
    }

    pub fn constant(labels: &[Label], value: Complex64) -> Self {
        Self::new(labels.iter().map(|l| (*l, value)).collect())
    }

    pub fn get(&self, label: &Label) -> Option<Complex64> {
        self.alpha.get(label).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Complex64)> {
        self.alpha.iter()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::new(self.alpha.iter().map(|(l, a)| (*l, a * c)).collect())
    }

    fn require_total(&self, labels: &[Label]) -> Result<()> {
        match labels.iter().find(|l| !self.alpha.contains_key(l)) {
            Some(l) => Err(Error::LabelMismatch(format!("no coefficient for label {l}"))),
            None => Ok(()),
        }
    }
}

/// Coefficients `alpha_{s, i}` mapping a labelled family (columns) to combined vectors (rows).
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationMatrix {
    pub row_labels: Vec<Label>,
    pub column_labels: Vec<Label>,
    pub entries: DMatrix<Complex64>,
}

impl CombinationMatrix {
    pub fn new(
        row_labels: Vec<Label>,
        column_labels: Vec<Label>,
        entries: DMatrix<Complex64>,
    ) -> Result<Self> {
        if entries.shape() != (row_labels.len(), column_labels.len()) {
            return Err(Error::LabelMismatch(format!(
                "matrix is {}x{} but has {} row and {} column labels",
                entries.nrows(),
                entries.ncols(),
                row_labels.len(),
                column_labels.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("combination matrix has non-finite entries".into()));
        }
        Ok(Self { row_labels, column_labels, entries })
    }

    pub fn identity(labels: &[Label]) -> Self {
        let n = labels.len();
        Self {
            row_labels: labels.to_vec(),
            column_labels: labels.to_vec(),
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { entries: &self.entries * c, ..self.clone() }
    }

    /// Block matrix induced by a partition: row `b` carries `alpha_i` on the members of block `b`.
    pub fn from_partition(
        partition: &IndexPartition,
        coeffs: &CoefficientFamily,
        columns: &[Label],
    ) -> Result<Self> {
        coeffs.require_total(columns)?;
        let position: HashMap<Label, usize> =
            columns.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let mut entries = DMatrix::zeros(partition.len(), columns.len());
        for (row, (block, members)) in partition.blocks().iter().enumerate() {
            for m in members {
                let col = *position
                    .get(m)
                    .ok_or_else(|| Error::LabelMismatch(format!("block {block} member {m} is not a column")))?;
                entries[(row, col)] = coeffs.get(m).expect("checked total");
            }
        }
        Ok(Self {
            row_labels: partition.block_labels(),
            column_labels: columns.to_vec(),
            entries,
        })
    }
}

fn check_partition_domain(partition: &IndexPartition, labels: &[Label]) -> Result<()> {
    let covered: usize = partition.blocks().iter().map(|(_, m)| m.len()).sum();
    let domain: BTreeSet<Label> = labels.iter().copied().collect();
    let all_in = partition
        .blocks()
        .iter()
        .flat_map(|(_, m)| m.iter())
        .all(|m| domain.contains(m));
    if covered != domain.len() || !all_in || domain.len() != labels.len() {
        return Err(Error::Partition("partition does not match the family's labels".into()));
    }
    Ok(())
}

/// `psi_b = sum_{i in I_b} alpha_i g_i`, one vector per block in block-label order.
/// Members are accumulated in family order, matching [`combine_general`] term for term.
pub fn build_combined(
    family: &Family<Label>,
    partition: &IndexPartition,
    coeffs: &CoefficientFamily,
) -> Result<Family<Label>> {
    check_partition_domain(partition, &family.labels)?;
    coeffs.require_total(&family.labels)?;
    let window = family
        .window()
        .ok_or_else(|| Error::Degenerate("empty family".into()))?
        .clone();
    let position: HashMap<Label, usize> =
        family.labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut vectors = Vec::with_capacity(partition.len());
    for (_, members) in partition.blocks() {
        let mut idx: Vec<usize> = members.iter().map(|m| position[m]).collect();
        idx.sort_unstable();
        let mut acc = SampledFunction::zeros(window.clone());
        for i in idx {
            let a = coeffs.get(&family.labels[i]).expect("checked total");
            if a != Complex64::new(0.0, 0.0) {
                acc.axpy(a, &family.vectors[i])?;
            }
        }
        vectors.push(acc);
    }
    Family::new(partition.block_labels(), vectors)
}

/// `phi_s = sum_i U[s, i] g_i`. Zero entries are skipped.
pub fn combine_general(u: &CombinationMatrix, family: &Family<Label>) -> Result<Family<Label>> {
    if u.column_labels != family.labels {
        return Err(Error::LabelMismatch(
            "matrix columns do not match the family's labels".into(),
        ));
    }
    let window = family
        .window()
        .ok_or_else(|| Error::Degenerate("empty family".into()))?
        .clone();
    let mut vectors = Vec::with_capacity(u.row_labels.len());
    for s in 0..u.row_labels.len() {
        let mut acc = SampledFunction::zeros(window.clone());
        for (i, g) in family.vectors.iter().enumerate() {
            let a = u.entries[(s, i)];
            if a != Complex64::new(0.0, 0.0) {
                acc.axpy(a, g)?;
            }
        }
        vectors.push(acc);
    }
    Family::new(u.row_labels.clone(), vectors)
}

/// `(mu, nu)` from the column Gram matrix `H[i][i'] = sum_s alpha_{s,i} conj(alpha_{s,i'})`:
/// `mu = min_i (H[i][i] - sum_{i' != i} |H[i][i']|)` and `nu = max_i sum_{i'} |H[i][i']|`.
pub fn compute_mu_nu(u: &CombinationMatrix) -> (f64, f64) {
    let k = u.entries.ncols();
    if k == 0 {
        return (0.0, 0.0);
    }
    let h = u.entries.transpose() * u.entries.map(|z| z.conj());
    let mut mu = f64::INFINITY;
    let mut nu = 0.0f64;
    for i in 0..k {
        let off: f64 = (0..k).filter(|&l| l != i).map(|l| h[(i, l)].norm()).sum();
        let diag = h[(i, i)].re;
        mu = mu.min(diag - off);
        nu = nu.max(diag + off);
    }
    (mu, nu)
}

/// `sum_l alpha_l g^(l)_i` label by label, for families on one label grid.
pub fn finite_sum(families: &[&Family<Label>], alphas: &[Complex64]) -> Result<Family<Label>> {
    let first = families
        .first()
        .ok_or_else(|| Error::InvalidArgument("no systems to sum".into()))?;
    if families.len() != alphas.len() {
        return Err(Error::InvalidArgument(format!(
            "{} systems but {} coefficients",
            families.len(),
            alphas.len()
        )));
    }
    let window = first
        .window()
        .ok_or_else(|| Error::Degenerate("empty family".into()))?;
    for f in families {
        if f.labels != first.labels {
            return Err(Error::LabelMismatch("systems do not share a label grid".into()));
        }
        if f.window() != Some(window) {
            return Err(Error::WindowMismatch);
        }
    }
    let vectors = (0..first.len())
        .map(|i| {
            let mut acc = SampledFunction::zeros(window.clone());
            for (f, a) in families.iter().zip(alphas) {
                acc.axpy(*a, &f.vectors[i])?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Family::new(first.labels.clone(), vectors)
}

/// Weighted sum of wave packet systems that differ only in their generator.
pub fn finite_sum_system(systems: &[WavePacketSystem], alphas: &[Complex64]) -> Result<Family<Label>> {
    if let Some(first) = systems.first() {
        for s in systems {
            if s.params != first.params || s.ambient != first.ambient {
                return Err(Error::LabelMismatch(
                    "systems must share (a, b, jRange, kCount, mCount) and the ambient window".into(),
                ));
            }
        }
    }
    let families: Vec<&Family<Label>> = systems.iter().map(|s| &s.family).collect();
    finite_sum(&families, alphas)
}
