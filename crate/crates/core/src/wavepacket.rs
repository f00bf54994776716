//! Wave packet systems `{D_{p^j} T_{u(k) a} E_{u(m) b} psi}` on the finite model, their
//! Gram matrices and frame operators, and spectral frame bounds.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::LocalFieldElement;
use crate::model::{dilate_within, embed, inner_product, modulate, translate, ModelWindow, SampledFunction};
use crate::spectral::{
    hermitian_eigenvalues, inverse_iteration, power_iteration, range_basis, synthesis_matrix,
};

/// Default relative tolerance of the frame verdict: `A > DEFAULT_REL_TOL * B`.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Index `(j, k, m)` of a wave packet: dilation, translation and modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label {
    pub j: i32,
    pub k: u64,
    pub m: u64,
}

impl Label {
    pub fn new(j: i32, k: u64, m: u64) -> Self {
        Self { j, k, m }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.j, self.k, self.m)
    }
}

/// An ordered family of functions on one window, with a label per vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Family<L = Label> {
    pub labels: Vec<L>,
    pub vectors: Vec<SampledFunction>,
}

impl<L> Family<L> {
    pub fn new(labels: Vec<L>, vectors: Vec<SampledFunction>) -> Result<Self> {
        if labels.len() != vectors.len() {
            return Err(Error::LabelMismatch(format!(
                "{} labels for {} vectors",
                labels.len(),
                vectors.len()
            )));
        }
        if let Some(first) = vectors.first() {
            if vectors.iter().any(|v| v.window() != first.window()) {
                return Err(Error::WindowMismatch);
            }
        }
        Ok(Self { labels, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn window(&self) -> Option<&ModelWindow> {
        self.vectors.first().map(SampledFunction::window)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavePacketParams {
    /// translation scale
    pub a: LocalFieldElement,
    /// modulation scale
    pub b: LocalFieldElement,
    pub j_min: i32,
    pub j_max: i32,
    pub k_count: u64,
    pub m_count: u64,
}

impl WavePacketParams {
    pub fn labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        for j in self.j_min..=self.j_max {
            for k in 0..self.k_count {
                for m in 0..self.m_count {
                    out.push(Label::new(j, k, m));
                }
            }
        }
        out
    }

    /// Window on which `E` and `T` act before dilation: the largest `(M0, N0)` with
    /// `(M0 - j, N0 + j)` inside the ambient window for every `j` in range.
    pub fn source_window(&self, ambient: &ModelWindow) -> Result<ModelWindow> {
        if self.j_min > self.j_max {
            return Err(Error::InvalidArgument(format!(
                "empty dilation range {}..={}",
                self.j_min, self.j_max
            )));
        }
        let m0 = ambient.m() as i64 + self.j_min as i64;
        let n0 = ambient.n() as i64 - self.j_max as i64;
        if m0 < 0 || n0 < 0 || m0 - (self.j_max as i64) < 0 || n0 + (self.j_min as i64) < 0 {
            return Err(Error::InvalidWindow(format!(
                "dilations {}..={} are not admissible on ambient window (M={}, N={})",
                self.j_min,
                self.j_max,
                ambient.m(),
                ambient.n()
            )));
        }
        ModelWindow::new(ambient.field().clone(), m0 as u32, n0 as u32)
    }
}

#[derive(Debug, Clone)]
pub struct WavePacketSystem {
    pub params: WavePacketParams,
    pub ambient: ModelWindow,
    pub source: ModelWindow,
    /// the generator embedded in the source window
    pub generator: SampledFunction,
    pub family: Family<Label>,
}

impl WavePacketSystem {
    pub fn labels(&self) -> &[Label] {
        &self.family.labels
    }

    pub fn vectors(&self) -> &[SampledFunction] {
        &self.family.vectors
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    /// Rebuild one packet from its label.
    pub fn regenerate(&self, label: Label) -> Result<SampledFunction> {
        let field = self.ambient.field();
        let shift = field.u(label.k)?.mul(&self.params.a)?;
        let freq = field.u(label.m)?.mul(&self.params.b)?;
        let v = modulate(&self.generator, &freq)?;
        let v = translate(&v, &shift)?;
        let v = dilate_within(&v, label.j, &self.ambient)?;
        embed(&v, &self.ambient)
    }
}

/// Build `D_{p^j} T_{u(k) a} E_{u(m) b} psi` for every label, modulation applied first,
/// in label order `j` outer, `k` middle, `m` inner.
pub fn generate_system(
    psi: &SampledFunction,
    params: &WavePacketParams,
    ambient: &ModelWindow,
) -> Result<WavePacketSystem> {
    if psi.norm_sqr() == 0.0 {
        return Err(Error::Degenerate("generator is the zero function".into()));
    }
    if params.k_count == 0 || params.m_count == 0 {
        return Err(Error::InvalidArgument("kCount and mCount must be positive".into()));
    }
    let source = params.source_window(ambient)?;
    if !source.contains_window(psi.window()) {
        return Err(Error::InvalidWindow(format!(
            "generator window (M={}, N={}) does not fit the source window (M={}, N={})",
            psi.window().m(),
            psi.window().n(),
            source.m(),
            source.n()
        )));
    }
    let generator = embed(psi, &source)?;
    let field = ambient.field();

    let shifts = (0..params.k_count)
        .map(|k| field.u(k)?.mul(&params.a))
        .collect::<Result<Vec<_>>>()?;
    let modulated = (0..params.m_count)
        .map(|m| modulate(&generator, &field.u(m)?.mul(&params.b)?))
        .collect::<Result<Vec<_>>>()?;
    // translated[k][m] = T E psi
    let translated = shifts
        .iter()
        .map(|t| modulated.iter().map(|e| translate(e, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let mut labels = Vec::new();
    let mut vectors = Vec::new();
    for j in params.j_min..=params.j_max {
        for (k, row) in translated.iter().enumerate() {
            for (m, v) in row.iter().enumerate() {
                let d = dilate_within(v, j, ambient)?;
                vectors.push(embed(&d, ambient)?);
                labels.push(Label::new(j, k as u64, m as u64));
            }
        }
    }
    Ok(WavePacketSystem {
        params: params.clone(),
        ambient: ambient.clone(),
        source,
        generator,
        family: Family { labels, vectors },
    })
}

/// `G[i][l] = <g_l, g_i>`. Entries are computed independently, so the result does not
/// depend on how rows are scheduled across threads.
pub fn gram_matrix(vectors: &[SampledFunction]) -> Result<DMatrix<Complex64>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Degenerate("empty family".into()))?;
    if vectors.iter().any(|v| v.window() != first.window()) {
        return Err(Error::WindowMismatch);
    }
    let n = vectors.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|l| inner_product(&vectors[l], &vectors[i]).expect("shared window"))
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, l| rows[i][l]))
}

/// Matrix of `S f = sum_i <f, g_i> g_i` in grid coordinates. Since the model inner
/// product is a fixed multiple of the coordinate one, `<S f, f>` equals
/// `sum_i |<f, g_i>|^2` and the eigenvalues of this matrix are those of `S`.
pub fn frame_operator(vectors: &[SampledFunction]) -> Result<DMatrix<Complex64>> {
    let v = synthesis_matrix(vectors)?;
    Ok(&v * v.adjoint())
}

/// `sum_i |<f, g_i>|^2`
pub fn frame_sum(vectors: &[SampledFunction], f: &SampledFunction) -> Result<f64> {
    vectors
        .iter()
        .map(|g| inner_product(f, g).map(|c| c.norm_sqr()))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub is_frame: bool,
    /// absolute threshold the lower bound was compared against
    pub tol: f64,
}

impl FrameBounds {
    pub fn from_extremes(lower: f64, upper: f64, rel_tol: f64) -> Self {
        let lower = lower.max(0.0);
        let upper = upper.max(lower);
        let tol = rel_tol * upper;
        Self {
            lower,
            upper,
            is_frame: upper > 0.0 && lower > tol,
            tol,
        }
    }
}

/// Frame bounds on the whole ambient space from a dense eigensolve of `S`.
pub fn frame_bounds(vectors: &[SampledFunction], rel_tol: f64) -> Result<FrameBounds> {
    let s = frame_operator(vectors)?;
    let ev = hermitian_eigenvalues(&s);
    Ok(FrameBounds::from_extremes(ev[0], ev[ev.len() - 1], rel_tol))
}

/// Frame bounds on the span of the family: extreme nonzero eigenvalues.
pub fn span_bounds(vectors: &[SampledFunction], rel_tol: f64) -> Result<(FrameBounds, usize)> {
    let rb = range_basis(&synthesis_matrix(vectors)?);
    let rank = rb.rank();
    if rank == 0 {
        return Ok((FrameBounds::from_extremes(0.0, 0.0, rel_tol), 0));
    }
    let top = rb.singular_values[0].powi(2);
    let bottom = rb.singular_values[rank - 1].powi(2);
    Ok((FrameBounds::from_extremes(bottom, top, rel_tol), rank))
}

/// Iteration caps and tolerances of the iterative bounds path.
const ITER_TOL: f64 = 1e-10;
const ITER_MAX: usize = 200_000;

/// Frame bounds by power iteration (upper) and shifted inverse iteration (lower).
pub fn frame_bounds_iterative(vectors: &[SampledFunction], rel_tol: f64) -> Result<FrameBounds> {
    let v = synthesis_matrix(vectors)?;
    let (dim, count) = v.shape();
    // S = V V* and V* V share their top eigenvalue; iterate on the smaller one
    let upper = if count < dim {
        let g = v.adjoint() * &v;
        power_iteration(|x| &g * x, count, ITER_TOL, ITER_MAX)
    } else {
        let vh = v.adjoint();
        power_iteration(|x| &v * (&vh * x), dim, ITER_TOL, ITER_MAX)
    };
    if upper.value <= 0.0 {
        return Ok(FrameBounds::from_extremes(0.0, 0.0, rel_tol));
    }
    let s = &v * v.adjoint();
    let shift = 1e-10 * upper.value;
    let lower = inverse_iteration(&s, shift, ITER_TOL, upper.value, ITER_MAX)?;
    Ok(FrameBounds::from_extremes(lower.value, upper.value, rel_tol))
}

/// Full-space and span bounds side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameAnalysis {
    pub ambient: FrameBounds,
    pub span: FrameBounds,
    pub rank: usize,
    pub dimension: usize,
    pub count: usize,
}

pub fn analyze(vectors: &[SampledFunction], rel_tol: f64) -> Result<FrameAnalysis> {
    let ambient = frame_bounds(vectors, rel_tol)?;
    let (span, rank) = span_bounds(vectors, rel_tol)?;
    Ok(FrameAnalysis {
        ambient,
        span,
        rank,
        dimension: vectors[0].window().dim(),
        count: vectors.len(),
    })
}
