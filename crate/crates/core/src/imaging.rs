//! Discrete point-source imaging in the paraxial regime.
//!
//! The ambient basis is the set of collection points `|j⟩`, so the
//! generators `G_x, G_y, G_z` are diagonal and a source at `r` emits the
//! photon state `ψ(r)_j = exp(−i(G_x,j x + G_y,j y + G_z,j z)) / √N_C`.

use serde::{Deserialize, Serialize};

use crate::basis::{BasisSet, RANK_TOL};
use crate::error::{QfimError, Result};
use crate::linalg::{CMatrix, C64};
use crate::model::{ParameterSlot, StateModel};
use crate::rmatrix::RealMatrix;

/// Coordinates above this fraction of `z0` trigger a paraxial warning.
pub const PARAXIAL_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub intensity: f64,
}

impl Source {
    pub fn new(x: f64, y: f64, z: f64, intensity: f64) -> Self {
        Self { x, y, z, intensity }
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionPoint {
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// One term `coef · ∂/∂(source.axis)` of a position combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionTerm {
    pub source: usize,
    pub axis: Axis,
    pub coef: f64,
}

/// A parameter to estimate. Source indices are zero-based; labels are one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamSpec {
    /// One coordinate of one source.
    Position { source: usize, axis: Axis },
    /// Relative intensity `p_s`; the last source's probability is eliminated.
    Probability { source: usize },
    /// `c = (r_a + r_b)/2`, moving both sources together.
    Centroid { axis: Axis, sources: [usize; 2] },
    /// `δ = (r_a − r_b)/2`, moving the sources apart.
    Relative { axis: Axis, sources: [usize; 2] },
    /// Any linear combination of position derivatives.
    Combination { name: String, terms: Vec<PositionTerm> },
}

impl ParamSpec {
    pub fn label(&self) -> String {
        match self {
            ParamSpec::Position { source, axis } => format!("{}{}", axis.label(), source + 1),
            ParamSpec::Probability { source } => format!("p{}", source + 1),
            ParamSpec::Centroid { axis, .. } => format!("c{}", axis.label()),
            ParamSpec::Relative { axis, .. } => format!("d{}", axis.label()),
            ParamSpec::Combination { name, .. } => name.clone(),
        }
    }

    /// Position terms, or `None` for a probability.
    pub fn position_terms(&self) -> Option<Vec<PositionTerm>> {
        let term = |source, axis, coef| PositionTerm { source, axis, coef };
        match self {
            ParamSpec::Position { source, axis } => Some(vec![term(*source, *axis, 1.0)]),
            ParamSpec::Probability { .. } => None,
            ParamSpec::Centroid { axis, sources } => Some(vec![
                term(sources[0], *axis, 1.0),
                term(sources[1], *axis, 1.0),
            ]),
            ParamSpec::Relative { axis, sources } => Some(vec![
                term(sources[0], *axis, 1.0),
                term(sources[1], *axis, -1.0),
            ]),
            ParamSpec::Combination { terms, .. } => Some(terms.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagingScene {
    pub sources: Vec<Source>,
    pub collection_points: Vec<CollectionPoint>,
    pub k: f64,
    pub z0: f64,
    pub estimate: Vec<ParamSpec>,
}

/// Diagonals of the generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub gz: Vec<f64>,
}

impl GeneratorSet {
    pub fn diagonal(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.gx,
            Axis::Y => &self.gy,
            Axis::Z => &self.gz,
        }
    }

    pub fn matrix(&self, axis: Axis) -> CMatrix {
        CMatrix::real_diag(self.diagonal(axis))
    }

    pub fn matrices(&self) -> [CMatrix; 3] {
        Axis::ALL.map(|a| self.matrix(a))
    }

    /// `g_j = (G_x,j, G_y,j, G_z,j)` per collection point.
    pub fn samples(&self) -> Vec<[f64; 3]> {
        (0..self.gx.len())
            .map(|j| [self.gx[j], self.gy[j], self.gz[j]])
            .collect()
    }

    pub fn moments(&self) -> GeneratorMoments {
        GeneratorMoments::from_samples(self.samples())
    }
}

impl ImagingScene {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QfimError::InvalidScene(msg));
        if self.sources.is_empty() {
            return bad("at least one source is required".into());
        }
        if self.collection_points.len() < 2 {
            return bad("at least two collection points are required".into());
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return bad(format!("k must be positive, got {}", self.k));
        }
        if !(self.z0.is_finite() && self.z0 > 0.0) {
            return bad(format!("z0 must be positive, got {}", self.z0));
        }
        for (s, src) in self.sources.iter().enumerate() {
            if !src.position().iter().all(|c| c.is_finite()) {
                return bad(format!("source {s} has a non-finite coordinate"));
            }
            if !(src.intensity.is_finite() && src.intensity >= 0.0) {
                return bad(format!("source {s} has intensity {}", src.intensity));
            }
        }
        if self.total_intensity() <= 0.0 {
            return bad("total intensity must be positive".into());
        }
        if self
            .collection_points
            .iter()
            .any(|c| !(c.v.is_finite() && c.w.is_finite()))
        {
            return bad("collection point has a non-finite coordinate".into());
        }
        let ns = self.sources.len();
        for spec in &self.estimate {
            match spec {
                ParamSpec::Probability { source } if *source + 1 >= ns => {
                    return bad(format!(
                        "probability of source {source} cannot be estimated: the last source's \
                         probability is fixed by normalization"
                    ));
                }
                _ => {}
            }
            if let Some(terms) = spec.position_terms() {
                if terms.is_empty() {
                    return bad(format!("parameter {} has no terms", spec.label()));
                }
                if let Some(t) = terms.iter().find(|t| t.source >= ns) {
                    return bad(format!("parameter {} refers to source {}", spec.label(), t.source));
                }
            }
        }
        Ok(())
    }

    pub fn total_intensity(&self) -> f64 {
        self.sources.iter().map(|s| s.intensity).sum()
    }

    /// `p_s = I_s / I_tot`; the last entry is `1 − Σ others`.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total_intensity();
        let n = self.sources.len();
        let mut p: Vec<f64> = self.sources.iter().map(|s| s.intensity / total).collect();
        let head: f64 = p[..n - 1].iter().sum();
        p[n - 1] = 1.0 - head;
        p
    }

    pub fn labels(&self) -> Vec<String> {
        self.estimate.iter().map(ParamSpec::label).collect()
    }

    pub fn paraxial_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let limit = PARAXIAL_LIMIT * self.z0;
        for (s, src) in self.sources.iter().enumerate() {
            let m = src.position().iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if m > limit {
                out.push(format!(
                    "source {s}: coordinate {m} exceeds {PARAXIAL_LIMIT} z0; paraxial phases may be inaccurate"
                ));
            }
        }
        for (j, c) in self.collection_points.iter().enumerate() {
            let m = c.v.abs().max(c.w.abs());
            if m > limit {
                out.push(format!(
                    "collection point {j}: coordinate {m} exceeds {PARAXIAL_LIMIT} z0; paraxial phases may be inaccurate"
                ));
            }
        }
        out
    }

    /// Sources closer than `rank_tol · z0`.
    pub fn coincident_sources(&self, rank_tol: f64) -> Option<(usize, usize)> {
        for a in 0..self.sources.len() {
            for b in a + 1..self.sources.len() {
                let (ra, rb) = (self.sources[a].position(), self.sources[b].position());
                let d = (0..3).map(|i| (ra[i] - rb[i]).powi(2)).sum::<f64>().sqrt();
                if d <= rank_tol * self.z0 {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

pub fn generators(scene: &ImagingScene) -> GeneratorSet {
    let (k, z0) = (scene.k, scene.z0);
    let pts = &scene.collection_points;
    GeneratorSet {
        gx: pts.iter().map(|c| k * c.v / z0).collect(),
        gy: pts.iter().map(|c| k * c.w / z0).collect(),
        gz: pts
            .iter()
            .map(|c| k * (c.v * c.v + c.w * c.w) / (2.0 * z0 * z0))
            .collect(),
    }
}

/// Uniform superposition of `nc` collection points.
pub fn reference_state(nc: usize) -> Vec<C64> {
    vec![C64::new(1.0 / (nc as f64).sqrt(), 0.0); nc]
}

fn ket_at(g: &GeneratorSet, r: [f64; 3]) -> Vec<C64> {
    let amp = 1.0 / (g.gx.len() as f64).sqrt();
    (0..g.gx.len())
        .map(|j| {
            let phase = g.gx[j] * r[0] + g.gy[j] * r[1] + g.gz[j] * r[2];
            C64::from_polar(amp, -phase)
        })
        .collect()
}

pub fn source_ket(scene: &ImagingScene, s: usize) -> Vec<C64> {
    ket_at(&generators(scene), scene.sources[s].position())
}

/// `ρ = Σ p_s |ψ_s⟩⟨ψ_s|` in the collection-point basis.
pub fn photon_state(scene: &ImagingScene) -> CMatrix {
    let g = generators(scene);
    let nc = g.gx.len();
    let mut rho = CMatrix::zeros(nc, nc);
    for (src, p) in scene.sources.iter().zip(scene.probabilities()) {
        let psi = ket_at(&g, src.position());
        rho = &rho + &CMatrix::outer(&psi, &psi).scale_real(p);
    }
    rho
}

/// `∂|ψ_s⟩ = −i G_axis |ψ_s⟩`.
fn derivative_ket(g: &GeneratorSet, psi: &[C64], axis: Axis) -> Vec<C64> {
    let d = g.diagonal(axis);
    psi.iter()
        .zip(d)
        .map(|(a, gj)| C64::new(0.0, -gj) * a)
        .collect()
}

/// Extension kets and ambient `∂ρ` of one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeForm {
    /// Derivative kets in source-index order, one per position term.
    pub kets: Vec<Vec<C64>>,
    pub drho: CMatrix,
}

pub fn derivative_kets(scene: &ImagingScene, spec: &ParamSpec) -> Result<DerivativeForm> {
    scene.validate()?;
    let g = generators(scene);
    let p = scene.probabilities();
    let psis: Vec<Vec<C64>> = scene.sources.iter().map(|s| ket_at(&g, s.position())).collect();
    let nc = g.gx.len();
    match spec.position_terms() {
        None => {
            let ParamSpec::Probability { source } = *spec else {
                unreachable!("only probabilities lack position terms")
            };
            let last = psis.len() - 1;
            let drho = &CMatrix::outer(&psis[source], &psis[source])
                - &CMatrix::outer(&psis[last], &psis[last]);
            Ok(DerivativeForm {
                kets: Vec::new(),
                drho,
            })
        }
        Some(terms) => {
            let mut terms = terms;
            terms.sort_by_key(|t| t.source);
            let mut kets = Vec::with_capacity(terms.len());
            let mut drho = CMatrix::zeros(nc, nc);
            for t in &terms {
                let psi = &psis[t.source];
                let d = derivative_ket(&g, psi, t.axis);
                let a = CMatrix::outer(&d, psi);
                let term = &a + &a.adjoint();
                drho = &drho + &term.scale_real(t.coef * p[t.source]);
                kets.push(d);
            }
            Ok(DerivativeForm { kets, drho })
        }
    }
}

/// How derivative kets enter `B_μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionStyle {
    /// Append `∂ψ` itself.
    Raw,
    /// Append the normalized part of `∂ψ` orthogonal to the running span.
    #[default]
    Orthogonal,
}

/// State model with `B = {ψ_s}` and `ρ^B = diag(p)`.
pub fn build_state_model(scene: &ImagingScene, rank_tol: f64) -> Result<StateModel> {
    build_state_model_with(scene, rank_tol, ExtensionStyle::default())
}

pub fn build_state_model_with(scene: &ImagingScene, rank_tol: f64, style: ExtensionStyle) -> Result<StateModel> {
    scene.validate()?;
    if let Some((a, b)) = scene.coincident_sources(rank_tol) {
        return Err(QfimError::RankDeficient {
            indices: vec![a, b],
            smallest_sigma: 0.0,
        });
    }
    let g = generators(scene);
    let p = scene.probabilities();
    let psis: Vec<Vec<C64>> = scene.sources.iter().map(|s| ket_at(&g, s.position())).collect();
    let ns = psis.len();
    let basis = BasisSet::new(psis.clone(), ns, rank_tol)?;
    let rho = CMatrix::real_diag(&p);

    let mut slots = Vec::with_capacity(scene.estimate.len());
    for spec in &scene.estimate {
        let name = spec.label();
        match spec.position_terms() {
            None => {
                let ParamSpec::Probability { source } = *spec else {
                    unreachable!("only probabilities lack position terms")
                };
                let mut d = vec![0.0; ns];
                d[source] += 1.0;
                d[ns - 1] -= 1.0;
                slots.push(ParameterSlot::in_support(name, &basis, CMatrix::real_diag(&d)));
            }
            Some(mut terms) => {
                terms.sort_by_key(|t| t.source);
                let kets: Vec<Vec<C64>> = terms
                    .iter()
                    .map(|t| derivative_ket(&g, &psis[t.source], t.axis))
                    .collect();
                let ext = match style {
                    ExtensionStyle::Raw => basis.extend(&kets, rank_tol)?,
                    ExtensionStyle::Orthogonal => basis.extend_orthogonal(&kets, rank_tol)?,
                };
                let n = ext.basis.len();
                // ∂ρ = Σ coef p_s (|d⟩⟨ψ_s| + |ψ_s⟩⟨d|), with d given by its coordinates.
                let mut a = CMatrix::zeros(n, n);
                for (t, coords) in terms.iter().zip(&ext.coords) {
                    let w = t.coef * p[t.source];
                    for (i, c) in coords.iter().enumerate() {
                        a[(i, t.source)] += c * w;
                    }
                }
                let drho = &a + &a.adjoint();
                slots.push(ParameterSlot {
                    name,
                    basis: ext.basis,
                    drho,
                });
            }
        }
    }
    StateModel::new(basis, rho, slots)
}

pub fn build_state_model_default(scene: &ImagingScene) -> Result<StateModel> {
    build_state_model(scene, RANK_TOL)
}

/// Moments of `g = (g_x, g_y, g_z)` in the reference state, `⟨A⟩ = (1/N_C) Σ_j A_jj`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMoments {
    samples: Vec<[f64; 3]>,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl GeneratorMoments {
    pub fn from_samples(samples: Vec<[f64; 3]>) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    /// `⟨f(g)⟩`.
    pub fn expect(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.samples.iter().map(|&g| f(g)).sum::<f64>() / self.samples.len() as f64
    }

    pub fn mean(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.expect(|g| g[a]))
    }

    pub fn cov(&self) -> [[f64; 3]; 3] {
        let m = self.mean();
        [0, 1, 2].map(|a| [0, 1, 2].map(|b| self.expect(|g| (g[a] - m[a]) * (g[b] - m[b]))))
    }

    pub fn var(&self, axis: Axis) -> f64 {
        let a = axis.index();
        self.cov()[a][a]
    }

    /// `Var(δ·g)`.
    pub fn var_along(&self, delta: [f64; 3]) -> f64 {
        let m = dot(self.mean(), delta);
        self.expect(|g| (dot(g, delta) - m).powi(2))
    }

    /// `⟨g(δ·g)⟩ − ⟨g⟩⟨δ·g⟩`.
    pub fn cov_with(&self, delta: [f64; 3]) -> [f64; 3] {
        let mean = self.mean();
        let md = dot(mean, delta);
        [0, 1, 2].map(|a| self.expect(|g| g[a] * dot(g, delta)) - mean[a] * md)
    }

    /// `2[⟨g(δg)²⟩ − ⟨g⟩⟨(δg)²⟩ + 2⟨g⟩⟨δg⟩² − 2⟨g(δg)⟩⟨δg⟩]`, evaluated as
    /// the equal central form `2⟨(g − ⟨g⟩)(δg − ⟨δg⟩)²⟩`.
    pub fn gamma23(&self, delta: [f64; 3]) -> [f64; 3] {
        let mean = self.mean();
        let md = dot(mean, delta);
        [0, 1, 2].map(|a| 2.0 * self.expect(|g| (g[a] - mean[a]) * (dot(g, delta) - md).powi(2)))
    }
}

pub fn generator_moments(scene: &ImagingScene) -> GeneratorMoments {
    generators(scene).moments()
}

/// Maps derivatives from `(x1,y1,z1,x2,y2,z2,p1)` to `(δx,δy,δz,cx,cy,cz,p1)`
/// with `r1 = c + δ`, `r2 = c − δ`: `H_new = Jᵀ H J`.
pub fn centroid_relative_jacobian() -> RealMatrix {
    let mut j = RealMatrix::zeros(7, 7);
    for a in 0..3 {
        j[(a, a)] = 1.0;
        j[(a + 3, a)] = -1.0;
        j[(a, a + 3)] = 1.0;
        j[(a + 3, a + 3)] = 1.0;
    }
    j[(6, 6)] = 1.0;
    j
}

/// The seven primitive parameters `(x1,y1,z1,x2,y2,z2,p1)` of a two-source scene.
pub fn two_source_primitive_params() -> Vec<ParamSpec> {
    let mut v: Vec<ParamSpec> = (0..2)
        .flat_map(|source| Axis::ALL.map(|axis| ParamSpec::Position { source, axis }))
        .collect();
    v.push(ParamSpec::Probability { source: 0 });
    v
}

/// The seven parameters `(δx,δy,δz,cx,cy,cz,p1)` of a two-source scene.
pub fn two_source_centroid_relative_params() -> Vec<ParamSpec> {
    let s = [0, 1];
    let mut v: Vec<ParamSpec> = Axis::ALL
        .map(|axis| ParamSpec::Relative { axis, sources: s })
        .into_iter()
        .collect();
    v.extend(Axis::ALL.map(|axis| ParamSpec::Centroid { axis, sources: s }));
    v.push(ParamSpec::Probability { source: 0 });
    v
}
