use qfim_core::closed_forms::{three_source_intensity_qfim, two_source_gamma, two_source_qfim};
use qfim_core::imaging::{
    build_state_model, centroid_relative_jacobian, generator_moments, two_source_primitive_params, ImagingScene,
    ParamSpec,
};
use qfim_core::qfim::compatibility_of;
use qfim_core::{qfim_with_options, reparameterize, QfimError, QfimOptions, RealMatrix};

use crate::error::{CliError, Result};
use crate::report::{deviation, ClosedFormComparison, ReportFile};
use crate::scene_file::{SceneFile, SCHEMA_VERSION};

/// Relative tolerance of the compatibility flags, against `max|H|`.
pub const COMPATIBILITY_TOL: f64 = 1e-9;

/// Relative tolerance for recognizing equally spaced collinear sources.
const GEOMETRY_TOL: f64 = 1e-9;

pub fn compute(file: &SceneFile, opts: QfimOptions) -> Result<ReportFile> {
    let scene = &file.scene;
    let model = build_state_model(scene, opts.rank_tol)?;
    let rep = qfim_with_options(&model, opts)?;
    let mut warnings = scene.paraxial_warnings();
    let closed_form = if file.options.compare_closed_form {
        match closed_form_comparison(scene, opts) {
            Ok(Some(c)) => Some(c),
            Err(CliError::Core(QfimError::DivisionByZero(msg))) => {
                warnings.push(format!("closed form undefined: {msg}"));
                None
            }
            Err(e) => return Err(e),
            Ok(None) => {
                warnings.push(
                    "no closed form applies: it needs two sources, or three equally spaced sources on a line \
                     parallel to x"
                        .into(),
                );
                None
            }
        }
    } else {
        None
    };
    if let Some(c) = &closed_form {
        if c.gamma.is_none() {
            warnings.push("closed-form Gamma is undefined for this separation".into());
        }
    }
    Ok(ReportFile {
        schema_version: SCHEMA_VERSION,
        labels: rep.labels.clone(),
        h: rep.h.to_rows(),
        gamma: rep.gamma.to_rows(),
        compatibility: compatibility_of(&rep, COMPATIBILITY_TOL).pairs,
        closed_form,
        diagnostics: rep.diagnostics,
        warnings,
    })
}

fn numerical(scene: &ImagingScene, estimate: Vec<ParamSpec>, opts: QfimOptions) -> Result<(RealMatrix, RealMatrix)> {
    let mut s = scene.clone();
    s.estimate = estimate;
    let rep = qfim_with_options(&build_state_model(&s, opts.rank_tol)?, opts)?;
    Ok((rep.h, rep.gamma))
}

fn closed_form_comparison(scene: &ImagingScene, opts: QfimOptions) -> Result<Option<ClosedFormComparison>> {
    let m = generator_moments(scene);
    let p = scene.probabilities();
    match scene.sources.len() {
        2 => {
            let (r1, r2) = (scene.sources[0].position(), scene.sources[1].position());
            let delta = [0, 1, 2].map(|a| 0.5 * (r1[a] - r2[a]));
            let (h, g) = numerical(scene, two_source_primitive_params(), opts)?;
            let j = centroid_relative_jacobian();
            let (h, g) = (reparameterize(&h, &j)?, reparameterize(&g, &j)?);
            let cf = two_source_qfim(&m, p[0], delta)?.h;
            let cf_gamma = two_source_gamma(&m, p[0], delta).ok();
            let labels = ["dx", "dy", "dz", "cx", "cy", "cz", "p1"].map(String::from).to_vec();
            Ok(Some(ClosedFormComparison {
                kind: "two_source".into(),
                labels,
                h_deviation: deviation(&h, &cf, &[(0, 3), (3, 3), (6, 1)]).to_rows(),
                h_numerical: h.to_rows(),
                h: cf.to_rows(),
                gamma_numerical: g.to_rows(),
                gamma: cf_gamma.map(|x| x.to_rows()),
            }))
        }
        3 => {
            let r: Vec<[f64; 3]> = scene.sources.iter().map(|s| s.position()).collect();
            let dx = r[1][0] - r[0][0];
            let scale = scene.z0;
            let collinear = (0..3).all(|s| {
                (r[s][1] - r[0][1]).abs() <= GEOMETRY_TOL * scale && (r[s][2] - r[0][2]).abs() <= GEOMETRY_TOL * scale
            });
            let equal = ((r[2][0] - r[1][0]) - dx).abs() <= GEOMETRY_TOL * dx.abs();
            if !(collinear && equal) || dx == 0.0 {
                return Ok(None);
            }
            let est = vec![ParamSpec::Probability { source: 0 }, ParamSpec::Probability { source: 1 }];
            let (h, g) = numerical(scene, est, opts)?;
            let cf = three_source_intensity_qfim(&m, p[0], p[1], dx)?;
            Ok(Some(ClosedFormComparison {
                kind: "three_source_intensity".into(),
                labels: vec!["p1".into(), "p2".into()],
                h_deviation: deviation(&h, &cf, &[(0, 1), (1, 1)]).to_rows(),
                h_numerical: h.to_rows(),
                h: cf.to_rows(),
                gamma_numerical: g.to_rows(),
                gamma: Some(RealMatrix::zeros(2, 2).to_rows()),
            }))
        }
        _ => Ok(None),
    }
}
