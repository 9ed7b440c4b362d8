//! Built-in models and the JSON model format.
//!
//! A model bundles a chart, a bundle with connection, an optional metric,
//! an optional Lie algebroid, named stored forms, an optional plectic
//! structure, momentum sections and optional quotient data. Every built-in
//! is constructed through the same configuration structures the JSON loader
//! uses, so `save(builtin(..))` followed by `load` reproduces the model
//! exactly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebroid::{Algebroid, MixedForm};
use crate::expr::{ParseError, SmoothFunction};
use crate::form::{Bundle, EForm};
use crate::geometry::{Chart, Connection, Metric, TAU};
use crate::plectic::{
    fit_quadratic_potential, potential_to_source, MomentumSection, PlecticStructure,
};
use crate::reduction::QuotientData;

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown built-in model `{0}`")]
    UnknownModel(String),
    #[error("failed to read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {source}")]
    Expr { field: String, source: ParseError },
    #[error("field `{field}`: expected {expected}, got {got}")]
    Shape {
        field: String,
        expected: String,
        got: String,
    },
    #[error("field `{field}` is missing")]
    Missing { field: String },
    #[error("model validation failed on `{field}`: residual {residual:.3e}")]
    Validation { field: String, residual: f64 },
}

/// Serializable model description; expressions are source strings over
/// `x0..x{dim-1}` (quotient expressions over the quotient coordinates).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<Vec<bool>>,
    /// Per-coordinate [lo, hi]; defaults to [-1.5, 1.5] (periodic: [0, 2π]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_box: Option<Vec<[f64; 2]>>,
    pub bundle: BundleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebroid: Option<AlgebroidConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub forms: BTreeMap<String, FormConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub momentum: Vec<FormConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plectic: Option<PlecticConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient: Option<QuotientConfig>,
    /// Names of three scalar 2-forms forming a quaternionic-type triple.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_triple: Option<[String; 3]>,
    /// Name of a stored 1-form with `d(form) = ω` to verify.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_form: Option<String>,
    /// Name of a group-structure 1-form satisfying the structure equation
    /// `dλ(u, v) = [λ(u), λ(v)]` with the algebroid structure constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_form: Option<String>,
    /// The plectic form equals the curvature of the model bundle.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub omega_is_curvature: bool,
    /// A designated base point on the zero set of the momentum section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_base: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BundleConfig {
    pub rank: usize,
    /// `connection[a][b]` is the list of the d components of `A^a_b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<Vec<Vec<Vec<String>>>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AlgebroidConfig {
    pub rank: usize,
    /// `anchor[a]` is the component list of `ρ(e_a)`.
    pub anchor: Vec<Vec<String>>,
    /// `structure[a][b]` is the frame expansion of `[e_a, e_b]`; only the
    /// entries with a < b are read, the rest are mirrored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Vec<Vec<Vec<String>>>>,
    /// `aconn[c][b]` is the component list of the `e_c`-coefficient of
    /// `∇^A e_b`; defaults to the trivial connection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aconn: Option<Vec<Vec<Vec<String>>>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FormConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    /// Fiber rank; defaults to the model bundle rank.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bidegree: Option<[usize; 2]>,
    /// Keys are multi-index strings: comma-separated ascending tangent
    /// indices, then `|`, then ascending algebroid indices ("0,1|0"; the
    /// bar may be omitted for pure tangent forms, and "|0" has no tangent
    /// part). Values are the fiber component expressions.
    pub coeffs: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PlecticConfig {
    /// Name of the stored form that is the plectic form.
    pub form: String,
    #[serde(default)]
    pub pre_plectic: bool,
    /// Use a trivial connection of the form's rank instead of the model
    /// bundle connection (for structures living on an associated bundle).
    #[serde(default)]
    pub own_trivial_bundle: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct QuotientConfig {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_box: Option<Vec<[f64; 2]>>,
    /// quotient coordinates as functions of the ambient chart
    pub projection: Vec<String>,
    /// ambient coordinates as functions of the quotient chart, landing in
    /// the zero set
    pub section: Vec<String>,
    /// expected reduced 2-form on the quotient chart
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_reduced: Option<FormConfig>,
}

/// A compiled model: every expression parsed, every index range checked.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub chart: Chart,
    pub bundle: Bundle,
    pub metric: Option<Metric>,
    pub algebroid: Option<Algebroid>,
    pub plectic: Option<PlecticStructure>,
    pub momentum: Option<MomentumSection>,
    pub quotient: Option<QuotientData>,
    pub theta_triple: Option<[EForm; 3]>,
    pub potential_form: Option<EForm>,
    pub mc_form: Option<EForm>,
    pub omega_is_curvature: bool,
    pub zero_base: Option<Vec<f64>>,
    pub forms: BTreeMap<String, EForm>,
    config: ModelConfig,
}

pub const BUILTIN_NAMES: [&str; 7] = [
    "E1_symplectic",
    "E1T_translation",
    "E2_hyperkahler",
    "E3_heisenberg",
    "E4_torus4",
    "E5_curvature",
    "E6_tautological",
];

/// Constructs a built-in model by name.
pub fn builtin(name: &str) -> Result<Model, CatalogError> {
    let cfg = match name {
        "E1_symplectic" => e1_symplectic(),
        "E1T_translation" => e1t_translation(),
        "E2_hyperkahler" => e2_hyperkahler(),
        "E3_heisenberg" => e3_heisenberg(),
        "E4_torus4" => e4_torus4(),
        "E5_curvature" => e5_curvature(),
        "E6_tautological" => e6_tautological(),
        other => return Err(CatalogError::UnknownModel(other.to_string())),
    };
    Model::from_config(cfg)
}

/// Loads and validates a model file.
pub fn load(path: &Path) -> Result<Model, CatalogError> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ModelConfig = serde_json::from_str(&text)?;
    let model = Model::from_config(cfg)?;
    model.quick_validate()?;
    Ok(model)
}

/// Serializes a model's configuration (deterministic key order).
pub fn save(model: &Model, path: &Path) -> Result<(), CatalogError> {
    std::fs::write(path, to_json(model))?;
    Ok(())
}

pub fn to_json(model: &Model) -> String {
    let mut s = serde_json::to_string_pretty(&model.config).expect("config serializes");
    s.push('\n');
    s
}

impl Model {
    pub fn from_config(cfg: ModelConfig) -> Result<Model, CatalogError> {
        let d = cfg.dim;
        if d == 0 {
            return Err(CatalogError::Shape {
                field: "dim".into(),
                expected: "a positive dimension".into(),
                got: "0".into(),
            });
        }
        let periodic = cfg.periodic.clone().unwrap_or_else(|| vec![false; d]);
        if periodic.len() != d {
            return Err(shape("periodic", d, periodic.len()));
        }
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for i in 0..d {
            let b = cfg
                .chart_box
                .as_ref()
                .and_then(|bx| bx.get(i).copied())
                .unwrap_or(if periodic[i] { [0.0, TAU] } else { [-1.5, 1.5] });
            lo.push(b[0]);
            hi.push(b[1]);
        }
        let chart = Chart {
            dim: d,
            lo,
            hi,
            periodic,
        };

        let rank = cfg.bundle.rank;
        let conn = match &cfg.bundle.connection {
            None => Connection::trivial(rank, d),
            Some(rows) => {
                let mut comps = Vec::with_capacity(rank * rank * d);
                if rows.len() != rank {
                    return Err(shape("bundle.connection", rank, rows.len()));
                }
                for (a, row) in rows.iter().enumerate() {
                    if row.len() != rank {
                        return Err(shape(&format!("bundle.connection[{a}]"), rank, row.len()));
                    }
                    for (b, forms) in row.iter().enumerate() {
                        if forms.len() != d {
                            return Err(shape(
                                &format!("bundle.connection[{a}][{b}]"),
                                d,
                                forms.len(),
                            ));
                        }
                        for (i, src) in forms.iter().enumerate() {
                            comps.push(parse_field(
                                src,
                                d,
                                &format!("bundle.connection[{a}][{b}][{i}]"),
                            )?);
                        }
                    }
                }
                Connection::Coeffs { rank, comps }
            }
        };
        let bundle = Bundle { rank, conn };

        let metric = match &cfg.metric {
            None => None,
            Some(rows) => {
                if rows.len() != d {
                    return Err(shape("metric", d, rows.len()));
                }
                let mut comps = Vec::with_capacity(d * d);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != d {
                        return Err(shape(&format!("metric[{i}]"), d, row.len()));
                    }
                    for (j, src) in row.iter().enumerate() {
                        comps.push(parse_field(src, d, &format!("metric[{i}][{j}]"))?);
                    }
                }
                Some(Metric::new(d, comps))
            }
        };

        let algebroid = match &cfg.algebroid {
            None => None,
            Some(ac) => {
                let m = ac.rank;
                if ac.anchor.len() != m {
                    return Err(shape("algebroid.anchor", m, ac.anchor.len()));
                }
                let mut anchor = Vec::with_capacity(m * d);
                for (a, row) in ac.anchor.iter().enumerate() {
                    if row.len() != d {
                        return Err(shape(&format!("algebroid.anchor[{a}]"), d, row.len()));
                    }
                    for (i, src) in row.iter().enumerate() {
                        anchor.push(parse_field(src, d, &format!("algebroid.anchor[{a}][{i}]"))?);
                    }
                }
                let mut alg = Algebroid::new(d, m, anchor);
                if let Some(st) = &ac.structure {
                    if st.len() != m {
                        return Err(shape("algebroid.structure", m, st.len()));
                    }
                    for a in 0..m {
                        if st[a].len() != m {
                            return Err(shape(
                                &format!("algebroid.structure[{a}]"),
                                m,
                                st[a].len(),
                            ));
                        }
                        for b in (a + 1)..m {
                            let comps = &st[a][b];
                            if comps.len() != m {
                                return Err(shape(
                                    &format!("algebroid.structure[{a}][{b}]"),
                                    m,
                                    comps.len(),
                                ));
                            }
                            let parsed: Vec<SmoothFunction> = comps
                                .iter()
                                .enumerate()
                                .map(|(c, src)| {
                                    parse_field(
                                        src,
                                        d,
                                        &format!("algebroid.structure[{a}][{b}][{c}]"),
                                    )
                                })
                                .collect::<Result<_, _>>()?;
                            if parsed.iter().any(|f| !f.is_zero_literal()) {
                                alg.set_bracket(a, b, parsed);
                            }
                        }
                    }
                }
                if let Some(rows) = &ac.aconn {
                    let mut comps = Vec::with_capacity(m * m * d);
                    if rows.len() != m {
                        return Err(shape("algebroid.aconn", m, rows.len()));
                    }
                    for (c, row) in rows.iter().enumerate() {
                        if row.len() != m {
                            return Err(shape(&format!("algebroid.aconn[{c}]"), m, row.len()));
                        }
                        for (b, forms) in row.iter().enumerate() {
                            if forms.len() != d {
                                return Err(shape(
                                    &format!("algebroid.aconn[{c}][{b}]"),
                                    d,
                                    forms.len(),
                                ));
                            }
                            for (i, src) in forms.iter().enumerate() {
                                comps.push(parse_field(
                                    src,
                                    d,
                                    &format!("algebroid.aconn[{c}][{b}][{i}]"),
                                )?);
                            }
                        }
                    }
                    alg.aconn = Connection::Coeffs { rank: m, comps };
                }
                Some(alg)
            }
        };

        let arank = algebroid.as_ref().map(|a| a.rank).unwrap_or(0);
        let mut forms = BTreeMap::new();
        for (name, fc) in &cfg.forms {
            let degree = fc.degree.ok_or_else(|| CatalogError::Missing {
                field: format!("forms.{name}.degree"),
            })?;
            forms.insert(
                name.clone(),
                compile_eform(fc, d, degree, rank, &format!("forms.{name}"))?,
            );
        }

        let momentum = if cfg.momentum.is_empty() {
            None
        } else {
            let mut comps = Vec::new();
            for (k, fc) in cfg.momentum.iter().enumerate() {
                let [p, q] = fc.bidegree.ok_or_else(|| CatalogError::Missing {
                    field: format!("momentum[{k}].bidegree"),
                })?;
                comps.push(compile_mixed(
                    fc,
                    d,
                    arank,
                    p,
                    q,
                    rank,
                    &format!("momentum[{k}]"),
                )?);
            }
            Some(MomentumSection { components: comps })
        };

        let plectic = match &cfg.plectic {
            None => None,
            Some(pc) => {
                let omega = forms.get(&pc.form).ok_or_else(|| CatalogError::Missing {
                    field: format!("forms.{}", pc.form),
                })?;
                let pbundle = if pc.own_trivial_bundle {
                    Bundle::trivial(omega.rank, d)
                } else {
                    bundle.clone()
                };
                Some(PlecticStructure::new(
                    omega.clone(),
                    pbundle,
                    pc.pre_plectic,
                ))
            }
        };

        let quotient = match &cfg.quotient {
            None => None,
            Some(qc) => {
                let qd = qc.dim;
                let qperiodic = qc.periodic.clone().unwrap_or_else(|| vec![false; qd]);
                let mut qlo = Vec::new();
                let mut qhi = Vec::new();
                for i in 0..qd {
                    let b = qc
                        .chart_box
                        .as_ref()
                        .and_then(|bx| bx.get(i).copied())
                        .unwrap_or(if qperiodic[i] { [0.0, TAU] } else { [-1.5, 1.5] });
                    qlo.push(b[0]);
                    qhi.push(b[1]);
                }
                let qchart = Chart {
                    dim: qd,
                    lo: qlo,
                    hi: qhi,
                    periodic: qperiodic,
                };
                if qc.projection.len() != qd {
                    return Err(shape("quotient.projection", qd, qc.projection.len()));
                }
                if qc.section.len() != d {
                    return Err(shape("quotient.section", d, qc.section.len()));
                }
                let projection = qc
                    .projection
                    .iter()
                    .enumerate()
                    .map(|(i, src)| parse_field(src, d, &format!("quotient.projection[{i}]")))
                    .collect::<Result<_, _>>()?;
                let section = qc
                    .section
                    .iter()
                    .enumerate()
                    .map(|(i, src)| parse_field(src, qd, &format!("quotient.section[{i}]")))
                    .collect::<Result<_, _>>()?;
                let expected_reduced = match &qc.expected_reduced {
                    None => None,
                    Some(fc) => Some(compile_eform(
                        fc,
                        qd,
                        2,
                        rank,
                        "quotient.expected_reduced",
                    )?),
                };
                Some(QuotientData {
                    chart: qchart,
                    projection,
                    section,
                    expected_reduced,
                })
            }
        };

        let theta_triple = match &cfg.theta_triple {
            None => None,
            Some(names) => {
                let mut picked = Vec::new();
                for n in names {
                    picked.push(forms.get(n).cloned().ok_or_else(|| {
                        CatalogError::Missing {
                            field: format!("forms.{n}"),
                        }
                    })?);
                }
                Some([picked[0].clone(), picked[1].clone(), picked[2].clone()])
            }
        };

        let lookup = |name: &Option<String>| -> Result<Option<EForm>, CatalogError> {
            match name {
                None => Ok(None),
                Some(n) => Ok(Some(forms.get(n).cloned().ok_or_else(|| {
                    CatalogError::Missing {
                        field: format!("forms.{n}"),
                    }
                })?)),
            }
        };
        let potential_form = lookup(&cfg.potential_form)?;
        let mc_form = lookup(&cfg.mc_form)?;
        if let Some(zb) = &cfg.zero_base {
            if zb.len() != d {
                return Err(shape("zero_base", d, zb.len()));
            }
        }

        Ok(Model {
            name: cfg.name.clone(),
            chart,
            bundle,
            metric,
            algebroid,
            plectic,
            momentum,
            quotient,
            theta_triple,
            potential_form,
            mc_form,
            omega_is_curvature: cfg.omega_is_curvature,
            zero_base: cfg.zero_base.clone(),
            forms,
            config: cfg,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// An inner sampling chart for flow-based checks: the box scaled by
    /// `factor` about its center (periodic coordinates keep the full circle).
    pub fn inner_chart(&self, factor: f64) -> Chart {
        let mut c = self.chart.clone();
        for i in 0..c.dim {
            if !c.periodic[i] {
                let mid = 0.5 * (c.lo[i] + c.hi[i]);
                let half = 0.5 * (c.hi[i] - c.lo[i]) * factor;
                c.lo[i] = mid - half;
                c.hi[i] = mid + half;
            }
        }
        c
    }

    /// Cheap numeric sanity pass used on loaded files: algebroid axioms and
    /// plectic closedness at a fixed small sample.
    pub fn quick_validate(&self) -> Result<(), CatalogError> {
        if let Some(alg) = &self.algebroid {
            let (anchor, jacobi) = crate::algebroid::validate(alg, &self.chart, 25, 20260810)
                .map_err(|e| CatalogError::Validation {
                    field: format!("algebroid ({e})"),
                    residual: f64::NAN,
                })?;
            if anchor > 1e-8 {
                return Err(CatalogError::Validation {
                    field: "algebroid.anchor (anchor morphism)".into(),
                    residual: anchor,
                });
            }
            if jacobi > 1e-8 {
                return Err(CatalogError::Validation {
                    field: "algebroid.structure (Jacobi identity)".into(),
                    residual: jacobi,
                });
            }
        }
        if let Some(ps) = &self.plectic {
            let res = ps
                .closedness_residual(&self.chart, 25, 20260810)
                .map_err(|e| CatalogError::Validation {
                    field: format!("plectic.form ({e})"),
                    residual: f64::NAN,
                })?;
            if res > 1e-8 {
                return Err(CatalogError::Validation {
                    field: "plectic.form (closedness)".into(),
                    residual: res,
                });
            }
        }
        Ok(())
    }
}

fn shape(field: &str, expected: usize, got: usize) -> CatalogError {
    CatalogError::Shape {
        field: field.to_string(),
        expected: expected.to_string(),
        got: got.to_string(),
    }
}

fn parse_field(src: &str, dim: usize, field: &str) -> Result<SmoothFunction, CatalogError> {
    SmoothFunction::parse(src, dim).map_err(|source| CatalogError::Expr {
        field: field.to_string(),
        source,
    })
}

fn parse_key(key: &str, field: &str) -> Result<(Vec<u8>, Vec<u8>), CatalogError> {
    let (t, a) = match key.split_once('|') {
        Some((t, a)) => (t, a),
        None => (key, ""),
    };
    let parse_side = |side: &str| -> Result<Vec<u8>, CatalogError> {
        if side.trim().is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for piece in side.split(',') {
            let v: u8 = piece.trim().parse().map_err(|_| CatalogError::Shape {
                field: field.to_string(),
                expected: "comma-separated ascending integers".into(),
                got: key.to_string(),
            })?;
            out.push(v);
        }
        if !out.windows(2).all(|w| w[0] < w[1]) {
            return Err(CatalogError::Shape {
                field: field.to_string(),
                expected: "strictly ascending multi-index".into(),
                got: key.to_string(),
            });
        }
        Ok(out)
    };
    Ok((parse_side(t)?, parse_side(a)?))
}

fn compile_eform(
    fc: &FormConfig,
    dim: usize,
    degree: usize,
    default_rank: usize,
    field: &str,
) -> Result<EForm, CatalogError> {
    let rank = fc.rank.unwrap_or(default_rank);
    let mut out = EForm::new(dim, degree, rank);
    for (key, comps) in &fc.coeffs {
        let (ti, ai) = parse_key(key, field)?;
        if !ai.is_empty() {
            return Err(CatalogError::Shape {
                field: field.to_string(),
                expected: "no algebroid indices on a plain form".into(),
                got: key.clone(),
            });
        }
        if ti.len() != degree || ti.iter().any(|&i| i as usize >= dim) {
            return Err(CatalogError::Shape {
                field: format!("{field}.coeffs[{key}]"),
                expected: format!("{degree} ascending indices below {dim}"),
                got: key.clone(),
            });
        }
        if comps.len() != rank {
            return Err(shape(&format!("{field}.coeffs[{key}]"), rank, comps.len()));
        }
        let parsed: Vec<SmoothFunction> = comps
            .iter()
            .enumerate()
            .map(|(f, src)| parse_field(src, dim, &format!("{field}.coeffs[{key}][{f}]")))
            .collect::<Result<_, _>>()?;
        out.set(&ti, parsed);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn compile_mixed(
    fc: &FormConfig,
    dim: usize,
    arank: usize,
    p: usize,
    q: usize,
    rank: usize,
    field: &str,
) -> Result<MixedForm, CatalogError> {
    if arank == 0 {
        return Err(CatalogError::Missing {
            field: "algebroid (required by momentum sections)".into(),
        });
    }
    let mut out = MixedForm::new(dim, arank, p, q, rank);
    for (key, comps) in &fc.coeffs {
        let (ti, ai) = parse_key(key, field)?;
        if ti.len() != p
            || ai.len() != q
            || ti.iter().any(|&i| i as usize >= dim)
            || ai.iter().any(|&a| a as usize >= arank)
        {
            return Err(CatalogError::Shape {
                field: format!("{field}.coeffs[{key}]"),
                expected: format!("bidegree ({p},{q}) indices below ({dim},{arank})"),
                got: key.clone(),
            });
        }
        if comps.len() != rank {
            return Err(shape(&format!("{field}.coeffs[{key}]"), rank, comps.len()));
        }
        let parsed: Vec<SmoothFunction> = comps
            .iter()
            .enumerate()
            .map(|(f, src)| parse_field(src, dim, &format!("{field}.coeffs[{key}][{f}]")))
            .collect::<Result<_, _>>()?;
        out.set(&ti, &ai, parsed);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// built-in model configurations
// ---------------------------------------------------------------------------

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn euclid_metric(dim: usize) -> Vec<Vec<String>> {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { "1".to_string() } else { "0".to_string() })
                .collect()
        })
        .collect()
}

fn scalar_form(degree: usize, entries: &[(&str, &str)]) -> FormConfig {
    FormConfig {
        degree: Some(degree),
        rank: Some(1),
        bidegree: None,
        coeffs: entries
            .iter()
            .map(|(k, v)| (k.to_string(), vec![v.to_string()]))
            .collect(),
    }
}

fn vector_form(degree: usize, entries: &[(&str, &[&str])]) -> FormConfig {
    FormConfig {
        degree: Some(degree),
        rank: None,
        bidegree: None,
        coeffs: entries
            .iter()
            .map(|(k, v)| (k.to_string(), strings(v)))
            .collect(),
    }
}

fn mixed_form_cfg(p: usize, q: usize, entries: &[(&str, &[&str])]) -> FormConfig {
    FormConfig {
        degree: None,
        rank: None,
        bidegree: Some([p, q]),
        coeffs: entries
            .iter()
            .map(|(k, v)| (k.to_string(), strings(v)))
            .collect(),
    }
}

/// Symplectic plane with the circle action generated by the clockwise
/// rotation field and the radius-squared energy as momentum.
fn e1_symplectic() -> ModelConfig {
    let mut forms = BTreeMap::new();
    forms.insert("omega".to_string(), scalar_form(2, &[("0,1", "1")]));
    ModelConfig {
        name: "E1_symplectic".into(),
        dim: 2,
        bundle: BundleConfig {
            rank: 1,
            connection: None,
        },
        metric: Some(euclid_metric(2)),
        algebroid: Some(AlgebroidConfig {
            rank: 1,
            anchor: vec![strings(&["x1", "-x0"])],
            structure: None,
            aconn: None,
        }),
        forms,
        momentum: vec![mixed_form_cfg(0, 1, &[("|0", &["0.5*x0^2 + 0.5*x1^2"])])],
        plectic: Some(PlecticConfig {
            form: "omega".into(),
            pre_plectic: false,
            own_trivial_bundle: false,
        }),
        zero_base: Some(vec![0.0, 0.0]),
        ..Default::default()
    }
}

/// Translation model: two symplectic planes, a translation action along the
/// first coordinate, zero set {x1 = 0}, explicit quotient onto the second
/// plane where the reduced form is the second area form.
fn e1t_translation() -> ModelConfig {
    let mut forms = BTreeMap::new();
    forms.insert(
        "omega".to_string(),
        scalar_form(2, &[("0,1", "1"), ("2,3", "1")]),
    );
    ModelConfig {
        name: "E1T_translation".into(),
        dim: 4,
        chart_box: Some(vec![[-4.0, 4.0]; 4]),
        bundle: BundleConfig {
            rank: 1,
            connection: None,
        },
        metric: Some(euclid_metric(4)),
        algebroid: Some(AlgebroidConfig {
            rank: 1,
            anchor: vec![strings(&["1", "0", "0", "0"])],
            structure: None,
            aconn: None,
        }),
        forms,
        momentum: vec![mixed_form_cfg(0, 1, &[("|0", &["x1"])])],
        plectic: Some(PlecticConfig {
            form: "omega".into(),
            pre_plectic: false,
            own_trivial_bundle: false,
        }),
        quotient: Some(QuotientConfig {
            dim: 2,
            periodic: None,
            chart_box: Some(vec![[-1.2, 1.2]; 2]),
            projection: strings(&["x2", "x3"]),
            section: strings(&["0", "0", "x0", "x1"]),
            expected_reduced: Some(scalar_form(2, &[("0,1", "1")])),
        }),
        zero_base: Some(vec![0.0, 0.0, 0.3, -0.4]),
        ..Default::default()
    }
}

/// Flat triple of constant symplectic forms on R^4 with the right rotation
/// action; the momentum components are solved quadratics (a least-squares
/// fit over the quadratic monomial basis is the derivation, not a
/// hard-coded table).
fn e2_hyperkahler() -> ModelConfig {
    let d = 4;
    let mut forms = BTreeMap::new();
    forms.insert(
        "omega".to_string(),
        vector_form(
            2,
            &[
                ("0,1", &["1", "0", "0"]),
                ("2,3", &["1", "0", "0"]),
                ("0,2", &["0", "1", "0"]),
                ("1,3", &["0", "-1", "0"]),
                ("0,3", &["0", "0", "1"]),
                ("1,2", &["0", "0", "1"]),
            ],
        ),
    );
    forms.insert(
        "omega_1".to_string(),
        scalar_form(2, &[("0,1", "1"), ("2,3", "1")]),
    );
    forms.insert(
        "omega_2".to_string(),
        scalar_form(2, &[("0,2", "1"), ("1,3", "-1")]),
    );
    forms.insert(
        "omega_3".to_string(),
        scalar_form(2, &[("0,3", "1"), ("1,2", "1")]),
    );

    // constant 2-form matrices Ω_i and linear action fields ρ_a = A_a x
    let omegas: [[[f64; 4]; 4]; 3] = [
        mat_from_pairs(&[(0, 1, 1.0), (2, 3, 1.0)]),
        mat_from_pairs(&[(0, 2, 1.0), (1, 3, -1.0)]),
        mat_from_pairs(&[(0, 3, 1.0), (1, 2, 1.0)]),
    ];
    let actions: [[[f64; 4]; 4]; 3] = [
        // right multiplication by the three imaginary units on (x0,x1,x2,x3)
        [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ],
        [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ],
        [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ],
    ];
    // μ_i^a solved from d μ = ι_{ρ_a} ω_i
    let mut momentum_coeffs: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (a, act) in actions.iter().enumerate() {
        let mut comps = Vec::new();
        for om in &omegas {
            let beta = |x: &[f64]| -> Vec<f64> {
                // (ι_{Ax} ω)_k = Σ_l (Ax)_l Ω_{lk}
                let ax: Vec<f64> = (0..d)
                    .map(|r| (0..d).map(|c| act[r][c] * x[c]).sum())
                    .collect();
                (0..d)
                    .map(|k| (0..d).map(|l| ax[l] * om[l][k]).sum())
                    .collect()
            };
            let coeffs = fit_quadratic_potential(beta, d, 20260715);
            comps.push(potential_to_source(&coeffs, d));
        }
        momentum_coeffs.insert(format!("|{a}"), comps);
    }
    let momentum = vec![FormConfig {
        degree: None,
        rank: None,
        bidegree: Some([0, 1]),
        coeffs: momentum_coeffs,
    }];

    let anchor: Vec<Vec<String>> = actions
        .iter()
        .map(|act| {
            (0..d)
                .map(|r| {
                    let mut terms = Vec::new();
                    for c in 0..d {
                        if act[r][c] != 0.0 {
                            terms.push(format!("({})*x{c}", act[r][c]));
                        }
                    }
                    if terms.is_empty() {
                        "0".to_string()
                    } else {
                        terms.join(" + ")
                    }
                })
                .collect()
        })
        .collect();
    // [e_a, e_b] = 2 ε_{abc} e_c on the right action frame
    let mut structure = vec![vec![vec!["0".to_string(); 3]; 3]; 3];
    structure[0][1][2] = "2".into();
    structure[1][0][2] = "-2".into();
    structure[1][2][0] = "2".into();
    structure[2][1][0] = "-2".into();
    structure[2][0][1] = "-2".into();
    structure[0][2][1] = "-2".into();

    ModelConfig {
        name: "E2_hyperkahler".into(),
        dim: d,
        bundle: BundleConfig {
            rank: 3,
            connection: None,
        },
        metric: Some(euclid_metric(d)),
        algebroid: Some(AlgebroidConfig {
            rank: 3,
            anchor,
            structure: Some(structure),
            aconn: None,
        }),
        forms,
        momentum,
        plectic: Some(PlecticConfig {
            form: "omega".into(),
            pre_plectic: false,
            own_trivial_bundle: false,
        }),
        theta_triple: Some(["omega_1".into(), "omega_2".into(), "omega_3".into()]),
        zero_base: Some(vec![0.0; 4]),
        ..Default::default()
    }
}

fn mat_from_pairs(pairs: &[(usize, usize, f64)]) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for &(i, j, v) in pairs {
        m[i][j] = v;
        m[j][i] = -v;
    }
    m
}

/// Three-dimensional nilpotent group in global polynomial coordinates with
/// group law (x,y,z)·(x',y',z') = (x+x', y+y', z+z'+x y'). The stored
/// 1-form is the right-invariant structure form; its exterior derivative is
/// the (degenerate) fiber-valued 2-form, and the momentum section is the
/// negated adjoint action paired against the frame.
fn e3_heisenberg() -> ModelConfig {
    let mut forms = BTreeMap::new();
    forms.insert(
        "lambda_r".to_string(),
        vector_form(
            1,
            &[
                ("0", &["1", "0", "-x1"]),
                ("1", &["0", "1", "0"]),
                ("2", &["0", "0", "1"]),
            ],
        ),
    );
    forms.insert(
        "omega".to_string(),
        vector_form(2, &[("0,1", &["0", "0", "1"])]),
    );
    let mut structure = vec![vec![vec!["0".to_string(); 3]; 3]; 3];
    structure[0][1][2] = "1".into();
    structure[1][0][2] = "-1".into();
    ModelConfig {
        name: "E3_heisenberg".into(),
        dim: 3,
        chart_box: Some(vec![[-2.0, 2.0]; 3]),
        bundle: BundleConfig {
            rank: 3,
            connection: None,
        },
        metric: Some(euclid_metric(3)),
        algebroid: Some(AlgebroidConfig {
            rank: 3,
            anchor: vec![
                strings(&["1", "0", "0"]),
                strings(&["0", "1", "x0"]),
                strings(&["0", "0", "1"]),
            ],
            structure: Some(structure),
            aconn: None,
        }),
        forms,
        momentum: vec![mixed_form_cfg(
            0,
            1,
            &[
                ("|0", &["-1", "0", "x1"]),
                ("|1", &["0", "-1", "-x0"]),
                ("|2", &["0", "0", "-1"]),
            ],
        )],
        plectic: Some(PlecticConfig {
            form: "omega".into(),
            pre_plectic: true,
            own_trivial_bundle: false,
        }),
        potential_form: Some("lambda_r".into()),
        mc_form: Some("lambda_r".into()),
        ..Default::default()
    }
}

/// Four-torus with a vector-valued 2-form, a circle action translating the
/// first angle, momentum `θ¹ e₁` and an explicit two-torus quotient where
/// the reduced form vanishes.
fn e4_torus4() -> ModelConfig {
    let mut forms = BTreeMap::new();
    forms.insert(
        "omega".to_string(),
        vector_form(
            2,
            &[
                ("0,1", &["1", "0", "0"]),
                ("1,2", &["0", "1", "0"]),
                ("1,3", &["0", "0", "1"]),
            ],
        ),
    );
    ModelConfig {
        name: "E4_torus4".into(),
        dim: 4,
        periodic: Some(vec![true; 4]),
        bundle: BundleConfig {
            rank: 3,
            connection: None,
        },
        metric: Some(euclid_metric(4)),
        algebroid: Some(AlgebroidConfig {
            rank: 1,
            anchor: vec![strings(&["1", "0", "0", "0"])],
            structure: None,
            aconn: None,
        }),
        forms,
        momentum: vec![mixed_form_cfg(0, 1, &[("|0", &["x1", "0", "0"])])],
        plectic: Some(PlecticConfig {
            form: "omega".into(),
            pre_plectic: false,
            own_trivial_bundle: false,
        }),
        quotient: Some(QuotientConfig {
            dim: 2,
            periodic: Some(vec![true, true]),
            chart_box: None,
            projection: strings(&["x2", "x3"]),
            section: strings(&["0", "0", "x0", "x1"]),
            expected_reduced: Some(FormConfig {
                degree: Some(2),
                rank: None,
                bidegree: None,
                coeffs: BTreeMap::new(), // the reduced form is zero
            }),
        }),
        zero_base: Some(vec![0.5, 0.0, 1.2, 2.0]),
        ..Default::default()
    }
}

/// Rank-1 bundle over the plane with connection form `x0 dx1`: its
/// curvature is the area form, exposed as the plectic form on the induced
/// endomorphism bundle (trivial for rank 1).
fn e5_curvature() -> ModelConfig {
    let mut forms = BTreeMap::new();
    forms.insert("omega".to_string(), scalar_form(2, &[("0,1", "1")]));
    ModelConfig {
        name: "E5_curvature".into(),
        dim: 2,
        bundle: BundleConfig {
            rank: 1,
            connection: Some(vec![vec![strings(&["0", "x0"])]]),
        },
        metric: Some(euclid_metric(2)),
        forms,
        plectic: Some(PlecticConfig {
            form: "omega".into(),
            pre_plectic: false,
            own_trivial_bundle: true,
        }),
        omega_is_curvature: true,
        ..Default::default()
    }
}

/// Total space of Hom(TM, E) over the plane with flat rank-1 E, as a
/// four-dimensional chart (x2, x3 are the fiber coordinates). The stored
/// 1-form pairs the fiber point with the projected tangent vector, and its
/// exterior derivative is the plectic form.
fn e6_tautological() -> ModelConfig {
    let mut forms = BTreeMap::new();
    forms.insert(
        "theta_taut".to_string(),
        scalar_form(1, &[("0", "x2"), ("1", "x3")]),
    );
    forms.insert(
        "omega".to_string(),
        scalar_form(2, &[("0,2", "-1"), ("1,3", "-1")]),
    );
    ModelConfig {
        name: "E6_tautological".into(),
        dim: 4,
        bundle: BundleConfig {
            rank: 1,
            connection: None,
        },
        metric: Some(euclid_metric(4)),
        forms,
        plectic: Some(PlecticConfig {
            form: "omega".into(),
            pre_plectic: false,
            own_trivial_bundle: false,
        }),
        potential_form: Some("theta_taut".into()),
        ..Default::default()
    }
}
