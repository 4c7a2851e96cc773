//! JSON configuration: serde schema plus validation into core objects.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;

use num::complex::Complex64;
use serde::{Deserialize, Deserializer};
use serde_json::Value;
use splitqm_core::defect_space::DefectVector;
use splitqm_core::groups::{FactorDescriptor, FactorElement, TableGroup};
use splitqm_core::matrix::Matrix;
use splitqm_core::qrep::{CMatrix, FactorQRMap, GElem, MetricGroup, SplitQRep};
use splitqm_core::quasicocycles::{
    rotation_permutation_action, FactorCocycleMap, ModuleAction, SplitQC, Vector,
};
use splitqm_core::quasimorphisms::{FactorQM, SplitQM};
use splitqm_core::rational::{parse_rational, Rational};
use splitqm_core::words::{Side, Splitting};

use crate::error::CliError;

pub const SCHEMA: &str = "splitqm-config/1";

/// A rational written as the string `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Q(pub Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map(Q).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DescriptorDef {
    Integer,
    Cyclic(usize),
    Table {
        mul: Vec<Vec<usize>>,
        inverse: Vec<usize>,
        identity: usize,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingDef {
    pub a: DescriptorDef,
    pub b: DescriptorDef,
}

impl Default for SplittingDef {
    fn default() -> Self {
        SplittingDef {
            a: DescriptorDef::Integer,
            b: DescriptorDef::Integer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerDef {
    pub length_bound: usize,
    pub exponent_bound: u64,
    pub samples: usize,
}

impl Default for SamplerDef {
    fn default() -> Self {
        SamplerDef {
            length_bound: 8,
            exponent_bound: 5,
            samples: 1000,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FactorQMDef {
    pub slope: Option<Q>,
    pub support: Vec<(i64, Q)>,
    pub periodic: Option<Vec<Q>>,
    pub sign: Option<Q>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitQMDef {
    pub a: FactorQMDef,
    pub b: FactorQMDef,
}

/// Dense coordinates, or `[word, coefficient]` pairs in the regular representation.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum VectorDef {
    Dense(Vec<Q>),
    Sparse(Vec<(String, Q)>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionDef {
    Regular {
        p: f64,
    },
    Matrices {
        a: Vec<Vec<Vec<Q>>>,
        b: Vec<Vec<Vec<Q>>>,
    },
    RotationPermutation,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorCocycleDef {
    #[default]
    Zero,
    Support(Vec<(i64, VectorDef)>),
    Inner(VectorDef),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleDef {
    pub action: ActionDef,
    #[serde(default)]
    pub a: FactorCocycleDef,
    #[serde(default)]
    pub b: FactorCocycleDef,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthDef {
    pub action: ActionDef,
    pub vector: VectorDef,
    /// `(p, q)`: growth prime and control prime.
    #[serde(default = "default_primes")]
    pub primes: Vec<(u64, u64)>,
}

fn default_primes() -> Vec<(u64, u64)> {
    vec![(2, 3), (3, 2)]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetDef {
    Circle,
    Unitary(usize),
    CyclicCircular {
        n: usize,
        scale: Q,
    },
    Finite {
        mul: Vec<Vec<usize>>,
        inverse: Vec<usize>,
        identity: usize,
        distance: Vec<Vec<Q>>,
    },
}

/// Target elements are read according to the target: an index for finite
/// targets, an angle `"p/q"` (in units of π) for the circle, rows of
/// `[re, im]` pairs for unitary groups.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum QRMapDef {
    #[default]
    Identity,
    Support {
        values: Vec<(i64, Value)>,
        #[serde(default)]
        sign: Option<Value>,
    },
    Power(Value),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QRepDef {
    pub target: TargetDef,
    #[serde(default)]
    pub a: QRMapDef,
    #[serde(default)]
    pub b: QRMapDef,
    /// Radius of the small-subgroup-free ball used by the witness search.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Homomorphisms to search witnesses against.
    #[serde(default)]
    pub against: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectVectorDef {
    pub carrier: DescriptorDef,
    pub values: Vec<(i64, Q)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionDef {
    /// Vector on `Z/n`, embedded as the subgroup `k·Z/nk`.
    pub sub: String,
    /// Vector on `Z/k`, pulled back along `Z/nk → Z/k`.
    pub quotient: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectSpaceDef {
    pub vectors: BTreeMap<String, DefectVectorDef>,
    pub extensions: Vec<ExtensionDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub splitting: SplittingDef,
    #[serde(default)]
    pub sampler: SamplerDef,
    #[serde(default)]
    pub quasimorphisms: BTreeMap<String, SplitQMDef>,
    #[serde(default)]
    pub cocycles: BTreeMap<String, CocycleDef>,
    #[serde(default)]
    pub growth: Option<GrowthDef>,
    #[serde(default)]
    pub qreps: BTreeMap<String, QRepDef>,
    #[serde(default)]
    pub defect_space: Option<DefectSpaceDef>,
}

#[derive(Debug)]
pub struct Growth {
    pub action: ModuleAction,
    pub vector: Vector,
    pub primes: Vec<(u64, u64)>,
}

#[derive(Debug)]
pub struct QRepEntry {
    pub rep: SplitQRep,
    pub eps: Option<f64>,
    pub against: Vec<String>,
}

#[derive(Debug)]
pub struct Extension {
    pub sub: String,
    pub quotient: String,
}

#[derive(Debug)]
pub struct DefectSpace {
    pub vectors: BTreeMap<String, DefectVector>,
    pub extensions: Vec<Extension>,
}

/// A validated configuration.
#[derive(Debug)]
pub struct Config {
    pub seed: u64,
    pub splitting: Splitting,
    pub sampler: SamplerDef,
    pub quasimorphisms: BTreeMap<String, SplitQM>,
    pub cocycles: BTreeMap<String, SplitQC>,
    pub growth: Option<Growth>,
    pub qreps: BTreeMap<String, QRepEntry>,
    pub defect_space: Option<DefectSpace>,
}

fn at<T, E: Display>(path: &str, r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config {
        path: path.to_string(),
        message: e.to_string(),
    })
}

fn bad<T>(path: &str, message: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config {
        path: path.to_string(),
        message: message.into(),
    })
}

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    build(file)
}

fn descriptor(path: &str, d: DescriptorDef) -> Result<FactorDescriptor, CliError> {
    match d {
        DescriptorDef::Integer => Ok(FactorDescriptor::Integer),
        DescriptorDef::Cyclic(n) => at(path, FactorDescriptor::cyclic(n)),
        DescriptorDef::Table {
            mul,
            inverse,
            identity,
        } => Ok(FactorDescriptor::Table(at(
            path,
            TableGroup::new(mul, inverse, identity),
        )?)),
    }
}

fn element(path: &str, d: &FactorDescriptor, k: i64) -> Result<FactorElement, CliError> {
    let x = match d {
        FactorDescriptor::Integer => FactorElement::int(k),
        _ if k < 0 => {
            return bad(
                path,
                format!("element {k} of {d} must be a nonnegative index"),
            )
        }
        _ => FactorElement::Finite(k as usize),
    };
    at(path, d.validate(&x))?;
    Ok(x)
}

fn factor_qm(path: &str, d: &FactorDescriptor, raw: FactorQMDef) -> Result<FactorQM, CliError> {
    let mut q = FactorQM::zero();
    if let Some(Q(s)) = raw.slope {
        q = q.with_slope(s);
    }
    if let Some(Q(c)) = raw.sign {
        q = q.with_sign(c);
    }
    if let Some(table) = raw.periodic {
        q = at(
            &format!("{path}.periodic"),
            q.with_periodic(table.into_iter().map(|x| x.0).collect()),
        )?;
    }
    let mut support = Vec::with_capacity(raw.support.len());
    for (i, (k, Q(v))) in raw.support.into_iter().enumerate() {
        support.push((element(&format!("{path}.support[{i}]"), d, k)?, v));
    }
    q = at(&format!("{path}.support"), q.with_support(d, support))?;
    at(path, q.validate(d))?;
    Ok(q)
}

fn action(path: &str, s: &Splitting, raw: ActionDef) -> Result<ModuleAction, CliError> {
    match raw {
        ActionDef::Regular { p } => at(path, ModuleAction::regular(s.clone(), p)),
        ActionDef::Matrices { a, b } => {
            let mats = |side: &str, ms: Vec<Vec<Vec<Q>>>| -> Result<Vec<Matrix>, CliError> {
                ms.into_iter()
                    .enumerate()
                    .map(|(i, rows)| {
                        let rows = rows
                            .into_iter()
                            .map(|r| r.into_iter().map(|x| x.0).collect())
                            .collect();
                        at(
                            &format!("{path}.matrices.{side}[{i}]"),
                            Matrix::from_rows(rows),
                        )
                    })
                    .collect()
            };
            let a = mats("a", a)?;
            let b = mats("b", b)?;
            at(path, ModuleAction::finite_dim(s.clone(), a, b))
        }
        ActionDef::RotationPermutation => {
            if *s != Splitting::free() {
                return bad(path, "the rotation/permutation action is defined on Z ∗ Z");
            }
            Ok(rotation_permutation_action())
        }
    }
}

fn vector(path: &str, m: &ModuleAction, raw: VectorDef) -> Result<Vector, CliError> {
    let v = match raw {
        VectorDef::Dense(c) => Vector::dense(c.into_iter().map(|x| x.0).collect()),
        VectorDef::Sparse(entries) => {
            let mut out = Vec::with_capacity(entries.len());
            for (i, (w, Q(c))) in entries.into_iter().enumerate() {
                out.push((
                    at(&format!("{path}[{i}]"), m.splitting().parse_word(&w))?,
                    c,
                ));
            }
            Vector::sparse(out)
        }
    };
    at(path, m.check_vector(&v))?;
    Ok(v)
}

fn factor_cocycle(
    path: &str,
    m: &ModuleAction,
    side: Side,
    raw: FactorCocycleDef,
) -> Result<FactorCocycleMap, CliError> {
    let d = m.splitting().factor(side).clone();
    let f = match raw {
        FactorCocycleDef::Zero => FactorCocycleMap::zero(),
        FactorCocycleDef::Inner(v) => {
            FactorCocycleMap::Inner(vector(&format!("{path}.inner"), m, v)?)
        }
        FactorCocycleDef::Support(entries) => {
            let mut values = Vec::with_capacity(entries.len());
            for (i, (k, v)) in entries.into_iter().enumerate() {
                let p = format!("{path}.support[{i}]");
                values.push((element(&p, &d, k)?, vector(&p, m, v)?));
            }
            at(path, FactorCocycleMap::from_values(m, side, values))?
        }
    };
    at(path, f.validate(m, side))?;
    Ok(f)
}

fn target(path: &str, raw: TargetDef) -> Result<MetricGroup, CliError> {
    match raw {
        TargetDef::Circle => Ok(MetricGroup::Circle),
        TargetDef::Unitary(0) => bad(path, "unitary dimension must be positive"),
        TargetDef::Unitary(n) => Ok(MetricGroup::Unitary(n)),
        TargetDef::CyclicCircular { n, scale } => {
            at(path, MetricGroup::cyclic_circular(n, scale.0))
        }
        TargetDef::Finite {
            mul,
            inverse,
            identity,
            distance,
        } => {
            let table = at(path, TableGroup::new(mul, inverse, identity))?;
            let dist = distance
                .into_iter()
                .map(|r| r.into_iter().map(|x| x.0).collect())
                .collect();
            at(path, MetricGroup::finite(table, dist))
        }
    }
}

fn gelem(path: &str, t: &MetricGroup, v: &Value) -> Result<GElem, CliError> {
    let x = match t {
        MetricGroup::FiniteMetric { .. } => match v.as_u64() {
            Some(i) => GElem::Finite(i as usize),
            None => return bad(path, format!("expected an element index, got {v}")),
        },
        MetricGroup::Circle => match v.as_str() {
            Some(s) => GElem::angle(at(path, parse_rational(s))?),
            None => {
                return bad(
                    path,
                    format!("expected an angle \"p/q\" in units of π, got {v}"),
                )
            }
        },
        MetricGroup::Unitary(_) => {
            let rows: Vec<Vec<[f64; 2]>> = at(path, serde_json::from_value(v.clone()))?;
            let rows = rows
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|[re, im]| Complex64::new(re, im))
                        .collect()
                })
                .collect();
            GElem::Unitary(at(path, CMatrix::from_rows(rows))?)
        }
    };
    at(path, t.validate(&x))?;
    Ok(x)
}

fn qr_map(
    path: &str,
    d: &FactorDescriptor,
    t: &MetricGroup,
    raw: QRMapDef,
) -> Result<FactorQRMap, CliError> {
    let mu = match raw {
        QRMapDef::Identity => FactorQRMap::identity(),
        QRMapDef::Power(v) => FactorQRMap::power(gelem(&format!("{path}.power"), t, &v)?),
        QRMapDef::Support { values, sign } => {
            let mut pairs = Vec::with_capacity(values.len());
            for (i, (k, v)) in values.iter().enumerate() {
                let p = format!("{path}.support.values[{i}]");
                pairs.push((element(&p, d, *k)?, gelem(&p, t, v)?));
            }
            let mut mu = at(path, FactorQRMap::from_values(d, t, pairs))?;
            if let Some(s) = sign {
                mu = mu.with_sign(gelem(&format!("{path}.support.sign"), t, &s)?);
            }
            mu
        }
    };
    at(path, mu.validate(d, t))?;
    Ok(mu)
}

fn build(file: ConfigFile) -> Result<Config, CliError> {
    if file.schema != SCHEMA {
        return bad(
            "schema",
            format!("expected \"{SCHEMA}\", got \"{}\"", file.schema),
        );
    }
    let a = descriptor("splitting.a", file.splitting.a)?;
    let b = descriptor("splitting.b", file.splitting.b)?;
    let splitting = at("splitting", Splitting::new(a, b))?;

    let mut quasimorphisms = BTreeMap::new();
    for (name, raw) in file.quasimorphisms {
        let p = format!("quasimorphisms.{name}");
        let fa = factor_qm(&format!("{p}.a"), &splitting.a, raw.a)?;
        let fb = factor_qm(&format!("{p}.b"), &splitting.b, raw.b)?;
        quasimorphisms.insert(name, at(&p, SplitQM::new(splitting.clone(), fa, fb))?);
    }

    let mut cocycles = BTreeMap::new();
    for (name, raw) in file.cocycles {
        let p = format!("cocycles.{name}");
        let m = action(&format!("{p}.action"), &splitting, raw.action)?;
        let fa = factor_cocycle(&format!("{p}.a"), &m, Side::A, raw.a)?;
        let fb = factor_cocycle(&format!("{p}.b"), &m, Side::B, raw.b)?;
        cocycles.insert(name, at(&p, SplitQC::new(m, fa, fb))?);
    }

    let growth = match file.growth {
        None => None,
        Some(g) => {
            let m = action("growth.action", &splitting, g.action)?;
            let v = vector("growth.vector", &m, g.vector)?;
            Some(Growth {
                action: m,
                vector: v,
                primes: g.primes,
            })
        }
    };

    let mut qreps = BTreeMap::new();
    for (name, raw) in file.qreps {
        let p = format!("qreps.{name}");
        let t = target(&format!("{p}.target"), raw.target)?;
        let mu_a = qr_map(&format!("{p}.a"), &splitting.a, &t, raw.a)?;
        let mu_b = qr_map(&format!("{p}.b"), &splitting.b, &t, raw.b)?;
        let rep = at(&p, SplitQRep::new(splitting.clone(), t, mu_a, mu_b))?;
        qreps.insert(
            name,
            QRepEntry {
                rep,
                eps: raw.eps,
                against: raw.against,
            },
        );
    }
    for (name, e) in &qreps {
        for (i, other) in e.against.iter().enumerate() {
            let p = format!("qreps.{name}.against[{i}]");
            let Some(rho) = qreps.get(other) else {
                return bad(&p, format!("unknown representation `{other}`"));
            };
            if rho.rep.target != e.rep.target {
                return bad(&p, format!("`{other}` has a different target"));
            }
            if !rho.rep.is_homomorphism() {
                return bad(&p, format!("`{other}` is not a homomorphism"));
            }
        }
    }

    let defect_space = match file.defect_space {
        None => None,
        Some(raw) => {
            let mut vectors = BTreeMap::new();
            for (name, v) in raw.vectors {
                let p = format!("defect_space.vectors.{name}");
                let d = descriptor(&format!("{p}.carrier"), v.carrier)?;
                if !d.is_finite() {
                    return bad(&p, "the carrier must be finite");
                }
                let mut pairs = Vec::with_capacity(v.values.len());
                for (i, (k, Q(x))) in v.values.into_iter().enumerate() {
                    pairs.push((element(&format!("{p}.values[{i}]"), &d, k)?, x));
                }
                vectors.insert(name, at(&p, DefectVector::from_support(d, pairs))?);
            }
            let mut extensions = Vec::with_capacity(raw.extensions.len());
            for (i, e) in raw.extensions.into_iter().enumerate() {
                let p = format!("defect_space.extensions[{i}]");
                for n in [&e.sub, &e.quotient] {
                    match vectors.get(n).map(|v| v.carrier()) {
                        Some(FactorDescriptor::Cyclic(_)) => {}
                        Some(_) => return bad(&p, format!("`{n}` must live on a cyclic group")),
                        None => return bad(&p, format!("unknown vector `{n}`")),
                    }
                }
                extensions.push(Extension {
                    sub: e.sub,
                    quotient: e.quotient,
                });
            }
            Some(DefectSpace {
                vectors,
                extensions,
            })
        }
    };

    Ok(Config {
        seed: file.seed,
        splitting,
        sampler: file.sampler,
        quasimorphisms,
        cocycles,
        growth,
        qreps,
        defect_space,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_defaults_to_free_group() {
        let c = parse(r#"{"schema": "splitqm-config/1"}"#).unwrap();
        assert_eq!(c.splitting, Splitting::free());
        assert_eq!(c.sampler, SamplerDef::default());
    }

    #[test]
    fn errors_carry_paths() {
        let err = parse(
            r#"{"schema": "splitqm-config/1", "quasimorphisms": {"f": {"a": {"slope": "1/0"}}}}"#,
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("quasimorphisms.f.a.slope"),
            "{err}"
        );
        let err = parse(
            r#"{"schema": "splitqm-config/1", "splitting": {"a": {"cyclic": 5}, "b": "integer"},
                "quasimorphisms": {"f": {"a": {"support": [[7, "1"]]}}}}"#,
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("quasimorphisms.f.a.support[0]"),
            "{err}"
        );
    }

    #[test]
    fn non_alternating_support_rejected() {
        let err = parse(r#"{"schema": "splitqm-config/1", "quasimorphisms": {"f": {"a": {"support": [[1, "1"], [-1, "1"]]}}}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("quasimorphisms.f.a"), "{err}");
    }

    #[test]
    fn wrong_schema_rejected() {
        assert!(parse(r#"{"schema": "splitqm-config/0"}"#).is_err());
    }
}
