//! INI run configuration.
//!
//! ```ini
//! [surface]
//! kind = ellipsoid
//! semi_axes = 1.0, 0.8, 0.6
//!
//! [basis]
//! family = bspline
//! degree = 0
//!
//! [grid]
//! n = 4
//! refinements = 2
//! ```
//!
//! Every section is optional and falls back to the defaults of
//! [`StudyConfig`]. Unknown sections or keys are rejected so that typos do not
//! silently change a run.

use std::path::{Path, PathBuf};

use ini::Ini;
use layerpot_core::geometry::Vec3;
use layerpot_core::study::{
    BasisFamily, ManufacturedProblem, ProblemKind, StudyConfig, SurfaceSpec,
};
use layerpot_core::{Method, Pairing, Restriction};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key `{key}` in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] {key} = {value:?}: {reason}")]
    BadValue {
        section: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("[{section}] is missing `{key}`")]
    Missing { section: String, key: String },
    #[error("{0}")]
    Invalid(#[from] layerpot_core::Error),
}

/// A parsed configuration: the study definition plus output options.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub study: StudyConfig,
    pub csv_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }
}

impl std::str::FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let doc = Document { ini: &ini };
        doc.check_keys()?;

        let surface = match doc.get("surface", "kind")?.unwrap_or("sphere") {
            "sphere" => SurfaceSpec::Sphere {
                radius: doc.parse_or("surface", "radius", 1.0)?,
            },
            "ellipsoid" => SurfaceSpec::Ellipsoid {
                semi_axes: doc.triple("surface", "semi_axes")?,
            },
            other => return Err(doc.bad("surface", "kind", other, "expected sphere or ellipsoid")),
        };
        surface.atlas()?;
        let mut study = StudyConfig {
            surface,
            ..StudyConfig::default()
        };

        study.family = match doc.get("basis", "family")?.unwrap_or("bspline") {
            "bspline" => BasisFamily::BSpline,
            "lagrange" => BasisFamily::Lagrange,
            other => return Err(doc.bad("basis", "family", other, "expected bspline or lagrange")),
        };
        let default_degree = match study.family {
            BasisFamily::BSpline => 0,
            BasisFamily::Lagrange => 1,
        };
        study.degree = doc.parse_or("basis", "degree", default_degree)?;
        let allowed = match study.family {
            BasisFamily::BSpline => 0..=layerpot_core::bspline::MAX_DEGREE,
            BasisFamily::Lagrange => 1..=layerpot_core::lagrange::MAX_DEGREE,
        };
        if !allowed.contains(&study.degree) {
            return Err(doc.bad(
                "basis",
                "degree",
                &study.degree.to_string(),
                &format!(
                    "supported degrees are {}..={}",
                    allowed.start(),
                    allowed.end()
                ),
            ));
        }

        study.n = doc.parse_or("grid", "n", study.n)?;
        study.k = doc.parse_or("grid", "k", study.n)?;
        let refinements: usize = doc.parse_or("grid", "refinements", study.levels - 1)?;
        study.levels = refinements + 1;
        let min_cells = study.degree.max(1);
        if study.n < min_cells || study.k < min_cells {
            return Err(doc.bad(
                "grid",
                "n",
                &format!("{}x{}", study.n, study.k),
                &format!(
                    "degree {} needs at least {min_cells} cells per direction",
                    study.degree
                ),
            ));
        }

        study.method = match doc.get("method", "kind")?.unwrap_or("galerkin") {
            "galerkin" => Method::Galerkin,
            "collocation" => Method::Collocation,
            other => {
                return Err(doc.bad("method", "kind", other, "expected galerkin or collocation"))
            }
        };
        study.pairing = match doc.get("pairing", "kind")?.unwrap_or("surface") {
            "surface" => Pairing::Surface,
            "parameter" => Pairing::Parameter,
            other => {
                return Err(doc.bad("pairing", "kind", other, "expected surface or parameter"))
            }
        };
        study.restriction = match doc.get("collocation", "restriction")?.unwrap_or("point") {
            "point" => Restriction::Point,
            "min" => Restriction::Min,
            "mean" => Restriction::Mean,
            other => {
                return Err(doc.bad(
                    "collocation",
                    "restriction",
                    other,
                    "expected point, min or mean",
                ))
            }
        };
        study.delta = doc.parse_opt("collocation", "delta")?;
        if let Some(d) = study.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(doc.bad("collocation", "delta", &d.to_string(), "must be positive"));
            }
        }

        let q = &mut study.quad;
        q.regular_order = doc.parse_or("quadrature", "regular_order", q.regular_order)?;
        q.singular_order = doc.parse_or("quadrature", "singular_order", q.singular_order)?;
        q.duffy_order = doc.parse_or("quadrature", "duffy_order", q.duffy_order)?;
        q.subdivision = doc.parse_or("quadrature", "subdivision", q.subdivision)?;
        q.near_factor = doc.parse_or("quadrature", "near_factor", q.near_factor)?;
        layerpot_core::Quadrature::new(study.quad)?;

        study.problem = match doc.get("problem", "kind")?.unwrap_or("constant") {
            "constant" => ProblemKind::Constant {
                value: doc.parse_or("problem", "value", 1.0)?,
            },
            "point_source" => ProblemKind::PointSource {
                source: Vec3(doc.triple("problem", "source_point")?),
            },
            "harmonic" => ProblemKind::Harmonic {
                degree: doc.parse_or("problem", "harmonic_n", 1)?,
            },
            other => {
                return Err(doc.bad(
                    "problem",
                    "kind",
                    other,
                    "expected constant, point_source or harmonic",
                ))
            }
        };
        ManufacturedProblem::new(study.problem, study.surface)?;

        let csv_path = doc.get("output", "csv_path")?.map(PathBuf::from);
        Ok(RunConfig { study, csv_path })
    }
}

const KNOWN: &[(&str, &[&str])] = &[
    ("surface", &["kind", "radius", "semi_axes"]),
    ("basis", &["family", "degree"]),
    ("grid", &["n", "k", "refinements"]),
    ("method", &["kind"]),
    ("pairing", &["kind"]),
    ("collocation", &["restriction", "delta"]),
    (
        "quadrature",
        &[
            "regular_order",
            "singular_order",
            "duffy_order",
            "subdivision",
            "near_factor",
        ],
    ),
    ("problem", &["kind", "value", "source_point", "harmonic_n"]),
    ("output", &["csv_path"]),
];

struct Document<'a> {
    ini: &'a Ini,
}

impl Document<'_> {
    fn check_keys(&self) -> Result<(), ConfigError> {
        for (section, props) in self.ini.iter() {
            let Some(section) = section else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(ConfigError::UnknownKey {
                        section: "<top level>".into(),
                        key: key.into(),
                    });
                }
                continue;
            };
            let Some((_, keys)) = KNOWN.iter().find(|(s, _)| *s == section) else {
                return Err(ConfigError::UnknownSection(section.into()));
            };
            if let Some((key, _)) = props.iter().find(|(k, _)| !keys.contains(k)) {
                return Err(ConfigError::UnknownKey {
                    section: section.into(),
                    key: key.into(),
                });
            }
        }
        Ok(())
    }

    fn get(&self, section: &str, key: &str) -> Result<Option<&str>, ConfigError> {
        Ok(self
            .ini
            .section(Some(section))
            .and_then(|s| s.get(key))
            .map(str::trim))
    }

    fn bad(&self, section: &str, key: &str, value: &str, reason: &str) -> ConfigError {
        ConfigError::BadValue {
            section: section.into(),
            key: key.into(),
            value: value.into(),
            reason: reason.into(),
        }
    }

    fn parse_opt<T>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        match self.get(section, key)? {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e: T::Err| self.bad(section, key, v, &e.to_string())),
        }
    }

    fn parse_or<T>(&self, section: &str, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.parse_opt(section, key)?.unwrap_or(default))
    }

    /// Three numbers separated by commas or whitespace.
    fn triple(&self, section: &str, key: &str) -> Result<[f64; 3], ConfigError> {
        let raw = self
            .get(section, key)?
            .ok_or_else(|| ConfigError::Missing {
                section: section.into(),
                key: key.into(),
            })?;
        let parts: Vec<&str> = raw
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let values: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
        match values {
            Ok(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
            Ok(v) => Err(self.bad(
                section,
                key,
                raw,
                &format!("expected 3 numbers, got {}", v.len()),
            )),
            Err(e) => Err(self.bad(section, key, raw, &e.to_string())),
        }
    }
}
