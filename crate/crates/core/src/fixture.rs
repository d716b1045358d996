//! TOML fixture files.
//!
//! ```toml
//! schema = 1
//! name = "two-mode"
//! description = "..."
//!
//! [fock]
//! cutoff = 10
//!
//! [support]
//! r = 4.0
//! r_prime = 1.0
//! candidates = [[0, 0], [1, 0]]        # optional, defaults to the propagator domain
//!
//! [orbit]
//! plus = [[0, 0], [1, 0]]              # (n, 2l)
//! minus = [[0, 0], [-1, 0]]
//! default_u = true                     # elementary u set; otherwise list u entries
//! u = [[1, 1, 0, 0, 0, 1.0, 0.0]]      # (s, n, 2l, 2i, 2j, re, im)
//!
//! [propagator]
//! entries = [[0, 0, 0, 1.0]]           # (n, 2l, 2j, Δ); parity partners are filled in
//!
//! [harmonics]
//! n_max = 1
//! two_l_max = 2
//!
//! [[nu]]
//! name = "a"
//! real = true
//! entries = [[0, 0, 0, 0, 0.4, 0.0]]   # (n, 2l, 2i, 2j, re, im)
//! ```
//!
//! Loading validates shapes, index parity, propagator parity, the reality
//! flag of every field, the Hermiticity of the field built from `u`, and the
//! support rule. Emission is canonical, so load followed by emit reproduces
//! an emitted file byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fockspace::{check_field_reality, FockContext, OrbitSpec};
use crate::harmonics::BandLimit;
use crate::modes::{AdmissibleSupport, CoefficientField, Mode, PropagatorSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const BASIS_WARN: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
}

impl Num {
    pub fn value(&self) -> f64 {
        match self {
            Num::Int(i) => *i as f64,
            Num::Float(x) => *x,
        }
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num::Float(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFock {
    pub cutoff: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSupport {
    pub r: f64,
    pub r_prime: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<(i32, u32)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOrbit {
    pub plus: Vec<(i32, u32)>,
    pub minus: Vec<(i32, u32)>,
    #[serde(default)]
    pub default_u: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub u: Vec<(usize, i32, u32, i32, i32, Num, Num)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPropagator {
    pub entries: Vec<(i32, u32, i32, Num)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHarmonics {
    pub n_max: i32,
    pub two_l_max: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNu {
    pub name: String,
    pub real: bool,
    pub entries: Vec<(i32, u32, i32, i32, Num, Num)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFixture {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub fock: RawFock,
    pub support: RawSupport,
    pub orbit: RawOrbit,
    pub propagator: RawPropagator,
    #[serde(default = "default_harmonics")]
    pub harmonics: RawHarmonics,
    #[serde(default)]
    pub nu: Vec<RawNu>,
}

fn default_harmonics() -> RawHarmonics {
    RawHarmonics { n_max: 1, two_l_max: 2 }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedField {
    pub name: String,
    pub field: CoefficientField,
}

/// A validated fixture.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub orbit: OrbitSpec,
    pub propagator: PropagatorSpec,
    pub support: AdmissibleSupport,
    pub nus: Vec<NamedField>,
    pub cutoff: u32,
    pub band: BandLimit,
    pub raw: RawFixture,
}

fn mode(n: i32, two_l: u32) -> Mode {
    Mode::new(n, two_l)
}

fn check_index(m: Mode, two: i32, what: &str, at: &str) -> Result<usize> {
    m.index_of(two).ok_or_else(|| {
        Error::Validation(format!("{at}: {what}={two} is not a valid doubled index for {m}"))
    })
}

impl Fixture {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawFixture = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_raw(raw: RawFixture) -> Result<Self> {
        if raw.schema != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "schema: version {} is not supported (expected {SCHEMA_VERSION})",
                raw.schema
            )));
        }

        let mut diag: BTreeMap<Mode, Vec<Option<f64>>> = BTreeMap::new();
        for (k, &(n, two_l, two_j, v)) in raw.propagator.entries.iter().enumerate() {
            let m = mode(n, two_l);
            let at = format!("propagator.entries[{k}]");
            let j = check_index(m, two_j, "2j", &at)?;
            let slot = &mut diag.entry(m).or_insert_with(|| vec![None; m.dim()])[j];
            if slot.is_some() {
                return Err(Error::Validation(format!("{at}: duplicate value for {m}, 2j={two_j}")));
            }
            *slot = Some(v.value());
        }
        let mut full = BTreeMap::new();
        for (m, v) in diag {
            let vals: Option<Vec<f64>> = v.iter().copied().collect();
            let vals = vals.ok_or_else(|| {
                Error::Validation(format!("propagator: mode {m} is missing some 2j values"))
            })?;
            full.insert(m, vals);
        }
        let propagator = PropagatorSpec::with_parity_completion(full)
            .map_err(|e| Error::Validation(format!("propagator: {e}")))?;

        let plus: BTreeSet<Mode> = raw.orbit.plus.iter().map(|&(n, l)| mode(n, l)).collect();
        let minus: BTreeSet<Mode> = raw.orbit.minus.iter().map(|&(n, l)| mode(n, l)).collect();
        let orbit = if raw.orbit.default_u {
            if !raw.orbit.u.is_empty() {
                return Err(Error::Validation("orbit: default_u = true conflicts with explicit u entries".into()));
            }
            let mut o = OrbitSpec::default_for(plus.iter().copied());
            o.minus = minus;
            o
        } else {
            let mut u: BTreeMap<(usize, Mode), Array2<C64>> = BTreeMap::new();
            for (k, &(s, n, two_l, two_i, two_j, re, im)) in raw.orbit.u.iter().enumerate() {
                let m = mode(n, two_l);
                let at = format!("orbit.u[{k}]");
                let r = check_index(m, two_i, "2i", &at)?;
                let c = check_index(m, two_j, "2j", &at)?;
                u.entry((s, m)).or_insert_with(|| Array2::zeros((m.dim(), m.dim())))[[r, c]] +=
                    C64::new(re.value(), im.value());
            }
            OrbitSpec::new(plus, minus, u).map_err(|e| Error::Validation(format!("orbit: {e}")))?
        };
        let probe = FockContext::from_orbit(&orbit, 1)?;
        check_field_reality(&orbit, &probe, 1e-12).map_err(|e| Error::Validation(format!("orbit: {e}")))?;

        let candidates: Vec<Mode> = match &raw.support.candidates {
            Some(c) => c.iter().map(|&(n, l)| mode(n, l)).collect(),
            None => propagator.domain().into_iter().collect(),
        };
        let support = AdmissibleSupport::from_rule(
            candidates,
            &orbit.all_modes(),
            &propagator,
            raw.support.r,
            raw.support.r_prime,
        )
        .map_err(|e| Error::Validation(format!("support: {e}")))?;

        let mut nus = Vec::new();
        let mut names = BTreeSet::new();
        for (k, rn) in raw.nu.iter().enumerate() {
            let at = format!("nu[{k}] '{}'", rn.name);
            if !names.insert(rn.name.clone()) {
                return Err(Error::Validation(format!("{at}: duplicate field name")));
            }
            let mut items = Vec::new();
            for (e, &(n, two_l, two_i, two_j, re, im)) in rn.entries.iter().enumerate() {
                let m = mode(n, two_l);
                let where_ = format!("{at} entry {e}");
                check_index(m, two_i, "2i", &where_)?;
                check_index(m, two_j, "2j", &where_)?;
                items.push((m, two_i, two_j, C64::new(re.value(), im.value())));
            }
            let mut field = CoefficientField::from_sparse(items)?;
            if rn.real {
                field = field.mark_real(1e-12).map_err(|e| Error::Validation(format!("{at}: {e}")))?;
            }
            support.check_field(&field).map_err(|e| Error::Validation(format!("{at}: {e}")))?;
            for m in field.support() {
                if propagator.get(&m).is_none() {
                    return Err(Error::Validation(format!("{at}: no propagator given at {m}")));
                }
            }
            nus.push(NamedField { name: rn.name.clone(), field });
        }

        let band = BandLimit { n_max: raw.harmonics.n_max, two_l_max: raw.harmonics.two_l_max };
        if band.n_max < 0 {
            return Err(Error::Validation("harmonics.n_max must be nonnegative".into()));
        }
        Ok(Self {
            name: raw.name.clone(),
            orbit,
            propagator,
            support,
            nus,
            cutoff: raw.fock.cutoff,
            band,
            raw,
        })
    }

    /// Canonical text of the fixture.
    pub fn to_toml(&self) -> String {
        emit(&self.raw)
    }

    /// SHA-256 of the canonical text.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn fock_context(&self, cutoff: Option<u32>) -> Result<FockContext> {
        FockContext::from_orbit(&self.orbit, cutoff.unwrap_or(self.cutoff))
    }

    pub fn predicted_basis(&self, cutoff: Option<u32>) -> Option<usize> {
        FockContext::predicted_dim(self.orbit.labels().len(), cutoff.unwrap_or(self.cutoff))
    }
}

pub fn emit(raw: &RawFixture) -> String {
    toml::to_string(raw).expect("fixture serializes")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Template {
    MassiveScalarSmall,
    TwoMode,
    HalfIntegerL,
}

impl Template {
    pub const ALL: [Template; 3] = [Template::MassiveScalarSmall, Template::TwoMode, Template::HalfIntegerL];

    pub fn name(&self) -> &'static str {
        match self {
            Template::MassiveScalarSmall => "massive-scalar-small",
            Template::TwoMode => "two-mode",
            Template::HalfIntegerL => "halfinteger-l",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|t| t.name()).collect();
            Error::Validation(format!("unknown template '{name}'; available: {}", names.join(", ")))
        })
    }

    pub fn raw(&self) -> RawFixture {
        match self {
            Template::MassiveScalarSmall => massive_scalar_small(),
            Template::TwoMode => two_mode(),
            Template::HalfIntegerL => halfinteger_l(),
        }
    }

    pub fn text(&self) -> String {
        emit(&self.raw())
    }

    pub fn fixture(&self) -> Fixture {
        Fixture::from_raw(self.raw()).expect("templates validate")
    }

    /// The template with `plus` as the positive orbit, `minus` its parity
    /// partners and the default u set. Missing propagator entries get
    /// `1/ω`; fields that no longer fit the support are dropped.
    pub fn with_orbit(&self, plus: &[Mode]) -> Result<RawFixture> {
        if plus.is_empty() {
            return Err(Error::Validation("orbit needs at least one mode".into()));
        }
        let mut raw = self.raw();
        raw.orbit = RawOrbit {
            plus: plus.iter().map(|m| (m.n, m.two_l)).collect(),
            minus: plus.iter().map(|m| (-m.n, m.two_l)).collect(),
            default_u: true,
            u: vec![],
        };
        let present: BTreeSet<Mode> = raw.propagator.entries.iter().map(|e| mode(e.0, e.1)).collect();
        let extra: Vec<Mode> = plus.iter().map(Mode::canonical).filter(|m| !present.contains(m)).collect();
        raw.propagator.entries.extend(inverse_eigenvalue_propagator(&extra).entries);
        let nus = std::mem::take(&mut raw.nu);
        for nu in nus {
            let mut probe = raw.clone();
            probe.nu = vec![nu.clone()];
            if Fixture::from_raw(probe).is_ok() {
                raw.nu.push(nu);
            }
        }
        Fixture::from_raw(raw.clone())?;
        Ok(raw)
    }
}

/// `Δ(m)_{jj} = 1/ω(m)` for every `j`, which lies inside `[ω⁻⁴, ω²]`.
fn inverse_eigenvalue_propagator(modes: &[Mode]) -> RawPropagator {
    let mut entries = Vec::new();
    for m in modes {
        for idx in 0..m.dim() {
            entries.push((m.n, m.two_l, m.two_index(idx), Num::Float(1.0 / m.eigenvalue())));
        }
    }
    RawPropagator { entries }
}

fn nu(name: &str, entries: &[(i32, u32, i32, i32, f64, f64)]) -> RawNu {
    RawNu {
        name: name.into(),
        real: true,
        entries: entries.iter().map(|&(n, l, i, j, re, im)| (n, l, i, j, Num::Float(re), Num::Float(im))).collect(),
    }
}

fn massive_scalar_small() -> RawFixture {
    let modes = [
        Mode::new(0, 0),
        Mode::new(1, 0),
        Mode::new(2, 0),
        Mode::new(0, 1),
        Mode::new(1, 1),
        Mode::new(0, 2),
    ];
    RawFixture {
        schema: SCHEMA_VERSION,
        name: "massive-scalar-small".into(),
        description: "Propagator 1/ω on low modes; orbit {(0,0), (±1,0)} with the elementary u set.".into(),
        fock: RawFock { cutoff: 10 },
        support: RawSupport { r: 4.0, r_prime: 1.0, candidates: None },
        orbit: RawOrbit { plus: vec![(0, 0), (1, 0)], minus: vec![(0, 0), (-1, 0)], default_u: true, u: vec![] },
        propagator: inverse_eigenvalue_propagator(&modes),
        harmonics: default_harmonics(),
        nu: vec![
            nu("zero-mode", &[(0, 0, 0, 0, 0.4, 0.0)]),
            nu("orbit-pair", &[(0, 0, 0, 0, 0.3, 0.0), (1, 0, 0, 0, 0.2, 0.15), (-1, 0, 0, 0, 0.2, -0.15)]),
            nu(
                "mixed",
                &[
                    (1, 0, 0, 0, 0.1, -0.2),
                    (-1, 0, 0, 0, 0.1, 0.2),
                    (0, 2, 2, 0, 0.1, 0.05),
                    (0, 2, -2, 0, 0.1, -0.05),
                    (0, 2, 0, 0, 0.2, 0.0),
                    (1, 1, 1, -1, 0.1, 0.1),
                    (-1, 1, -1, 1, 0.1, -0.1),
                ],
            ),
        ],
    }
}

fn two_mode() -> RawFixture {
    let modes = [Mode::new(0, 0), Mode::new(1, 0)];
    RawFixture {
        schema: SCHEMA_VERSION,
        name: "two-mode".into(),
        description: "Two scalar modes, two Fock labels.".into(),
        fock: RawFock { cutoff: 10 },
        support: RawSupport { r: 4.0, r_prime: 1.0, candidates: None },
        orbit: RawOrbit { plus: vec![(0, 0), (1, 0)], minus: vec![(0, 0), (-1, 0)], default_u: true, u: vec![] },
        propagator: inverse_eigenvalue_propagator(&modes),
        harmonics: RawHarmonics { n_max: 1, two_l_max: 1 },
        nu: vec![nu("pair", &[(0, 0, 0, 0, 0.25, 0.0), (1, 0, 0, 0, 0.15, -0.1), (-1, 0, 0, 0, 0.15, 0.1)])],
    }
}

fn halfinteger_l() -> RawFixture {
    let modes = [Mode::new(1, 1), Mode::new(0, 1), Mode::new(0, 0)];
    RawFixture {
        schema: SCHEMA_VERSION,
        name: "halfinteger-l".into(),
        description: "Weight 1/2 orbit {(±1,1/2)} with four u matrices per mode.".into(),
        fock: RawFock { cutoff: 4 },
        support: RawSupport { r: 4.0, r_prime: 1.0, candidates: None },
        orbit: RawOrbit { plus: vec![(1, 1)], minus: vec![(-1, 1)], default_u: true, u: vec![] },
        propagator: inverse_eigenvalue_propagator(&modes),
        harmonics: RawHarmonics { n_max: 1, two_l_max: 3 },
        nu: vec![nu(
            "spinor",
            &[
                (1, 1, 1, 1, 0.1, 0.05),
                (-1, 1, -1, -1, 0.1, -0.05),
                (1, 1, -1, 1, -0.05, 0.1),
                (-1, 1, 1, -1, -0.05, -0.1),
                (0, 1, 1, -1, 0.08, 0.02),
                (0, 1, -1, 1, 0.08, -0.02),
            ],
        )],
    }
}
