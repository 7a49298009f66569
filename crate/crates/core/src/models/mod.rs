//! MC-ARFIMA model specifications.
//!
//! Each series is the weighted sum of two filtered innovation streams:
//! `x` draws on innovation slots 1 and 2, `y` on slots 3 and 4. Dependence
//! between `x` and `y` enters only through the contemporaneous innovation
//! covariances.

mod simulate;
mod theory;

use serde::{Deserialize, Serialize};

pub use simulate::{simulate, BivariateSeries, Simulator};
pub use theory::{
    ccf_truncation_bound, cross_spectrum, theoretical_ccf, theoretical_exponents, ExponentReport,
    TheoreticalCcf, DEFAULT_CCF_TRUNCATION,
};

use crate::error::{Error, Result};
use crate::fir::{ar1_weights, ma_weights, WeightVector};
use crate::innovations::CovarianceSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentKind {
    /// ARFIMA(0, d, 0)
    Fractional(f64),
    /// AR(1) with coefficient θ
    Ar1(f64),
    White,
}

impl ComponentKind {
    /// Hurst exponent of the component on its own; short memory counts as 0.5.
    pub fn hurst(&self) -> f64 {
        match *self {
            ComponentKind::Fractional(d) => 0.5 + d,
            ComponentKind::Ar1(_) | ComponentKind::White => 0.5,
        }
    }

    /// Memory parameter `d` (zero for short-memory kinds).
    pub fn memory(&self) -> f64 {
        match *self {
            ComponentKind::Fractional(d) => d,
            _ => 0.0,
        }
    }

    pub fn weights(&self, truncation: usize) -> Result<WeightVector> {
        match *self {
            ComponentKind::Fractional(d) => ma_weights(d, truncation),
            ComponentKind::Ar1(theta) => ar1_weights(theta, truncation),
            ComponentKind::White => Ok(WeightVector::white()),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ComponentKind::Fractional(d) if !d.is_finite() || !(0.0..0.5).contains(&d) => Err(
                Error::InvalidParameter(format!("fractional d must lie in [0, 0.5), got {d}")),
            ),
            ComponentKind::Ar1(theta) if !theta.is_finite() || theta.abs() >= 1.0 => Err(
                Error::InvalidParameter(format!("AR(1) theta must satisfy |theta| < 1, got {theta}")),
            ),
            _ => Ok(()),
        }
    }
}

/// One additive term of a series: a filtered innovation stream times a
/// mixing weight (α, β, γ or δ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComponentDoc", into = "ComponentDoc")]
pub struct ComponentSpec {
    pub kind: ComponentKind,
    pub weight: f64,
}

impl ComponentSpec {
    pub fn fractional(d: f64, weight: f64) -> Self {
        Self {
            kind: ComponentKind::Fractional(d),
            weight,
        }
    }

    pub fn ar1(theta: f64, weight: f64) -> Self {
        Self {
            kind: ComponentKind::Ar1(theta),
            weight,
        }
    }

    pub fn white(weight: f64) -> Self {
        Self {
            kind: ComponentKind::White,
            weight,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.weight.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "component weight must be finite, got {}",
                self.weight
            )));
        }
        self.kind.validate()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<f64>,
    weight: f64,
}

impl TryFrom<ComponentDoc> for ComponentSpec {
    type Error = String;

    fn try_from(doc: ComponentDoc) -> std::result::Result<Self, String> {
        let kind = match (doc.kind.as_str(), doc.param) {
            ("fractional" | "arfima", Some(d)) => ComponentKind::Fractional(d),
            ("ar1", Some(theta)) => ComponentKind::Ar1(theta),
            ("white", None) => ComponentKind::White,
            ("white", Some(_)) => return Err("white component takes no `param`".into()),
            ("fractional" | "arfima" | "ar1", None) => {
                return Err(format!("component kind `{}` requires `param`", doc.kind))
            }
            (other, _) => {
                return Err(format!(
                    "unknown component kind `{other}` (expected fractional, ar1 or white)"
                ))
            }
        };
        let spec = ComponentSpec {
            kind,
            weight: doc.weight,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl From<ComponentSpec> for ComponentDoc {
    fn from(spec: ComponentSpec) -> Self {
        let (kind, param) = match spec.kind {
            ComponentKind::Fractional(d) => ("fractional", Some(d)),
            ComponentKind::Ar1(theta) => ("ar1", Some(theta)),
            ComponentKind::White => ("white", None),
        };
        ComponentDoc {
            kind: kind.to_string(),
            param,
            weight: spec.weight,
        }
    }
}

/// Covariance section of a model document: variances plus `sIJ` entries
/// for 1-based slot pairs, absent entries meaning zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CovarianceDoc {
    variances: [f64; 4],
    #[serde(default)]
    s12: f64,
    #[serde(default)]
    s13: f64,
    #[serde(default)]
    s14: f64,
    #[serde(default)]
    s23: f64,
    #[serde(default)]
    s24: f64,
    #[serde(default)]
    s34: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    x: Vec<ComponentSpec>,
    y: Vec<ComponentSpec>,
    covariance: CovarianceDoc,
}

/// `x = w1 f1(ε1) + w2 f2(ε2)`, `y = w3 f3(ε3) + w4 f4(ε4)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct ModelSpec {
    pub x: [ComponentSpec; 2],
    pub y: [ComponentSpec; 2],
    pub covariance: CovarianceSpec,
}

impl TryFrom<ModelDoc> for ModelSpec {
    type Error = String;

    fn try_from(doc: ModelDoc) -> std::result::Result<Self, String> {
        let x: [ComponentSpec; 2] = doc
            .x
            .try_into()
            .map_err(|v: Vec<_>| format!("`x` needs exactly 2 components, got {}", v.len()))?;
        let y: [ComponentSpec; 2] = doc
            .y
            .try_into()
            .map_err(|v: Vec<_>| format!("`y` needs exactly 2 components, got {}", v.len()))?;
        let c = doc.covariance;
        let covariance = CovarianceSpec::new(c.variances)
            .with_covariance(0, 1, c.s12)
            .with_covariance(0, 2, c.s13)
            .with_covariance(0, 3, c.s14)
            .with_covariance(1, 2, c.s23)
            .with_covariance(1, 3, c.s24)
            .with_covariance(2, 3, c.s34);
        let model = ModelSpec { x, y, covariance };
        model.validate().map_err(|e| e.to_string())?;
        Ok(model)
    }
}

impl From<ModelSpec> for ModelDoc {
    fn from(model: ModelSpec) -> Self {
        let c = &model.covariance;
        ModelDoc {
            x: model.x.to_vec(),
            y: model.y.to_vec(),
            covariance: CovarianceDoc {
                variances: std::array::from_fn(|i| c.variance(i)),
                s12: c.covariance(0, 1),
                s13: c.covariance(0, 2),
                s14: c.covariance(0, 3),
                s23: c.covariance(1, 2),
                s24: c.covariance(1, 3),
                s34: c.covariance(2, 3),
            },
        }
    }
}

/// The σ²_i = 1, σ_23 = 0.9 innovation structure shared by the presets.
fn preset_covariance() -> CovarianceSpec {
    CovarianceSpec::identity().with_covariance(1, 2, 0.9)
}

impl ModelSpec {
    /// Components in slot order 1..4.
    pub fn components(&self) -> [ComponentSpec; 4] {
        [self.x[0], self.x[1], self.y[0], self.y[1]]
    }

    pub fn validate(&self) -> Result<()> {
        for c in self.components() {
            c.validate()?;
        }
        self.covariance.validate()?;
        Ok(())
    }

    pub fn is_all_fractional(&self) -> bool {
        self.components()
            .iter()
            .all(|c| matches!(c.kind, ComponentKind::Fractional(_)))
    }

    /// The same model with the roles of `x` and `y` exchanged.
    pub fn swapped(&self) -> Self {
        let c = &self.covariance;
        let perm = [2, 3, 0, 1];
        let mut cov = CovarianceSpec::new(std::array::from_fn(|i| c.variance(perm[i])));
        for i in 0..4 {
            for j in (i + 1)..4 {
                cov = cov.with_covariance(i, j, c.covariance(perm[i], perm[j]));
            }
        }
        Self {
            x: self.y,
            y: self.x,
            covariance: cov,
        }
    }

    /// Four-ARFIMA model: α=δ=0.2, β=γ=1, d = (0.4, 0.3, 0.3, 0.4).
    pub fn model1() -> Self {
        Self {
            x: [
                ComponentSpec::fractional(0.4, 0.2),
                ComponentSpec::fractional(0.3, 1.0),
            ],
            y: [
                ComponentSpec::fractional(0.3, 1.0),
                ComponentSpec::fractional(0.4, 0.2),
            ],
            covariance: preset_covariance(),
        }
    }

    /// ARFIMA(0.4) mixed with AR(1), θ = 0.8, unit weights.
    pub fn model2() -> Self {
        Self {
            x: [
                ComponentSpec::fractional(0.4, 1.0),
                ComponentSpec::ar1(0.8, 1.0),
            ],
            y: [
                ComponentSpec::ar1(0.8, 1.0),
                ComponentSpec::fractional(0.4, 1.0),
            ],
            covariance: preset_covariance(),
        }
    }

    /// ARFIMA(0.4) plus white noise, unit weights.
    pub fn model3() -> Self {
        Self {
            x: [
                ComponentSpec::fractional(0.4, 1.0),
                ComponentSpec::white(1.0),
            ],
            y: [
                ComponentSpec::white(1.0),
                ComponentSpec::fractional(0.4, 1.0),
            ],
            covariance: preset_covariance(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "model1" => Some(Self::model1()),
            "model2" => Some(Self::model2()),
            "model3" => Some(Self::model3()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model1_parameters() {
        let m = ModelSpec::model1();
        let ds: Vec<f64> = m.components().iter().map(|c| c.kind.memory()).collect();
        assert_eq!(ds, vec![0.4, 0.3, 0.3, 0.4]);
        let ws: Vec<f64> = m.components().iter().map(|c| c.weight).collect();
        assert_eq!(ws, vec![0.2, 1.0, 1.0, 0.2]);
        assert_eq!(m.covariance.covariance(1, 2), 0.9);
        assert_eq!(m.covariance.covariance(0, 3), 0.0);
        assert!(m.is_all_fractional());
    }

    #[test]
    fn model2_and_model3_shapes() {
        let m2 = ModelSpec::model2();
        assert_eq!(m2.x[1].kind, ComponentKind::Ar1(0.8));
        assert_eq!(m2.y[0].kind, ComponentKind::Ar1(0.8));
        assert!(!m2.is_all_fractional());
        let m3 = ModelSpec::model3();
        assert_eq!(m3.x[1].kind, ComponentKind::White);
        assert_eq!(m3.y[1].kind, ComponentKind::Fractional(0.4));
        for m in [m2, m3] {
            assert!(m.components().iter().all(|c| c.weight == 1.0));
            assert_eq!(m.covariance.covariance(1, 2), 0.9);
        }
    }

    #[test]
    fn document_round_trip() {
        #[derive(Serialize, Deserialize)]
        struct Wrap {
            model: ModelSpec,
        }
        for m in [ModelSpec::model1(), ModelSpec::model2(), ModelSpec::model3()] {
            let text = toml::to_string(&Wrap { model: m.clone() }).unwrap();
            let back: Wrap = toml::from_str(&text).unwrap();
            assert_eq!(back.model, m);
        }
    }

    #[test]
    fn document_rejects_bad_components() {
        let text = r#"
            x = [{ kind = "fractional", param = 0.6, weight = 1.0 },
                 { kind = "white", weight = 1.0 }]
            y = [{ kind = "white", weight = 1.0 },
                 { kind = "fractional", param = 0.4, weight = 1.0 }]
            [covariance]
            variances = [1.0, 1.0, 1.0, 1.0]
        "#;
        assert!(toml::from_str::<ModelSpec>(text).is_err());
        let text = text.replace("0.6", "0.4").replace("variances", "variances = [1.0, 1.0, 1.0, 1.0]\ns23 = 1.5\n#");
        let err = toml::from_str::<ModelSpec>(&text).unwrap_err();
        assert!(err.to_string().contains("positive semi-definite"), "{err}");
    }

    #[test]
    fn swapping_twice_is_identity() {
        let mut m = ModelSpec::model1();
        m.covariance = m.covariance.with_covariance(0, 2, 0.1);
        assert_eq!(m.swapped().swapped(), m);
        assert_eq!(m.swapped().covariance.covariance(3, 1), m.covariance.covariance(1, 3));
        assert_eq!(m.swapped().covariance.covariance(0, 2), 0.1);
    }
}
