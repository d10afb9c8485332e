//! Univariate forecasting methods behind one contract, and the ordered menu
//! the cross-validated selection chooses from.

mod ar;
mod boxcox;
mod simple;
mod smoothing;
mod theta;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

pub use ar::{fit_ar, ArAuto, ArFit};
pub use boxcox::{boxcox, boxcox_inverse, guerrero_lambda, BoxCox, LambdaChoice};
pub use simple::{Drift, Mean, Naive, SeasonalNaive};
pub use smoothing::{Holt, HoltWinters, Ses};
pub use theta::Theta;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForecastError {
    /// The method cannot be used on this history. Selection demotes such
    /// methods instead of aborting.
    #[error("{method} is inapplicable: {reason}")]
    Inapplicable { method: String, reason: String },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
}

impl ForecastError {
    pub fn inapplicable(method: &str, reason: impl Into<String>) -> Self {
        Self::Inapplicable {
            method: method.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MenuError {
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("method {method}: unknown or invalid parameter {param:?}")]
    BadParameter { method: String, param: String },
    #[error("duplicate method name {0:?}")]
    Duplicate(String),
    #[error("a menu needs at least 4 methods, got {0}")]
    TooFew(usize),
}

/// A univariate forecasting method.
///
/// Implementations are deterministic: the same history, period and horizon
/// always yield bit-identical forecasts.
pub trait Forecaster: Send + Sync {
    fn name(&self) -> &str;

    /// Shortest history the method accepts for the given seasonal period.
    fn min_history(&self, period: usize) -> usize;

    /// Fits on `history` and returns `horizon` forecasts.
    fn forecast(&self, history: &[f64], period: usize, horizon: usize) -> Result<Vec<f64>, ForecastError>;
}

/// Fits `method` on `history` and forecasts `horizon` steps, enforcing the
/// shared contract: minimum history, exact length and finite output.
pub fn fit_predict(
    method: &dyn Forecaster,
    history: &[f64],
    period: usize,
    horizon: usize,
) -> Result<Vec<f64>, ForecastError> {
    if horizon == 0 {
        return Err(ForecastError::ZeroHorizon);
    }
    let need = method.min_history(period);
    if history.len() < need {
        return Err(ForecastError::inapplicable(
            method.name(),
            format!("history of {} points, needs {need}", history.len()),
        ));
    }
    if history.iter().any(|v| !v.is_finite()) {
        return Err(ForecastError::inapplicable(method.name(), "non-finite history"));
    }
    let out = method.forecast(history, period, horizon)?;
    if out.len() != horizon || out.iter().any(|v| !v.is_finite()) {
        return Err(ForecastError::inapplicable(method.name(), "non-finite forecast"));
    }
    Ok(out)
}

/// One entry of a configured menu: a method name, an optional Box-Cox
/// wrapper, and method-specific numeric overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    #[serde(default)]
    pub boxcox: bool,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl MethodSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            boxcox: false,
            params: BTreeMap::new(),
        }
    }

    pub fn with_boxcox(mut self) -> Self {
        self.boxcox = true;
        self
    }

    /// Parses `"theta"`, `"theta+boxcox"` and the `_boxcox` suffix form.
    pub fn parse(s: &str) -> Self {
        let s = s.trim();
        for suffix in ["+boxcox", "_boxcox"] {
            if let Some(base) = s.strip_suffix(suffix) {
                return Self::named(base).with_boxcox();
            }
        }
        Self::named(s)
    }

    pub fn build(&self) -> Result<Box<dyn Forecaster>, MenuError> {
        let bad = |param: &str| MenuError::BadParameter {
            method: self.name.clone(),
            param: param.to_string(),
        };
        let allowed: &[&str] = match self.name.as_str() {
            "holt" | "holt_damped" => &["phi"],
            "ar" => &["max_order"],
            _ => &[],
        };
        if let Some(p) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(bad(p));
        }
        let inner: Box<dyn Forecaster> = match self.name.as_str() {
            "mean" => Box::new(Mean),
            "naive" => Box::new(Naive),
            "snaive" => Box::new(SeasonalNaive),
            "drift" => Box::new(Drift),
            "ses" => Box::new(Ses),
            "holt" => match self.params.get("phi") {
                Some(&phi) if phi > 0.0 && phi <= 1.0 => Box::new(Holt::with_phi("holt", phi)),
                Some(_) => return Err(bad("phi")),
                None => Box::new(Holt::linear()),
            },
            "holt_damped" => match self.params.get("phi") {
                Some(&phi) if phi > 0.0 && phi <= 1.0 => Box::new(Holt::with_phi("holt_damped", phi)),
                Some(_) => return Err(bad("phi")),
                None => Box::new(Holt::damped()),
            },
            "hw_additive" => Box::new(HoltWinters::additive()),
            "hw_multiplicative" => Box::new(HoltWinters::multiplicative()),
            "ar" => match self.params.get("max_order") {
                Some(&p) if p >= 0.0 && p.fract() == 0.0 && p <= 24.0 => Box::new(ArAuto::new(p as usize)),
                Some(_) => return Err(bad("max_order")),
                None => Box::new(ArAuto::default()),
            },
            "theta" => Box::new(Theta),
            other => return Err(MenuError::UnknownMethod(other.to_string())),
        };
        Ok(if self.boxcox {
            Box::new(BoxCox::auto(inner))
        } else {
            inner
        })
    }
}

/// Names accepted by [`MethodSpec::build`].
pub const METHOD_NAMES: &[&str] = &[
    "mean",
    "naive",
    "snaive",
    "drift",
    "ses",
    "holt",
    "holt_damped",
    "hw_additive",
    "hw_multiplicative",
    "ar",
    "theta",
];

/// Ordered set of candidate methods. Order breaks ranking ties.
pub struct MethodMenu {
    methods: Vec<Box<dyn Forecaster>>,
}

impl std::fmt::Debug for MethodMenu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

impl MethodMenu {
    pub fn new(methods: Vec<Box<dyn Forecaster>>) -> Result<Self, MenuError> {
        if methods.len() < 4 {
            return Err(MenuError::TooFew(methods.len()));
        }
        let mut seen = HashSet::new();
        for m in &methods {
            if !seen.insert(m.name().to_string()) {
                return Err(MenuError::Duplicate(m.name().to_string()));
            }
        }
        Ok(Self { methods })
    }

    pub fn from_specs(specs: &[MethodSpec]) -> Result<Self, MenuError> {
        Self::new(specs.iter().map(MethodSpec::build).collect::<Result<_, _>>()?)
    }

    /// The built-in menu: every base method, plus Box-Cox variants of the
    /// smoothing, autoregressive and Theta methods.
    pub fn standard() -> Self {
        Self::from_specs(&Self::standard_specs()).expect("built-in menu is valid")
    }

    pub fn standard_specs() -> Vec<MethodSpec> {
        let mut specs: Vec<MethodSpec> = METHOD_NAMES.iter().map(|n| MethodSpec::named(n)).collect();
        for name in ["ses", "holt", "ar", "theta"] {
            specs.push(MethodSpec::named(name).with_boxcox());
        }
        specs
    }

    /// Registers an additional method at the end of the menu.
    pub fn register(&mut self, method: Box<dyn Forecaster>) -> Result<(), MenuError> {
        if self.methods.iter().any(|m| m.name() == method.name()) {
            return Err(MenuError::Duplicate(method.name().to_string()));
        }
        self.methods.push(method);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn get(&self, i: usize) -> &dyn Forecaster {
        self.methods[i].as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Forecaster> {
        self.methods.iter().map(|m| m.as_ref())
    }

    pub fn names(&self) -> Vec<&str> {
        self.methods.iter().map(|m| m.name()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m.name() == name)
    }
}

/// Grid of smoothing parameters 0.05, 0.10, ..., 0.95.
pub(crate) fn smoothing_grid() -> impl Iterator<Item = f64> + Clone {
    (1..=19).map(|i| i as f64 * 0.05)
}

/// Ordinary least-squares line through `(t, y_t)`, `t = 0..n`. Returns
/// `(intercept, slope)`.
pub(crate) fn linear_fit(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    if y.len() < 2 {
        return (y.first().copied().unwrap_or(0.0), 0.0);
    }
    let t_mean = (n - 1.0) / 2.0;
    let y_mean = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in y.iter().enumerate() {
        let dt = t as f64 - t_mean;
        sxy += dt * (v - y_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    (y_mean - slope * t_mean, slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn standard_menu_is_valid() {
        let menu = MethodMenu::standard();
        assert_eq!(menu.len(), 15);
        assert_eq!(menu.names()[0], "mean");
        assert!(menu.position("theta_boxcox").is_some());
    }

    #[test]
    fn spec_parsing_and_errors() {
        assert_eq!(MethodSpec::parse("ar+boxcox"), MethodSpec::named("ar").with_boxcox());
        assert_eq!(MethodSpec::parse("ses_boxcox"), MethodSpec::named("ses").with_boxcox());
        assert!(matches!(MethodSpec::named("nnetar").build(), Err(MenuError::UnknownMethod(_))));
        let mut s = MethodSpec::named("naive");
        s.params.insert("alpha".into(), 0.3);
        assert!(matches!(s.build(), Err(MenuError::BadParameter { .. })));
        let mut s = MethodSpec::named("ar");
        s.params.insert("max_order".into(), 2.0);
        assert_eq!(s.build().unwrap().name(), "ar");
    }

    #[test]
    fn menu_rejects_duplicates_and_small_menus() {
        let specs = [MethodSpec::named("mean"), MethodSpec::named("naive"), MethodSpec::named("mean"), MethodSpec::named("ses")];
        assert!(matches!(MethodMenu::from_specs(&specs), Err(MenuError::Duplicate(_))));
        assert!(matches!(MethodMenu::from_specs(&specs[..2]), Err(MenuError::TooFew(2))));
        let mut menu = MethodMenu::standard();
        assert!(menu.register(Box::new(Naive)).is_err());
    }

    #[test]
    fn contract_rejects_short_history() {
        let err = fit_predict(&HoltWinters::additive(), &[1.0; 10], 12, 3).unwrap_err();
        assert!(matches!(err, ForecastError::Inapplicable { .. }));
        assert_eq!(fit_predict(&Naive, &[1.0], 1, 0), Err(ForecastError::ZeroHorizon));
    }

    #[test]
    fn constant_series_forecasts_constant() {
        let menu = MethodMenu::standard();
        let history = vec![42.5; 60];
        for m in menu.iter() {
            let f = fit_predict(m, &history, 12, 12).unwrap();
            for v in f {
                assert!((v - 42.5).abs() < 1e-9 * 42.5, "{}: {v}", m.name());
            }
        }
    }

    fn histories() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, 30..61)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn forecasts_are_finite_and_deterministic(h in histories(), horizon in 1usize..14, offset in 0.0f64..200.0) {
            let menu = MethodMenu::standard();
            let shifted: Vec<f64> = h.iter().map(|v| v + offset).collect();
            for m in menu.iter() {
                match fit_predict(m, &shifted, 12, horizon) {
                    Ok(f) => {
                        prop_assert_eq!(f.len(), horizon);
                        prop_assert!(f.iter().all(|v| v.is_finite()));
                        let again = fit_predict(m, &shifted, 12, horizon).unwrap();
                        prop_assert!(f.iter().zip(&again).all(|(a, b)| a.to_bits() == b.to_bits()));
                    }
                    Err(ForecastError::Inapplicable { .. }) => {}
                    Err(e) => prop_assert!(false, "{}", e),
                }
            }
        }
    }
}
