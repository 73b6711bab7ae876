use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use conley_kit::geometry::{FieldKind, Surface, SurfaceKind};

use crate::CliError;

/// Settings shared by every subcommand. Built from defaults, then a `key = value`
/// file, then command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub surface: String,
    pub field: String,
    pub n: usize,
    pub epsilon: f64,
    pub tau: f64,
    pub h: f64,
    pub h_min: f64,
    pub delta_conv: f64,
    pub horizon: f64,
    /// Truncation horizon of the forward thickenings.
    pub w_horizon: f64,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Values supplied by flags or a config file; `None` keeps the previous layer.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub surface: Option<String>,
    pub field: Option<String>,
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub tau: Option<f64>,
    pub h: Option<f64>,
    pub h_min: Option<f64>,
    pub delta_conv: Option<f64>,
    pub horizon: Option<f64>,
    pub w_horizon: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Usage(format!("bad value `{value}` for `{key}`")))
}

impl Overrides {
    /// Parses a config file of `key = value` lines; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut o = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim().replace('-', "_"), value.trim());
            match key.as_str() {
                "surface" => o.surface = Some(value.to_string()),
                "field" => o.field = Some(value.to_string()),
                "n" => o.n = Some(parse(&key, value)?),
                "epsilon" => o.epsilon = Some(parse(&key, value)?),
                "tau" => o.tau = Some(parse(&key, value)?),
                "h" => o.h = Some(parse(&key, value)?),
                "h_min" => o.h_min = Some(parse(&key, value)?),
                "delta_conv" => o.delta_conv = Some(parse(&key, value)?),
                "horizon" => o.horizon = Some(parse(&key, value)?),
                "w_horizon" => o.w_horizon = Some(parse(&key, value)?),
                "samples" => o.samples = Some(parse(&key, value)?),
                "seed" => o.seed = Some(parse(&key, value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
            }
        }
        Ok(o)
    }

    /// `self` over `base`, field by field.
    pub fn over(self, base: Self) -> Self {
        Self {
            surface: self.surface.or(base.surface),
            field: self.field.or(base.field),
            n: self.n.or(base.n),
            epsilon: self.epsilon.or(base.epsilon),
            tau: self.tau.or(base.tau),
            h: self.h.or(base.h),
            h_min: self.h_min.or(base.h_min),
            delta_conv: self.delta_conv.or(base.delta_conv),
            horizon: self.horizon.or(base.horizon),
            w_horizon: self.w_horizon.or(base.w_horizon),
            samples: self.samples.or(base.samples),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
        }
    }
}

impl RunConfig {
    /// Fills unset values with defaults that depend on the surface, then validates.
    pub fn resolve(o: Overrides) -> Result<Self, CliError> {
        let surface = o.surface.unwrap_or_else(|| "torus:R=2,r=1".into());
        let parsed = Surface::<f64>::parse(&surface).map_err(CliError::from_core)?;
        let circle = matches!(parsed.kind, SurfaceKind::Circle);
        let cfg = Self {
            field: o.field.unwrap_or_else(|| if circle { "cos-theta" } else { "height" }.into()),
            n: o.n.unwrap_or(if circle { 1024 } else { 64 }),
            epsilon: o.epsilon.unwrap_or(0.2),
            tau: o.tau.unwrap_or(2.0),
            h: o.h.unwrap_or(1e-2),
            h_min: o.h_min.unwrap_or(1e-6),
            delta_conv: o.delta_conv.unwrap_or(1e-8),
            horizon: o.horizon.unwrap_or(200.0),
            w_horizon: o.w_horizon.unwrap_or(100.0),
            samples: o.samples.unwrap_or(500),
            seed: o.seed.unwrap_or(7),
            out: o.out,
            surface,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let reals = [
            ("epsilon", self.epsilon),
            ("tau", self.tau),
            ("h", self.h),
            ("h_min", self.h_min),
            ("delta_conv", self.delta_conv),
            ("horizon", self.horizon),
            ("w_horizon", self.w_horizon),
        ];
        if let Some((k, v)) = reals.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(CliError::Usage(format!("`{k}` must be positive, got {v}")));
        }
        if self.samples == 0 || self.n == 0 {
            return Err(CliError::Usage("`n` and `samples` must be positive".into()));
        }
        FieldKind::parse(&self.field).map_err(CliError::from_core)?;
        Ok(())
    }

    pub fn surface(&self) -> Surface<f64> {
        Surface::parse(&self.surface).expect("validated descriptor")
    }

    /// Every setting as text, for echoing into reports.
    pub fn entries(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("surface".into(), self.surface.clone());
        m.insert("field".into(), self.field.clone());
        m.insert("n".into(), self.n.to_string());
        m.insert("epsilon".into(), self.epsilon.to_string());
        m.insert("tau".into(), self.tau.to_string());
        m.insert("h".into(), self.h.to_string());
        m.insert("h_min".into(), self.h_min.to_string());
        m.insert("delta_conv".into(), self.delta_conv.to_string());
        m.insert("horizon".into(), self.horizon.to_string());
        m.insert("w_horizon".into(), self.w_horizon.to_string());
        m.insert("samples".into(), self.samples.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = Overrides::from_text("# comment\nsurface = sphere\nn = 32\nseed=3\n").unwrap();
        let flags = Overrides { n: Some(16), ..Default::default() };
        let cfg = RunConfig::resolve(flags.over(file)).unwrap();
        assert_eq!((cfg.surface.as_str(), cfg.n, cfg.seed, cfg.field.as_str()), ("sphere", 16, 3, "height"));
    }

    #[test]
    fn circle_defaults() {
        let cfg = RunConfig::resolve(Overrides { surface: Some("circle".into()), ..Default::default() }).unwrap();
        assert_eq!((cfg.n, cfg.field.as_str()), (1024, "cos-theta"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Overrides::from_text("bogus = 1").is_err());
        assert!(Overrides::from_text("n = many").is_err());
        assert!(RunConfig::resolve(Overrides { epsilon: Some(-1.0), ..Default::default() }).is_err());
        assert!(RunConfig::resolve(Overrides { surface: Some("klein".into()), ..Default::default() }).is_err());
    }
}
