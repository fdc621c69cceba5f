//! Automaton constants and the flat `key=value` config format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Every scalar constant of the retinal automaton.
///
/// `Default` yields the reference operating point. Field names double as the
/// keys of the config file format (see [`RcaParams::parse_config`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RcaParams {
    /// Photoreceptor threshold.
    pub theta_p: f64,
    /// Photoreceptor suprathreshold gain.
    pub g_p: f64,
    /// Support of the horizontal-cell Gaussian (odd).
    pub kh_size: usize,
    pub kh_sigma: f64,
    /// Lateral inhibition strength.
    pub sigma_h: f64,
    /// Bipolar threshold.
    pub theta_b: f64,
    /// Bipolar gain.
    pub g_b: f64,
    /// Amacrine memory factor, in `[0, 1)`.
    pub alpha: f64,
    /// Amacrine motion sensitivity.
    pub beta: f64,
    pub gamma_a: f64,
    pub gamma_tau: f64,
    pub g_m: f64,
    pub theta_m: f64,
    /// Blend between the magnocellular and amacrine states, in `[0, 1]`.
    pub eta_m: f64,
    /// Power-law exponent of the enhancement stage.
    pub gamma_p: f64,
    /// Mexican-hat size parameter; support is `dog_size_param + 1` (must be even).
    pub dog_size_param: usize,
    pub dog_sigma1: f64,
    pub dog_sigma2: f64,
    pub dog_w_surr: f64,
    /// Bilateral filter diameter (odd).
    pub bilateral_d: usize,
    pub bilateral_sigma_color: f64,
    pub bilateral_sigma_space: f64,
}

impl Default for RcaParams {
    fn default() -> Self {
        Self {
            theta_p: 0.1,
            g_p: 1.5,
            kh_size: 3,
            kh_sigma: 1.0,
            sigma_h: 0.3,
            theta_b: 0.2,
            g_b: 2.0,
            alpha: 0.8,
            beta: 1.2,
            gamma_a: 0.5,
            gamma_tau: 0.7,
            g_m: 2.5,
            theta_m: 0.3,
            eta_m: 0.7,
            gamma_p: 0.8,
            dog_size_param: 4,
            dog_sigma1: 1.0,
            dog_sigma2: 2.0,
            dog_w_surr: 0.5,
            bilateral_d: 5,
            bilateral_sigma_color: 0.1,
            bilateral_sigma_space: 0.1,
        }
    }
}

enum Slot<'a> {
    Real(&'a mut f64),
    Int(&'a mut usize),
}

/// Keys in the order they are written to snapshots.
pub const PARAM_KEYS: [&str; 22] = [
    "theta_p",
    "g_p",
    "kh_size",
    "kh_sigma",
    "sigma_h",
    "theta_b",
    "g_b",
    "alpha",
    "beta",
    "gamma_a",
    "gamma_tau",
    "g_m",
    "theta_m",
    "eta_m",
    "gamma_p",
    "dog_size_param",
    "dog_sigma1",
    "dog_sigma2",
    "dog_w_surr",
    "bilateral_d",
    "bilateral_sigma_color",
    "bilateral_sigma_space",
];

impl RcaParams {
    fn slot(&mut self, key: &str) -> Option<Slot<'_>> {
        Some(match key {
            "theta_p" => Slot::Real(&mut self.theta_p),
            "g_p" => Slot::Real(&mut self.g_p),
            "kh_size" => Slot::Int(&mut self.kh_size),
            "kh_sigma" => Slot::Real(&mut self.kh_sigma),
            "sigma_h" => Slot::Real(&mut self.sigma_h),
            "theta_b" => Slot::Real(&mut self.theta_b),
            "g_b" => Slot::Real(&mut self.g_b),
            "alpha" => Slot::Real(&mut self.alpha),
            "beta" => Slot::Real(&mut self.beta),
            "gamma_a" => Slot::Real(&mut self.gamma_a),
            "gamma_tau" => Slot::Real(&mut self.gamma_tau),
            "g_m" => Slot::Real(&mut self.g_m),
            "theta_m" => Slot::Real(&mut self.theta_m),
            "eta_m" => Slot::Real(&mut self.eta_m),
            "gamma_p" => Slot::Real(&mut self.gamma_p),
            "dog_size_param" => Slot::Int(&mut self.dog_size_param),
            "dog_sigma1" => Slot::Real(&mut self.dog_sigma1),
            "dog_sigma2" => Slot::Real(&mut self.dog_sigma2),
            "dog_w_surr" => Slot::Real(&mut self.dog_w_surr),
            "bilateral_d" => Slot::Int(&mut self.bilateral_d),
            "bilateral_sigma_color" => Slot::Real(&mut self.bilateral_sigma_color),
            "bilateral_sigma_space" => Slot::Real(&mut self.bilateral_sigma_space),
            _ => return None,
        })
    }

    /// Checks the structural constraints on the constants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        let reals = [
            ("theta_p", self.theta_p),
            ("g_p", self.g_p),
            ("kh_sigma", self.kh_sigma),
            ("sigma_h", self.sigma_h),
            ("theta_b", self.theta_b),
            ("g_b", self.g_b),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma_a", self.gamma_a),
            ("gamma_tau", self.gamma_tau),
            ("g_m", self.g_m),
            ("theta_m", self.theta_m),
            ("eta_m", self.eta_m),
            ("gamma_p", self.gamma_p),
            ("dog_sigma1", self.dog_sigma1),
            ("dog_sigma2", self.dog_sigma2),
            ("dog_w_surr", self.dog_w_surr),
            ("bilateral_sigma_color", self.bilateral_sigma_color),
            ("bilateral_sigma_space", self.bilateral_sigma_space),
        ];
        for (name, v) in reals {
            if !v.is_finite() {
                return bad(format!("{name} = {v} is not finite"));
            }
        }
        let positive = [
            ("g_p", self.g_p),
            ("kh_sigma", self.kh_sigma),
            ("sigma_h", self.sigma_h),
            ("g_b", self.g_b),
            ("beta", self.beta),
            ("g_m", self.g_m),
            ("gamma_p", self.gamma_p),
            ("dog_sigma1", self.dog_sigma1),
            ("dog_sigma2", self.dog_sigma2),
            ("bilateral_sigma_color", self.bilateral_sigma_color),
            ("bilateral_sigma_space", self.bilateral_sigma_space),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return bad(format!("{name} = {v} must be strictly positive"));
            }
        }
        for (name, v) in [
            ("gamma_a", self.gamma_a),
            ("gamma_tau", self.gamma_tau),
            ("dog_w_surr", self.dog_w_surr),
        ] {
            if v < 0.0 {
                return bad(format!("{name} = {v} must be non-negative"));
            }
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return bad(format!("alpha = {} must lie in [0, 1)", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.eta_m) {
            return bad(format!("eta_m = {} must lie in [0, 1]", self.eta_m));
        }
        if self.kh_size.is_multiple_of(2) {
            return bad(format!("kh_size = {} must be odd", self.kh_size));
        }
        if self.bilateral_d.is_multiple_of(2) {
            return bad(format!("bilateral_d = {} must be odd", self.bilateral_d));
        }
        if self.dog_size_param < 2 || !self.dog_size_param.is_multiple_of(2) {
            return bad(format!(
                "dog_size_param = {} must be even and at least 2",
                self.dog_size_param
            ));
        }
        Ok(())
    }

    /// Applies `key=value` overrides on top of the defaults.
    ///
    /// Blank lines and `#` comments are ignored. Unknown keys, duplicate keys
    /// and unparsable values are errors.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut params = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let err = |detail: String| Error::Config {
                line: line_no,
                detail,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            match params.slot(key) {
                Some(Slot::Real(dst)) => {
                    *dst = value
                        .parse()
                        .map_err(|_| err(format!("`{key}` expects a real number, got `{value}`")))?;
                }
                Some(Slot::Int(dst)) => {
                    *dst = value
                        .parse()
                        .map_err(|_| err(format!("`{key}` expects an integer, got `{value}`")))?;
                }
                None => return Err(err(format!("unknown key `{key}`"))),
            }
            seen.push(key.to_string());
        }
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_config(&text)
    }

    /// Serialises every field in the config format; reals use the shortest
    /// representation that parses back to the same value.
    pub fn to_config_string(&self) -> String {
        let mut copy = self.clone();
        let mut out = String::new();
        for key in PARAM_KEYS {
            match copy.slot(key).expect("known key") {
                Slot::Real(v) => writeln!(out, "{key}={v:?}"),
                Slot::Int(v) => writeln!(out, "{key}={v}"),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_config_string()).map_err(|e| Error::io(path, e))
    }
}
