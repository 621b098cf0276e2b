//! Stationary strong-mixing processes with known marginal density.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::g17;
use crate::kernel::{Provenance, TimeSeriesSample};
use crate::rng::RngStream;

/// Decay regime of the strong-mixing coefficients α(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "lowercase")]
pub enum MixingProfile {
    /// α(t) = O(t^{-beta}), beta > 2.
    Polynomial { beta: f64 },
    /// α(t) = O(exp(-rate_c t)), rate_c > 0.
    Exponential { rate_c: f64 },
}

impl MixingProfile {
    pub fn polynomial(beta: f64) -> Result<Self> {
        if !(beta > 2.0) {
            return Err(Error::BetaOutOfRange(beta));
        }
        Ok(MixingProfile::Polynomial { beta })
    }

    pub fn exponential(rate_c: f64) -> Result<Self> {
        if !(rate_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mixing rate must be positive, got {rate_c}"
            )));
        }
        Ok(MixingProfile::Exponential { rate_c })
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, MixingProfile::Exponential { .. })
    }
}

/// f(x0) and f''(x0) of the marginal density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueDensity {
    pub f_x0: f64,
    pub f2_x0: f64,
}

/// A process the bootstrap machinery can be benchmarked against.
pub trait StationaryProcess: Send + Sync {
    fn id(&self) -> &str;

    /// Fills `out` with X_1..X_len, deterministically in `seed`.
    fn fill(&self, seed: u64, out: &mut [f64]);

    fn marginal_density(&self, x: f64) -> f64;

    fn marginal_density_dd(&self, x: f64) -> f64;

    fn mixing_profile(&self) -> MixingProfile;

    fn simulate(&self, n: usize, seed: u64) -> Result<TimeSeriesSample> {
        let mut values = vec![0.0; n];
        self.fill(seed, &mut values);
        Ok(TimeSeriesSample::new(values)?.with_origin(Provenance {
            model_id: self.id().to_string(),
            seed,
        }))
    }

    fn true_density(&self, x0: f64) -> TrueDensity {
        TrueDensity {
            f_x0: self.marginal_density(x0),
            f2_x0: self.marginal_density_dd(x0),
        }
    }
}

fn default_sd() -> f64 {
    1.0
}

fn default_id() -> String {
    "arma11".to_string()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    phi: f64,
    theta: f64,
    #[serde(default = "default_sd")]
    innovation_sd: f64,
    #[serde(default = "default_id")]
    id: String,
}

/// Gaussian ARMA(1,1): X_t − φX_{t−1} = ε_t + θε_{t−1}, ε_t ~ N(0, σ²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct ProcessModel {
    pub phi: f64,
    pub theta: f64,
    pub innovation_sd: f64,
    pub id: String,
}

impl TryFrom<RawModel> for ProcessModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        ProcessModel::new(raw.phi, raw.theta, raw.innovation_sd, raw.id)
    }
}

impl ProcessModel {
    pub fn new(phi: f64, theta: f64, innovation_sd: f64, id: impl Into<String>) -> Result<Self> {
        if !(phi.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "|phi| must be < 1 for stationarity, got {phi}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be finite, got {theta}")));
        }
        if !(innovation_sd > 0.0 && innovation_sd.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "innovation_sd must be positive, got {innovation_sd}"
            )));
        }
        Ok(ProcessModel {
            phi,
            theta,
            innovation_sd,
            id: id.into(),
        })
    }

    /// The φ = 0.4, θ = 0.3, N(0,1)-innovation design.
    pub fn reference() -> Self {
        ProcessModel::new(0.4, 0.3, 1.0, "arma11").expect("valid model")
    }

    /// i.i.d. N(0, 1).
    pub fn iid() -> Self {
        ProcessModel::new(0.0, 0.0, 1.0, "iid").expect("valid model")
    }

    /// σ²(1 + (θ+φ)²/(1−φ²)).
    pub fn marginal_variance(&self) -> f64 {
        let s2 = self.innovation_sd * self.innovation_sd;
        s2 * (1.0 + (self.theta + self.phi).powi(2) / (1.0 - self.phi * self.phi))
    }

    /// Analytic lag-1 autocorrelation (φ+θ)(1+φθ)/(1+2φθ+θ²).
    pub fn lag1_autocorrelation(&self) -> f64 {
        let (p, t) = (self.phi, self.theta);
        (p + t) * (1.0 + p * t) / (1.0 + 2.0 * p * t + t * t)
    }
}

/// Sentinel decay rate reported for φ = 0 (finitely dependent process).
pub const IID_RATE_SENTINEL: f64 = 1e6;

impl StationaryProcess for ProcessModel {
    fn id(&self) -> &str {
        &self.id
    }

    fn fill(&self, seed: u64, out: &mut [f64]) {
        let mut rng = RngStream::new(seed).rng();
        let sd = self.innovation_sd;
        // X_0 and ε_0 are drawn independently from their marginals.
        let mut x_prev = self.marginal_variance().sqrt() * rng.sample::<f64, _>(StandardNormal);
        let mut e_prev = sd * rng.sample::<f64, _>(StandardNormal);
        for slot in out.iter_mut() {
            let e = sd * rng.sample::<f64, _>(StandardNormal);
            let x = self.phi * x_prev + e + self.theta * e_prev;
            *slot = x;
            x_prev = x;
            e_prev = e;
        }
    }

    fn marginal_density(&self, x: f64) -> f64 {
        let v = self.marginal_variance();
        (-0.5 * x * x / v).exp() / (2.0 * PI * v).sqrt()
    }

    /// f''(x) = f(x)(x²/σ⁴ − 1/σ²).
    fn marginal_density_dd(&self, x: f64) -> f64 {
        let v = self.marginal_variance();
        self.marginal_density(x) * (x * x / (v * v) - 1.0 / v)
    }

    /// ARMA(1,1) with |φ| < 1 is exponentially α-mixing; `rate_c` is
    /// informational only.
    fn mixing_profile(&self) -> MixingProfile {
        let rate_c = if self.phi == 0.0 {
            IID_RATE_SENTINEL
        } else {
            -self.phi.abs().ln()
        };
        MixingProfile::Exponential { rate_c }
    }
}

/// Writes a single-column CSV with header `x`.
pub fn write_series_csv<W: Write>(writer: W, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x"])?;
    for &v in values {
        w.write_record([g17(v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv<R: Read>(reader: R) -> Result<TimeSeriesSample> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.len() != 1 || headers.get(0).map(str::trim) != Some("x") {
        return Err(Error::Parse(format!(
            "series CSV must have the single header \"x\", got {headers:?}"
        )));
    }
    let mut values = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let field = record.get(0).unwrap_or("").trim();
        let v: f64 = field
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: cannot parse {field:?} as a number", line + 2)))?;
        values.push(v);
    }
    TimeSeriesSample::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_marginal_variance() {
        let m = ProcessModel::reference();
        assert!((m.marginal_variance() - (1.0 + 0.49 / 0.84)).abs() < 1e-15);
        assert!((m.marginal_variance() - 1.58333).abs() < 1e-5);
    }

    #[test]
    fn rejects_nonstationary() {
        assert!(ProcessModel::new(1.0, 0.0, 1.0, "x").is_err());
        assert!(ProcessModel::new(-1.2, 0.0, 1.0, "x").is_err());
        assert!(ProcessModel::new(0.5, 0.0, 0.0, "x").is_err());
        assert!(serde_json::from_str::<ProcessModel>(r#"{"phi": 1.5, "theta": 0}"#).is_err());
    }

    #[test]
    fn deserialize_defaults() {
        let m: ProcessModel = serde_json::from_str(r#"{"phi": 0.4, "theta": 0.3}"#).unwrap();
        assert_eq!(m, ProcessModel::reference());
    }

    #[test]
    fn marginal_density_values() {
        let m = ProcessModel::reference();
        let expected = (2.0 * PI * 1.58333).powf(-0.5);
        assert!((m.marginal_density(0.0) - expected).abs() < 1e-6);
        assert!((m.marginal_density(0.0) - 0.317_047_175_395_808).abs() < 1e-12);
        assert!((ProcessModel::iid().marginal_density(0.0) - 0.398942).abs() < 1e-6);
        for x in [0.1, 1.0, 2.7] {
            assert_eq!(m.marginal_density(x), m.marginal_density(-x));
        }
    }

    #[test]
    fn second_derivative() {
        let m = ProcessModel::reference();
        let v = m.marginal_variance();
        assert!((m.marginal_density_dd(0.0) + m.marginal_density(0.0) / v).abs() < 1e-16);
        assert!(m.marginal_density_dd(v.sqrt()).abs() < 1e-16);
        let step = 1e-4;
        let fd = (m.marginal_density(1.0 + step) - 2.0 * m.marginal_density(1.0) + m.marginal_density(1.0 - step))
            / (step * step);
        assert!((m.marginal_density_dd(1.0) - fd).abs() < 1e-6);
    }

    #[test]
    fn mixing_regime() {
        assert!(ProcessModel::reference().mixing_profile().is_exponential());
        assert!(ProcessModel::iid().mixing_profile().is_exponential());
        let a = ProcessModel::new(0.4, 0.3, 1.0, "a").unwrap().mixing_profile();
        let b = ProcessModel::new(0.4, -0.8, 1.0, "b").unwrap().mixing_profile();
        assert_eq!(a, b);
        assert!(MixingProfile::polynomial(2.0).is_err());
        assert!(MixingProfile::exponential(0.0).is_err());
    }

    #[test]
    fn simulate_is_deterministic() {
        let m = ProcessModel::reference();
        let a = m.simulate(500, 11).unwrap();
        let b = m.simulate(500, 11).unwrap();
        let c = m.simulate(500, 12).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert_eq!(a.origin.as_ref().unwrap().seed, 11);
        assert!(m.simulate(1, 0).is_err());
    }

    #[test]
    fn series_csv_round_trip() {
        let s = ProcessModel::reference().simulate(50, 3).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&mut buf, s.values()).unwrap();
        assert!(buf.starts_with(b"x\n"));
        let back = read_series_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), s.values());
    }

    #[test]
    fn series_csv_rejects_bad_header() {
        assert!(read_series_csv("y\n1\n2\n".as_bytes()).is_err());
        assert!(read_series_csv("x\n1\nabc\n".as_bytes()).is_err());
    }
}
