use std::io::Write;

use serde::{Deserialize, Serialize};

use super::gfun::{b_max, b_min, g0, g1, g2, min_order_exponent, GammaGConfig};
use crate::error::{Error, Result};
use crate::format::g17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    G0,
    G1,
    G2,
    Bminmax,
    QExponents,
}

impl CurveKind {
    pub const ALL: [CurveKind; 5] = [
        CurveKind::G0,
        CurveKind::G1,
        CurveKind::G2,
        CurveKind::Bminmax,
        CurveKind::QExponents,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CurveKind::G0 => "g0",
            CurveKind::G1 => "g1",
            CurveKind::G2 => "g2",
            CurveKind::Bminmax => "bminmax",
            CurveKind::QExponents => "q_exponents",
        }
    }
}

impl std::str::FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CurveKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Parse(format!(
                "unknown curve '{s}' (expected g0, g1, g2, bminmax, q_exponents)"
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| g17(*v)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exponent q of the error term under the practical choice with exponent b0.
pub fn q_exponent(beta: f64, b0: f64, cfg: &GammaGConfig) -> Result<f64> {
    let e = (b0 / 2.0).min(1.0 - b0);
    let g1v = g1(beta, cfg)?.value;
    let g2v = g2(beta, cfg)?.value;
    let t1 = -e * (beta - 2.0) / beta;
    let t2 = -b0 / 2.0 + e - 3.0 * e * g1v;
    let t3 = -0.5 - b0 / 2.0 + e / 2.0 + 1.5 * e * (1.0 - g2v);
    Ok(t1.max(t2).max(t3))
}

/// Plot data for the g-functions, the b window and the q exponents.
pub fn g_curve_export(which: CurveKind, beta_grid: &[f64], cfg: &GammaGConfig) -> Result<CurveTable> {
    if let Some(bad) = beta_grid.iter().find(|b| !(**b > 2.0 && b.is_finite())) {
        return Err(Error::BetaOutOfRange(*bad));
    }
    let header: &[&str] = match which {
        CurveKind::G0 | CurveKind::G1 | CurveKind::G2 => &["beta", "value", "minimizer_d"],
        CurveKind::Bminmax => &["beta", "b_min", "b_max"],
        CurveKind::QExponents => &["beta", "q_b0_2_3", "q_b0_0_569", "min_order"],
    };
    let rows = beta_grid
        .iter()
        .map(|&beta| -> Result<Vec<f64>> {
            Ok(match which {
                CurveKind::G0 | CurveKind::G1 | CurveKind::G2 => {
                    let inf = match which {
                        CurveKind::G0 => g0(beta, cfg)?,
                        CurveKind::G1 => g1(beta, cfg)?,
                        _ => g2(beta, cfg)?,
                    };
                    vec![beta, inf.value, inf.minimizer_d]
                }
                CurveKind::Bminmax => vec![beta, b_min(beta, cfg)?, b_max(beta)?],
                CurveKind::QExponents => vec![
                    beta,
                    q_exponent(beta, 2.0 / 3.0, cfg)?,
                    q_exponent(beta, 0.569, cfg)?,
                    min_order_exponent(beta),
                ],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTable {
        header: header.iter().map(|s| s.to_string()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g0_grid() {
        let t = g_curve_export(CurveKind::G0, &[2.1, 3.0, 10.0], &GammaGConfig::default()).unwrap();
        assert_eq!(t.header, ["beta", "value", "minimizer_d"]);
        for row in &t.rows {
            assert!(row[1].is_finite() && row[1] > 0.0);
        }
    }

    #[test]
    fn beta_column_order_preserved() {
        let grid: Vec<f64> = (0..20).map(|i| 2.05 + 0.5 * i as f64).collect();
        let t = g_curve_export(CurveKind::Bminmax, &grid, &GammaGConfig::default()).unwrap();
        let betas: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
        assert_eq!(betas, grid);
        assert!(t.rows.iter().all(|r| r[1] < r[2]));
    }

    #[test]
    fn csv_output() {
        let t = g_curve_export(CurveKind::QExponents, &[3.0], &GammaGConfig::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("beta,q_b0_2_3,q_b0_0_569,min_order\n3,"));
    }

    #[test]
    fn rejects_small_beta() {
        assert!(g_curve_export(CurveKind::G1, &[2.0], &GammaGConfig::default()).is_err());
        assert!("g3".parse::<CurveKind>().is_err());
        assert_eq!("q_exponents".parse::<CurveKind>().unwrap(), CurveKind::QExponents);
    }
}
