//! Optimal error rates of the three methods under each bandwidth regime.
//!
//! A transcription, not a computation; used to annotate benchmark output
//! with the predicted ranking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resample::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateRegime {
    ExponentialMixing,
    Iid,
}

impl std::str::FromStr for RateRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exponential" | "exponential_mixing" | "exponentialmixing" => Ok(RateRegime::ExponentialMixing),
            "iid" => Ok(RateRegime::Iid),
            other => Err(Error::Parse(format!("unknown rate regime '{other}'"))),
        }
    }
}

struct Row {
    range: &'static str,
    ebc: &'static str,
    nbc: &'static str,
    uns: &'static str,
    best: &'static [Method],
    worst: &'static [Method],
}

const EXPONENTIAL: &[Row] = &[
    Row {
        range: "h ∝ n^(-1/5)",
        ebc: "h log n",
        nbc: "(h log n)^(5/7)",
        uns: "inconsistent",
        best: &[Method::Ebc],
        worst: &[Method::Uns],
    },
    Row {
        range: "n^(-7/25)(log n)^(2/5) ⪯ h ≺ n^(-1/5)",
        ebc: "h log n",
        nbc: "(h log n)^(5/7)",
        uns: "n^(1/2)h^(5/2)",
        best: &[Method::Ebc],
        worst: &[Method::Uns],
    },
    Row {
        range: "n^(-7/25)(log n)^(-18/25) ⪯ h ⪯ n^(-7/25)(log n)^(2/5)",
        ebc: "h log n",
        nbc: "(h log n)^(5/7)",
        uns: "n^(1/2)h^(5/2)",
        best: &[Method::Ebc],
        worst: &[Method::Nbc],
    },
    Row {
        range: "n^(-1/3)(log n)^(2/3) ⪯ h ⪯ n^(-7/25)(log n)^(-18/25)",
        ebc: "h log n",
        nbc: "(nh)^(-5/18)",
        uns: "n^(1/2)h^(5/2)",
        best: &[Method::Ebc],
        worst: &[Method::Nbc],
    },
    Row {
        range: "n^(-1/3)(log n)^(-2/3)L_n^(-1) ⪯ h ⪯ n^(-1/3)(log n)^(2/3)",
        ebc: "h log n",
        nbc: "(nh)^(-5/18)",
        uns: "h log n",
        best: &[Method::Ebc, Method::Uns],
        worst: &[Method::Nbc],
    },
    Row {
        range: "n^(-1/3)(log n)^(-2/3)L_n^2 ⪯ h ⪯ n^(-1/3)(log n)^(-2/3)L_n^(-1)",
        ebc: "n^(-1/3)(log n)^(1/3)L_n^(-1)",
        nbc: "(nh)^(-5/18)",
        uns: "n^(-1/3)(log n)^(1/3)L_n^(-1)",
        best: &[Method::Ebc, Method::Uns],
        worst: &[Method::Nbc],
    },
    Row {
        range: "n^(-1) ≺ h ⪯ n^(-1/3)(log n)^(-2/3)L_n^2",
        ebc: "(nh)^(-1/2)",
        nbc: "(nh)^(-5/18)",
        uns: "(nh)^(-1/2)",
        best: &[Method::Ebc, Method::Uns],
        worst: &[Method::Nbc],
    },
];

const IID: &[Row] = &[
    Row {
        range: "h ∝ n^(-1/5)",
        ebc: "n^(5/18)h^(5/2)",
        nbc: "(nh)^(-5/18)",
        uns: "inconsistent",
        best: &[Method::Ebc],
        worst: &[Method::Uns],
    },
    Row {
        range: "n^(-7/27) ⪯ h ≺ n^(-1/5)",
        ebc: "n^(5/18)h^(5/2)",
        nbc: "(nh)^(-5/18)",
        uns: "n^(1/2)h^(5/2)",
        best: &[Method::Ebc],
        worst: &[Method::Uns],
    },
    Row {
        range: "n^(-7/25) ⪯ h ⪯ n^(-7/27)",
        ebc: "(nh)^(-1/2)",
        nbc: "(nh)^(-5/18)",
        uns: "n^(1/2)h^(5/2)",
        best: &[Method::Ebc],
        worst: &[Method::Uns],
    },
    Row {
        range: "n^(-1/3) ⪯ h ⪯ n^(-7/25)",
        ebc: "(nh)^(-1/2)",
        nbc: "(nh)^(-5/18)",
        uns: "n^(1/2)h^(5/2)",
        best: &[Method::Ebc],
        worst: &[Method::Nbc],
    },
    Row {
        range: "n^(-1) ≺ h ⪯ n^(-1/3)",
        ebc: "(nh)^(-1/2)",
        nbc: "(nh)^(-5/18)",
        uns: "(nh)^(-1/2)",
        best: &[Method::Ebc, Method::Uns],
        worst: &[Method::Nbc],
    },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRate {
    pub method: Method,
    pub rate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRanking {
    pub regime: RateRegime,
    pub range: String,
    pub rates: Vec<MethodRate>,
    pub best: Vec<Method>,
    pub worst: Vec<Method>,
}

impl RateRanking {
    pub fn rate(&self, method: Method) -> Option<&str> {
        self.rates.iter().find(|r| r.method == method).map(|r| r.rate.as_str())
    }
}

/// Canonical form of an h-range description, so that TeX-ish, unicode and
/// plain ASCII spellings of the same row compare equal.
fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            c if c.is_whitespace() => {}
            '{' | '}' | '(' | ')' | '\\' | '_' | '$' => {}
            '−' | '–' => out.push('-'),
            '∝' | '∼' => out.push('~'),
            '⪯' | '≼' | '≤' => out.push_str("<="),
            '≺' => out.push('<'),
            c => out.push(c),
        }
    }
    out.replace("propto", "~")
        .replace("preceq", "<=")
        .replace("prec", "<")
        .replace("ln", "log")
}

fn rows(regime: RateRegime) -> &'static [Row] {
    match regime {
        RateRegime::ExponentialMixing => EXPONENTIAL,
        RateRegime::Iid => IID,
    }
}

/// All h-range descriptions for a regime, in table order.
pub fn rate_rows(regime: RateRegime) -> Vec<&'static str> {
    rows(regime).iter().map(|r| r.range).collect()
}

/// Best/worst methods and rate expressions for one h-range.
pub fn rate_table(regime: RateRegime, h_descriptor: &str) -> Result<RateRanking> {
    let key = normalize(h_descriptor);
    let row = rows(regime)
        .iter()
        .find(|r| normalize(r.range) == key)
        .ok_or_else(|| Error::UnknownRateRow {
            query: h_descriptor.to_string(),
            valid: rate_rows(regime).join("; "),
        })?;
    Ok(RateRanking {
        regime,
        range: row.range.to_string(),
        rates: vec![
            MethodRate {
                method: Method::Ebc,
                rate: row.ebc.to_string(),
            },
            MethodRate {
                method: Method::Nbc,
                rate: row.nbc.to_string(),
            },
            MethodRate {
                method: Method::Uns,
                rate: row.uns.to_string(),
            },
        ],
        best: row.best.to_vec(),
        worst: row.worst.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_rows() {
        let r = rate_table(RateRegime::ExponentialMixing, "h ∝ n^{−1/5}").unwrap();
        assert_eq!(r.best, vec![Method::Ebc]);
        assert_eq!(r.rate(Method::Ebc), Some("h log n"));
        assert_eq!(r.rate(Method::Uns), Some("inconsistent"));
        let r = rate_table(RateRegime::Iid, "h ~ n^(-1/5)").unwrap();
        assert_eq!(r.rate(Method::Ebc), Some("n^(5/18)h^(5/2)"));
        assert_eq!(r.worst, vec![Method::Uns]);
    }

    #[test]
    fn tex_spelling() {
        let r = rate_table(
            RateRegime::ExponentialMixing,
            r"n^{-1/3}(\log n)^{-2/3}L_n^{2}\preceq h\preceq n^{-1/3}(\log n)^{-2/3}L_n^{-1}",
        )
        .unwrap();
        assert_eq!(r.best, vec![Method::Ebc, Method::Uns]);
        assert!(rate_table(RateRegime::Iid, r"n^{-1}\prec h\preceq n^{-1/3}").is_ok());
    }

    #[test]
    fn all_rows_resolve() {
        for regime in [RateRegime::ExponentialMixing, RateRegime::Iid] {
            for row in rate_rows(regime) {
                assert_eq!(rate_table(regime, row).unwrap().range, row);
            }
        }
        assert_eq!(rate_rows(RateRegime::ExponentialMixing).len(), 7);
        assert_eq!(rate_rows(RateRegime::Iid).len(), 5);
    }

    #[test]
    fn unknown_row_lists_valid() {
        let err = rate_table(RateRegime::Iid, "h ∝ n^{-1/7}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n^(-7/27)"), "{msg}");
    }
}
