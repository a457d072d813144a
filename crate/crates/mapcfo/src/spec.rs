//! Serializable descriptions of pilots and priors used by the CLI and the
//! simulations.

use mapcfo_core::{
    make_combined_pilot, make_periodic_pilot, make_td_pilot, zadoff_chu, CfoPrior, Error, MimoConfig, PilotMatrix,
    Result,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PilotKind {
    Periodic,
    Td,
    Combined,
}

impl PilotKind {
    pub fn name(self) -> &'static str {
        match self {
            PilotKind::Periodic => "periodic",
            PilotKind::Td => "td",
            PilotKind::Combined => "combined",
        }
    }
}

impl std::str::FromStr for PilotKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "periodic" => Ok(PilotKind::Periodic),
            "td" | "time-division" => Ok(PilotKind::Td),
            "combined" => Ok(PilotKind::Combined),
            other => Err(format!("unknown pilot layout `{other}` (expected periodic, td or combined)")),
        }
    }
}

/// Structured pilot of `symbols` rows for `tx_antennas` antennas.
///
/// A combined pilot is a periodic head of `head` symbols followed by a TD tail
/// with the remaining symbols. `zc_root` scrambles the whole pilot with one
/// Zadoff-Chu sequence of length `symbols`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotSpec {
    pub kind: PilotKind,
    pub tx_antennas: usize,
    pub symbols: usize,
    pub head: Option<usize>,
    pub zc_root: Option<u64>,
}

impl PilotSpec {
    pub fn new(kind: PilotKind, tx_antennas: usize, symbols: usize) -> Self {
        Self { kind, tx_antennas, symbols, head: None, zc_root: None }
    }

    pub fn head_symbols(&self) -> usize {
        self.head.unwrap_or(self.symbols / 2)
    }

    /// The pilot at per-symbol power `rho`.
    pub fn build(&self, power: f64) -> Result<PilotMatrix> {
        let (lt, n) = (self.tx_antennas, self.symbols);
        let code = self.zc_root.map(|root| zadoff_chu(root, n));
        let split = |len: usize| -> Result<usize> {
            if lt == 0 || len == 0 || !len.is_multiple_of(lt) {
                Err(Error::Dimension(format!("{len} pilot symbols are not a positive multiple of l_t = {lt}")))
            } else {
                Ok(len / lt)
            }
        };
        match self.kind {
            PilotKind::Periodic => {
                make_periodic_pilot(&MimoConfig::new(lt, 1, n)?, split(n)?, power, code.as_deref(), None)
            }
            PilotKind::Td => make_td_pilot(&MimoConfig::new(lt, 1, n)?, split(n)?, power, code.as_deref()),
            PilotKind::Combined => {
                let h = self.head_symbols();
                if h >= n {
                    return Err(Error::Dimension(format!("combined head of {h} symbols leaves no TD tail in n = {n}")));
                }
                let (c_head, c_tail) = match &code {
                    Some(c) => (Some(&c[..h]), Some(&c[h..])),
                    None => (None, None),
                };
                let head = make_periodic_pilot(&MimoConfig::new(lt, 1, h)?, split(h)?, power, c_head, None)?;
                let tail = make_td_pilot(&MimoConfig::new(lt, 1, n - h)?, split(n - h)?, power, c_tail)?;
                make_combined_pilot(&head, Some(&tail))
            }
        }
    }
}

/// `rho` giving `snr_db = 10 log10(rho sigma_h^2)` at unit noise power.
pub fn power_for_snr(snr_db: f64, channel_variance: f64) -> f64 {
    10f64.powf(snr_db / 10.0) / channel_variance
}

/// Gaussian CFO prior; `variance = None` is flat (ML).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfoPriorSpec {
    pub mean: f64,
    pub variance: Option<f64>,
}

impl CfoPriorSpec {
    pub fn prior(&self) -> Result<CfoPrior> {
        match self.variance {
            None => Ok(CfoPrior::flat(self.mean)),
            Some(v) => CfoPrior::new(self.mean, v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combined_spec_splits_head_and_tail() {
        let spec = PilotSpec { head: Some(8), zc_root: Some(1), ..PilotSpec::new(PilotKind::Combined, 2, 16) };
        let p = spec.build(2.0).unwrap();
        assert_eq!(p.symbols(), 16);
        assert!(p.is_orthogonal());
        assert!((p.antenna_energy() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn bad_multiples_name_the_constraint() {
        let err = PilotSpec::new(PilotKind::Periodic, 3, 16).build(1.0).unwrap_err();
        assert!(err.to_string().contains("multiple of l_t"), "{err}");
    }

    #[test]
    fn snr_to_power() {
        assert!((power_for_snr(10.0, 1.0) - 10.0).abs() < 1e-12);
        assert!((power_for_snr(0.0, 0.5) - 2.0).abs() < 1e-12);
    }
}
