use serde::{Deserialize, Serialize};

use super::{BoundEngine, BoundKind, Truncation, Variant};
use crate::error::{Error, Result};
use crate::params::MiningParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffConstants {
    pub gamma: f64,
    pub b: f64,
    pub c: f64,
    pub abar: f64,
    pub hbar: f64,
}

impl ChernoffConstants {
    pub fn bound(&self, k: u64) -> f64 {
        (self.b * (-self.c * k as f64).exp()).min(1.0)
    }
}

pub fn chernoff_constants(params: &MiningParams, variant: Variant) -> Result<ChernoffConstants> {
    params.require_tolerance()?;
    let (al, et) = (params.abar(), params.hbar());
    if al <= 0.0 {
        return Err(Error::Degenerate("ln(1 + gamma/abar) is undefined at abar = 0".into()));
    }
    let gamma = (2.0 - al + et - (4.0 + (al + et).powi(2)).sqrt()) / 2.0;
    let growth = match variant {
        Variant::Canonical => 3.0 * gamma,
        Variant::Revised => 2.5 * gamma,
    };
    let gap = et - al - al * et;
    let den = al * et * gamma.exp() - (al + gamma) * (et - gamma);
    if den == 0.0 {
        return Err(Error::Degenerate("abar*hbar*e^gamma - (abar+gamma)(hbar-gamma) = 0".into()));
    }
    let b = (growth.exp() * gamma * gap / den).powi(2) + 1.0 - gap / (et * al.exp());

    let spread = et * al.exp() * et.exp_m1();
    let ratio_den = et + spread - al * (1.0 + et);
    if !(spread > 0.0 && ratio_den > 0.0) {
        return Err(Error::Degenerate(format!(
            "log argument hbar e^abar (e^hbar - 1) / (hbar + hbar e^abar (e^hbar - 1) - abar(1 + hbar)) = {spread:e} / {ratio_den:e} is not positive"
        )));
    }
    let ln_ratio = (spread / ratio_den).ln();
    if 1.0 - gamma / et <= 0.0 {
        return Err(Error::Degenerate("ln(1 - gamma/hbar) has a non-positive argument".into()));
    }
    let ln_up = (gamma / al).ln_1p();
    let head = ln_up + (-gamma / et).ln_1p() - gamma;
    let c = head / (1.0 - ln_up / ln_ratio);
    Ok(ChernoffConstants { gamma, b, c, abar: al, hbar: et })
}

impl BoundEngine {
    pub fn chernoff(&self, k: u64) -> Result<super::BoundReport> {
        let cc = chernoff_constants(&self.params, self.variant)?;
        let raw = cc.b * (-cc.c * k as f64).exp();
        Ok(self.report(BoundKind::DepthChernoff, k as f64, raw, None, Truncation::default()))
    }
}
