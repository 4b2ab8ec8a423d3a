use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::constant::ConstantPart;
use super::homological::Component;
use crate::algebra::{ConeSpec, MultiIndex};
use crate::diophantine::Frequency;

/// Which combination `<k, 2 pi alpha> -+ 2 xi` is close to `2 pi Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `<k, 2 pi alpha> - 2 xi`; the `(1,2)` entry is resonant.
    Minus,
    /// `<k, 2 pi alpha> + 2 xi`; the `(2,1)` entry is resonant.
    Plus,
}

impl Branch {
    pub fn component(self) -> Component {
        match self {
            Branch::Minus => Component::Upper,
            Branch::Plus => Component::Lower,
        }
    }

    /// Sign of the rotation that removes this resonance.
    pub fn sign(self) -> i64 {
        match self {
            Branch::Minus => 1,
            Branch::Plus => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonantSite {
    pub mode: MultiIndex,
    pub branch: Branch,
    /// `|e^{i(<k, 2 pi alpha> -+ 2 xi)} - 1|`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub delta: f64,
    pub cutoff: f64,
    /// Chosen site, smallest `|k|_eta` first, then lexicographic.
    pub chosen: Option<ResonantSite>,
    pub site_count: usize,
    /// Some value lies within a factor two of `delta`.
    pub near_threshold: bool,
    pub min_value: f64,
}

/// Scan cone modes with `|k|_eta <= cutoff` for `|e^{i(<k,2 pi alpha> -+ 2 xi)} - 1| < delta`.
pub fn classify_resonance(
    a: &ConstantPart,
    freq: &Frequency,
    cone: &ConeSpec,
    cutoff: f64,
    delta: f64,
) -> ResonanceReport {
    let mut chosen: Option<ResonantSite> = None;
    let mut site_count = 0;
    let mut near = false;
    let mut min_value = f64::INFINITY;
    for k in cone.members_up_to(cutoff) {
        let theta = freq.pairing_angle(&k);
        let mut best_here: Option<ResonantSite> = None;
        for branch in [Branch::Minus, Branch::Plus] {
            let arg = match branch {
                Branch::Minus => Complex64::new(theta, 0.0) - a.xi * 2.0,
                Branch::Plus => Complex64::new(theta, 0.0) + a.xi * 2.0,
            };
            let value = ((Complex64::i() * arg).exp() - 1.0).norm();
            min_value = min_value.min(value);
            if value >= delta / 2.0 && value < 2.0 * delta {
                near = true;
            }
            if value < delta {
                site_count += 1;
                if best_here.as_ref().is_none_or(|b| value < b.value) {
                    best_here = Some(ResonantSite { mode: k.clone(), branch, value });
                }
            }
        }
        if chosen.is_none() {
            chosen = best_here;
        }
    }
    ResonanceReport { delta, cutoff, chosen, site_count, near_threshold: near, min_value }
}
