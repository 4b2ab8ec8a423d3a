//! CSV and JSON-lines renderings of experiment results.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cocycle::{lyapunov, CocycleSpec, LyapunovOptions};
use crate::error::Result;
use crate::kam::KamTrace;
use crate::spectral::SpectrumScan;

fn header_comment(digest: &str) -> String {
    format!("# isospec config-digest={digest} angles-in-turns\n")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub eps: f64,
    pub lyapunov: f64,
    pub std_error: f64,
    /// Difference quotient against the neighbouring samples.
    pub slope: f64,
}

/// `L(E, eps)` at `steps` equally spaced shifts in `[eps_min, eps_max]`.
pub fn le_profile(
    spec: &CocycleSpec,
    eps_min: f64,
    eps_max: f64,
    steps: usize,
    opts: &LyapunovOptions,
) -> Result<Vec<ProfileRow>> {
    let n = steps.max(2);
    let grid: Vec<f64> = (0..n).map(|i| eps_min + (eps_max - eps_min) * i as f64 / (n - 1) as f64).collect();
    let mut values = Vec::with_capacity(n);
    for &eps in &grid {
        values.push(lyapunov(&spec.with_shift(eps)?, opts)?);
    }
    Ok((0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            ProfileRow {
                eps: grid[i],
                lyapunov: values[i].value,
                std_error: values[i].std_error,
                slope: (values[b].value - values[a].value) / (grid[b] - grid[a]),
            }
        })
        .collect())
}

pub fn profile_csv(digest: &str, rows: &[ProfileRow]) -> String {
    let mut s = header_comment(digest);
    s.push_str("eps,lyapunov,std_error,slope\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.eps, r.lyapunov, r.std_error, r.slope);
    }
    s
}

/// Scan rows, then a summary block of comment lines.
pub fn spectrum_csv(digest: &str, scan: &SpectrumScan, extra_summary: &[(String, String)]) -> String {
    let mut s = header_comment(digest);
    s.push_str("re_energy,im_energy,classification,lyapunov,affinity_defect,splitting_angle\n");
    for v in &scan.verdicts {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            v.energy[0],
            v.energy[1],
            v.classification.label(),
            v.lyapunov,
            opt(v.affinity_defect),
            opt(v.splitting_angle)
        );
    }
    let m = &scan.summary;
    let _ = writeln!(
        s,
        "# summary total={} spectrum={} resolvent={} undecided={} undecided_fraction={} max_le_on_spectrum={}",
        m.total, m.spectrum, m.resolvent, m.undecided, m.undecided_fraction, m.max_le_on_spectrum
    );
    for (k, v) in extra_summary {
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

#[derive(Serialize)]
struct TraceSummary<'a> {
    summary: bool,
    normal_form: &'a crate::kam::NormalForm,
    resonances: usize,
    steps: usize,
    terminal_norm: f64,
    total_residual: f64,
    im_xi_drift: f64,
    resonance_gaps_grow: Option<bool>,
}

/// Step lines followed by one summary line.
pub fn trace_json_lines(trace: &KamTrace, total_residual: f64) -> Result<String> {
    let mut s = trace.to_json_lines()?;
    let summary = TraceSummary {
        summary: true,
        normal_form: &trace.normal_form,
        resonances: trace.resonances(),
        steps: trace.steps.len(),
        terminal_norm: trace.terminal.perturbation.norm(),
        total_residual,
        im_xi_drift: trace.im_xi_drift,
        resonance_gaps_grow: trace.resonance_gaps_grow,
    };
    s.push_str(&serde_json::to_string(&summary).map_err(|e| crate::Error::Numerical(e.to_string()))?);
    s.push('\n');
    Ok(s)
}
