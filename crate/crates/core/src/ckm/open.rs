//! Turning a pseudo-integral opening into an integral one.

use serde::Serialize;

use crate::ckm::iterative::PseudoIntegral;
use crate::report::{Check, Checks};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OpenMode {
    /// Open every fractional facility (budget grows by at most `f_max`).
    Both,
    /// Open only the largest fractional facility (keeps every integral constraint, e.g. `k`).
    Larger,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Opened {
    pub open: Vec<usize>,
    pub w: Vec<f64>,
}

pub fn open_integral(pi: &PseudoIntegral, mode: OpenMode) -> Result<Opened> {
    let mut open = pi.opened.clone();
    match mode {
        OpenMode::Both => {
            if pi.fractional.len() == 2 {
                let s: f64 = pi.fractional.iter().map(|&i| pi.w[i]).sum();
                if (s - 1.0).abs() > 1e-7 {
                    return Err(Error::falsified(
                        "open.pair_sum",
                        format!("fractional pair {:?} sums to {s}", pi.fractional),
                    ));
                }
            }
            open.extend(&pi.fractional);
        }
        OpenMode::Larger => {
            let best = pi
                .fractional
                .iter()
                .copied()
                .min_by(|&a, &b| pi.w[b].total_cmp(&pi.w[a]).then(a.cmp(&b)));
            open.extend(best);
        }
    }
    open.sort_unstable();
    let mut w = vec![0.0; pi.w.len()];
    for &i in &open {
        w[i] = 1.0;
    }
    Ok(Opened { open, w })
}

/// Budget and cost effects of opening.
pub fn open_checks(opened: &Opened, pi: &PseudoIntegral, fcost: &[f64], budget: f64, f_max: f64, cost_hat: f64) -> Checks {
    let mut out = Checks::default();
    let used: f64 = opened.open.iter().map(|&i| fcost[i]).sum();
    out.push(Check::le("open.budget", used, budget + f_max, true));
    out.push(Check::le("open.cost_not_increased", cost_hat, pi.cost, false));
    out
}
