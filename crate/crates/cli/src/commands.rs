//! Subcommand bodies. Each returns a table; `verify` also reports whether
//! every check passed.

use nlaqkd_core::fock::{
    amplify_displaced_thermal, build_phi_states, displaced_thermal, four_state_entangled, oracle_output_variance,
    oracle_z,
};
use nlaqkd_core::nla::amplified_output_variance;
use nlaqkd_core::solvers::{distance_to_loss, max_excess_noise, FrontierResult};
use nlaqkd_core::{
    correlation_z, equivalent_channel, g_max, key_rate, loss_to_transmittance, nla_key_rate, ChannelParams, Diagnostic,
    Error, FiberModel, KeyRateBreakdown, NlaParams, ProtocolParams, RateStatus,
};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::args::{Axis, FrontierArgs, GmaxArgs, KeyrateArgs, NlaArgs, ProtocolArgs, SweepArgs, VerifyArgs};
use crate::format::{cell, optional, Table};
use crate::CliError;

/// Default gain of the grid subcommands.
const GRID_GAIN: f64 = 4.0;

fn usage(flag: &str, e: Error) -> CliError {
    CliError::Usage(format!("{flag}: {e}"))
}

fn protocol(a: &ProtocolArgs) -> Result<ProtocolParams, CliError> {
    ProtocolParams::new(a.alpha2().sqrt(), a.beta).map_err(|e| usage("--va/--alpha2/--beta", e))
}

fn channel(loss_db: f64, eps: f64) -> Result<ChannelParams, CliError> {
    ChannelParams::new(loss_to_transmittance(loss_db), eps).map_err(|e| usage("--loss-db/--eps", e))
}

fn amplifier(a: &NlaArgs, gain: f64) -> Result<NlaParams, CliError> {
    NlaParams::new(gain, a.psuccess.model()).map_err(|e| usage("--gain/--psuccess", e))
}

fn fiber(atten: f64) -> Result<FiberModel, CliError> {
    FiberModel::new(atten).map_err(|e| usage("--atten", e))
}

pub fn keyrate(a: &KeyrateArgs) -> Result<Table, CliError> {
    let p = protocol(&a.protocol)?;
    let loss = match (a.loss.loss_db, a.loss.distance_km) {
        (Some(l), _) => l,
        (None, Some(d)) => distance_to_loss(d, &fiber(a.loss.atten)?),
        (None, None) => 0.0,
    };
    let ch = channel(loss, a.eps)?;
    let mut header = vec![
        "mutual_information",
        "holevo_bound",
        "nu1",
        "nu2",
        "nu3",
        "rate",
        "status",
    ];
    let nla = a.nla.gain.map(|g| amplifier(&a.nla, g)).transpose()?;
    let breakdown = match &nla {
        None => key_rate(&p, &ch),
        Some(n) => nla_key_rate(&p, &ch, n),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let KeyRateBreakdown {
        mutual_information,
        holevo_bound,
        rate,
        nu1,
        nu2,
        nu3,
        status,
        ..
    } = breakdown;
    let rate = if status == RateStatus::Physical { rate } else { f64::NAN };
    let mut row: Vec<String> = [mutual_information, holevo_bound, nu1, nu2, nu3, rate]
        .map(cell)
        .to_vec();
    row.push(status.to_string());
    if let Some(n) = &nla {
        header.extend(["eta", "eps_g", "g_max"]);
        let eq = equivalent_channel(&ch, n.gain(), p.alpha());
        row.extend([eq.eta, eq.eps_g, g_max(&ch)].map(cell));
    }
    let mut t = Table::new(header);
    t.rows.push(row);
    Ok(t)
}

pub fn sweep(a: &SweepArgs) -> Result<Table, CliError> {
    let p = protocol(&a.protocol)?;
    let nla = amplifier(&a.nla, a.nla.gain.unwrap_or(GRID_GAIN))?;
    let f = fiber(a.atten)?;
    let (label, default_grid) = match a.axis {
        Axis::Loss => ("loss_db", (0.0, 80.0, 0.5)),
        Axis::Distance => ("distance_km", (0.0, 400.0, 2.5)),
    };
    let points = match a.grid {
        Some(g) => g.points(),
        None => crate::args::Grid {
            start: default_grid.0,
            stop: default_grid.1,
            step: default_grid.2,
        }
        .points(),
    };
    let rows: Result<Vec<Vec<String>>, CliError> = points
        .par_iter()
        .map(|&x| {
            let loss = match a.axis {
                Axis::Loss => x,
                Axis::Distance => distance_to_loss(x, &f),
            };
            let ch = channel(loss, a.eps)?;
            let original = key_rate(&p, &ch).ok().and_then(|b| b.secret_rate());
            let amplified = nla_key_rate(&p, &ch, &nla).ok().and_then(|b| b.secret_rate());
            let eq = equivalent_channel(&ch, nla.gain(), p.alpha());
            Ok(vec![
                cell(x),
                optional(original),
                optional(amplified),
                cell(eq.eta),
                cell(eq.eps_g),
            ])
        })
        .collect();
    let mut t = Table::new(vec![label, "rate_original", "rate_nla", "eta", "eps_g"]);
    t.rows = rows?;
    Ok(t)
}

pub fn gmax(a: &GmaxArgs) -> Result<Table, CliError> {
    let rows: Result<Vec<Vec<String>>, CliError> = a
        .grid
        .points()
        .par_iter()
        .map(|&loss| Ok(vec![cell(loss), cell(g_max(&channel(loss, a.eps)?))]))
        .collect();
    let mut t = Table::new(vec!["loss_db", "g_max"]);
    t.rows = rows?;
    Ok(t)
}

/// Converged values print as-is, "no key even at zero noise" prints 0, and
/// anything else is left blank.
fn frontier_cell(r: &FrontierResult) -> String {
    if r.converged {
        cell(r.value)
    } else if r.diagnostic == Some(Diagnostic::NoKeyAtStart) {
        cell(0.0)
    } else {
        String::new()
    }
}

pub fn frontier(a: &FrontierArgs) -> Result<Table, CliError> {
    let p = protocol(&a.protocol)?;
    let nla = amplifier(&a.nla, a.nla.gain.unwrap_or(GRID_GAIN))?;
    let rows: Vec<Vec<String>> = a
        .grid
        .points()
        .par_iter()
        .map(|&loss| {
            let original = max_excess_noise(&p, loss, None, a.tol);
            let amplified = max_excess_noise(&p, loss, Some(&nla), a.tol);
            vec![cell(loss), frontier_cell(&original), frontier_cell(&amplified)]
        })
        .collect();
    let mut t = Table::new(vec!["loss_db", "eps_max_original", "eps_max_nla"]);
    t.rows = rows;
    Ok(t)
}

struct Check {
    name: &'static str,
    tolerance: f64,
    deviation: Result<f64, Error>,
}

impl Check {
    fn passed(&self) -> bool {
        matches!(self.deviation, Ok(d) if d <= self.tolerance)
    }
}

fn orthonormality(alpha: f64, cutoff: usize) -> Result<f64, Error> {
    let phi = build_phi_states(alpha, cutoff)?;
    let mut worst: f64 = 0.0;
    for j in 0..4 {
        for k in 0..4 {
            let want = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((phi[j].inner(&phi[k]) - Complex64::new(want, 0.0)).norm());
        }
    }
    Ok(worst)
}

fn mode_variances(alpha: f64, cutoff: usize) -> Result<f64, Error> {
    let state = four_state_entangled(alpha, cutoff)?;
    let v = 2.0 * alpha * alpha + 1.0;
    let mut worst: f64 = 0.0;
    for rho in [state.reduced_a(), state.reduced_b()] {
        for theta in [0.0, std::f64::consts::FRAC_PI_2] {
            worst = worst.max((rho.quadrature_variance(theta) - v).abs());
        }
    }
    Ok(worst)
}

fn positivity(alpha: f64, a: &VerifyArgs) -> Result<f64, Error> {
    let state = four_state_entangled(alpha, a.cutoff)?;
    let beta = Complex64::new(a.displacement, 0.0);
    let lambda = a.lambda2.sqrt();
    let min = [
        state.reduced_a(),
        state.reduced_b(),
        displaced_thermal(beta, lambda, a.cutoff)?,
        amplify_displaced_thermal(beta, lambda, a.gain, a.cutoff)?,
    ]
    .iter()
    .map(|rho| rho.min_eigenvalue())
    .fold(f64::INFINITY, f64::min);
    Ok((-min).max(0.0))
}

pub fn verify(a: &VerifyArgs) -> Result<(Table, bool), CliError> {
    let p = protocol(&a.protocol)?;
    let alpha = p.alpha();
    let loss = a.loss_db.unwrap_or(10.0 * 2f64.log10());
    let ch = channel(loss, a.eps)?;
    let beta = Complex64::new(a.displacement, 0.0);
    let lambda = a.lambda2.sqrt();
    let gl2 = a.gain * a.gain * a.lambda2;
    let amplified = amplify_displaced_thermal(beta, lambda, a.gain, a.cutoff);
    let mixture = oracle_output_variance(&p, &ch, a.gain, a.cutoff);
    let eq = equivalent_channel(&ch, a.gain, alpha);

    let checks = [
        Check {
            name: "orthonormality",
            tolerance: 1e-10,
            deviation: orthonormality(alpha, a.cutoff),
        },
        Check {
            name: "correlation_z",
            tolerance: 1e-8,
            deviation: oracle_z(alpha, a.cutoff).map(|z| (z - correlation_z(alpha)).abs()),
        },
        Check {
            name: "mode_variance",
            tolerance: 1e-8,
            deviation: mode_variances(alpha, a.cutoff),
        },
        Check {
            name: "nla_mean",
            tolerance: 1e-5,
            deviation: amplified
                .as_ref()
                .map(|r| (r.mean_annihilation() - beta * (a.gain * (1.0 - a.lambda2) / (1.0 - gl2))).norm())
                .map_err(Clone::clone),
        },
        Check {
            name: "nla_thermal",
            tolerance: 1e-5,
            deviation: amplified
                .as_ref()
                .map(|r| (r.thermal_parameter() - gl2).abs())
                .map_err(Clone::clone),
        },
        Check {
            name: "mixture_variance",
            tolerance: 1e-5,
            deviation: mixture
                .as_ref()
                .map(|v| (v - amplified_output_variance(&p, &ch, a.gain)).abs())
                .map_err(Clone::clone),
        },
        Check {
            name: "equivalent_channel",
            tolerance: 1e-5,
            deviation: mixture
                .as_ref()
                .map(|v| (v - (1.0 + eq.eta * eq.eps_g + 2.0 * eq.eta * p.alpha2())).abs())
                .map_err(Clone::clone),
        },
        Check {
            name: "positivity",
            tolerance: 1e-10,
            deviation: positivity(alpha, a),
        },
    ];

    let mut t = Table::new(vec!["check", "max_deviation", "tolerance", "status"]);
    for c in &checks {
        let status = match &c.deviation {
            Ok(_) if c.passed() => "pass",
            Ok(_) => "fail",
            Err(e) => {
                eprintln!("verify: {}: {e}", c.name);
                "error"
            }
        };
        let deviation = c.deviation.as_ref().map(|&d| cell(d)).unwrap_or_default();
        t.rows.push(vec![
            c.name.to_string(),
            deviation,
            cell(c.tolerance),
            status.to_string(),
        ]);
    }
    Ok((t, checks.iter().all(Check::passed)))
}
