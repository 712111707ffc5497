//! DC power-flow shift factors.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use super::{DataError, PowerSystem};

/// Returns a copy of `system` whose branches carry PTDF rows w.r.t.
/// `reference_bus`. The reference-bus entry of every row is zero.
pub fn build_sensitivities(system: &PowerSystem, reference_bus: usize) -> Result<PowerSystem, DataError> {
    let nb = system.buses.len();
    if reference_bus >= nb {
        return Err(DataError::Network(format!("reference bus {reference_bus} does not exist")));
    }
    check_connected(system)?;

    // reduced susceptance matrix over non-reference buses
    let others: Vec<usize> = (0..nb).filter(|&b| b != reference_bus).collect();
    let mut pos = vec![usize::MAX; nb];
    for (k, &b) in others.iter().enumerate() {
        pos[b] = k;
    }
    let n = others.len();
    let mut bmat = DMatrix::<f64>::zeros(n, n);
    for br in &system.branches {
        let y = 1.0 / br.reactance;
        let (f, t) = (br.from_bus, br.to_bus);
        if f != reference_bus {
            bmat[(pos[f], pos[f])] += y;
        }
        if t != reference_bus {
            bmat[(pos[t], pos[t])] += y;
        }
        if f != reference_bus && t != reference_bus {
            bmat[(pos[f], pos[t])] -= y;
            bmat[(pos[t], pos[f])] -= y;
        }
    }
    let x = if n == 0 {
        DMatrix::zeros(0, 0)
    } else {
        bmat.try_inverse().ok_or_else(|| DataError::Network("reduced susceptance matrix is singular".into()))?
    };
    // angle of bus `a` per MW injected at bus `b`
    let angle = |a: usize, b: usize| -> f64 {
        if a == reference_bus || b == reference_bus {
            0.0
        } else {
            x[(pos[a], pos[b])]
        }
    };

    let mut out = system.clone();
    for br in &mut out.branches {
        let row = (0..nb).map(|b| (angle(br.from_bus, b) - angle(br.to_bus, b)) / br.reactance).collect();
        br.sensitivity_row = Some(row);
    }
    Ok(out)
}

fn check_connected(system: &PowerSystem) -> Result<(), DataError> {
    let nb = system.buses.len();
    let mut adj = vec![Vec::new(); nb];
    for br in &system.branches {
        adj[br.from_bus].push(br.to_bus);
        adj[br.to_bus].push(br.from_bus);
    }
    let mut seen = vec![false; nb];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(b) = queue.pop_front() {
        for &n in &adj[b] {
            if !seen[n] {
                seen[n] = true;
                queue.push_back(n);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(b) => Err(DataError::Network(format!("network is disconnected: bus {} is unreachable", system.buses[b]))),
        None => Ok(()),
    }
}
