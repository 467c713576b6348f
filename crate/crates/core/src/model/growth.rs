use serde::{Deserialize, Serialize};

use super::{perron, strongly_connected_components, InteractionMatrix};

/// Predicted leading growth `S_{t,h} ≈ C · t^{exponent_h} · (ln t)^{log_power_h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthPrediction {
    pub exponent: Vec<f64>,
    pub log_power: Vec<u32>,
    /// Perron root of each strongly connected component, indexed like the
    /// components of [`strongly_connected_components`].
    pub component_roots: Vec<f64>,
}

// Two component roots closer than this are treated as equal when chaining
// log factors.
const ROOT_TIE: f64 = 1e-9;

/// Growth exponents for a possibly reducible matrix.
///
/// The exponent of process `h` is the largest component Perron root among the
/// components that can reach `h`'s component (its own included). The power of
/// `ln t` is one less than the largest number of components attaining that
/// root along a single condensation path ending at `h`'s component.
pub fn growth_exponents(matrix: &InteractionMatrix) -> GrowthPrediction {
    let cond = strongly_connected_components(matrix);
    let roots: Vec<f64> = cond
        .components
        .iter()
        .map(|members| component_root(matrix, members))
        .collect();

    let k = cond.components.len();
    let mut best = vec![0.0f64; k];
    let mut chain = vec![0u32; k];
    // Components are topologically ordered, so predecessors are final.
    for c in 0..k {
        let inherited = cond
            .predecessors(c)
            .map(|p| best[p])
            .fold(f64::NEG_INFINITY, f64::max);
        let top = roots[c].max(inherited);
        let mut count = 0u32;
        for p in cond.predecessors(c) {
            if (best[p] - top).abs() <= ROOT_TIE {
                count = count.max(chain[p]);
            }
        }
        if (roots[c] - top).abs() <= ROOT_TIE {
            count += 1;
        }
        best[c] = top;
        chain[c] = count;
    }

    let n = matrix.n();
    let mut exponent = vec![0.0; n];
    let mut log_power = vec![0u32; n];
    for h in 0..n {
        let c = cond.component_of[h];
        exponent[h] = best[c];
        log_power[h] = chain[c].saturating_sub(1);
    }
    GrowthPrediction {
        exponent,
        log_power,
        component_roots: roots,
    }
}

fn component_root(matrix: &InteractionMatrix, members: &[usize]) -> f64 {
    if members.len() == 1 {
        return matrix.get(members[0], members[0]);
    }
    let rows: Vec<Vec<f64>> = members
        .iter()
        .map(|&j| members.iter().map(|&h| matrix.get(j, h)).collect())
        .collect();
    let sub = InteractionMatrix::validate(&rows).expect("principal submatrix of a valid matrix");
    perron(&sub)
        .expect("strongly connected component is irreducible")
        .gamma_star
}
