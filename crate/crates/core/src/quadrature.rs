use gauss_quad::GaussLegendre;

use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> Result<Vec<(f64, f64)>> {
    match order {
        0 => Err(Error::InvalidArgument("quadrature order must be at least 1".into())),
        1 => Ok(vec![(0.0, 2.0)]),
        _ => {
            let rule = GaussLegendre::new(order)
                .map_err(|e| Error::InvalidArgument(format!("quadrature order {order}: {e}")))?;
            let mut pairs = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Ok(pairs)
        }
    }
}

/// Tensor-product rule over one cell, as (offset along x, offset along y, area fraction).
pub fn cell_rule(order: usize, dx: f64, dy: f64) -> Result<Vec<(f64, f64, f64)>> {
    let gl = gauss_legendre(order)?;
    let mut out = Vec::with_capacity(order * order);
    for &(xi, wi) in &gl {
        for &(eta, wj) in &gl {
            out.push((0.5 * dx * xi, 0.5 * dy * eta, 0.25 * wi * wj));
        }
    }
    Ok(out)
}
