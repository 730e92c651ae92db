use std::collections::BTreeMap;

use itertools::Itertools;
use serde::Serialize;

use super::{
    choose_infinity, diagonalize, enumerate_pairings, find_counterdiagonal, initial_grid, nest_squares,
    residual_arrangements, AxisChoice, Pairing,
};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::plane::{generate_plane, remove_image_set, Order};

/// Largest order whose `(n-1)!` paired orbit we enumerate.
pub const MAX_ORBIT_ORDER: u32 = 11;

/// Largest order whose `h!·2^h` residual group we enumerate.
pub const MAX_RESIDUAL_ORDER: u32 = 13;

/// Size of the residual group, `h!·2^h` with `h = (n-1)/2`.
pub fn residual_group_size(order: Order) -> Result<u128> {
    let h = order.middle()? as u128;
    Ok((1..=h).product::<u128>() << h)
}

/// Number of ways to set up the grid: infinity image, row card, column
/// card, then row order and column order.
pub fn setup_count(order: Order) -> u128 {
    let n = order.n() as u128;
    let factorial: u128 = (1..=n).product();
    (n * n + n + 1) * (n + 1) * n * factorial * factorial
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitCount {
    pub orbit_size: usize,
    pub solutions: usize,
    /// How many orbit members show each counterdiagonal pairing pattern.
    pub by_pairing: BTreeMap<Pairing, usize>,
}

/// Applies every permutation of the non-middle indices to rows and columns
/// alike, and counts the arrangements that satisfy the placement rule.
pub fn count_paired_orbit(grid: &Grid) -> Result<OrbitCount> {
    let order = grid.order();
    if order.get() > MAX_ORBIT_ORDER {
        return Err(Error::Solver {
            stage: "counts",
            message: format!("paired orbit of order {order} is too large to enumerate"),
        });
    }
    let n = order.n();
    let h = order.middle()?;
    let (_, base_pairing) = find_counterdiagonal(grid)?;
    let others: Vec<usize> = (0..n).filter(|&i| i != h).collect();
    let mut orbit_size = 0;
    let mut solutions = 0;
    let mut by_pairing = BTreeMap::new();
    let mut src: Vec<usize> = (0..n).collect();
    let mut inverse = vec![0; n];
    for perm in others.iter().copied().permutations(others.len()) {
        for (&slot, &value) in others.iter().zip(&perm) {
            src[slot] = value;
        }
        for (new, &old) in src.iter().enumerate() {
            inverse[old] = new;
        }
        orbit_size += 1;
        if grid.permuted(&src, &src).rule_holds() {
            solutions += 1;
        }
        *by_pairing.entry(base_pairing.mapped(&inverse)).or_insert(0) += 1;
    }
    Ok(OrbitCount { orbit_size, solutions, by_pairing })
}

/// Size of the residual group and how many of its arrangements of `grid`
/// satisfy the placement rule.
pub fn count_residual(grid: &Grid) -> Result<(usize, usize)> {
    if grid.order().get() > MAX_RESIDUAL_ORDER {
        return Err(Error::Solver {
            stage: "counts",
            message: format!("residual group of order {} is too large to enumerate", grid.order()),
        });
    }
    let n = grid.order().n();
    let arrangements = residual_arrangements(grid.order())?;
    let solutions = arrangements
        .iter()
        .filter(|a| {
            let src = a.source(n);
            grid.permuted(&src, &src).rule_holds()
        })
        .count();
    Ok((arrangements.len(), solutions))
}

#[derive(Debug, Clone, Serialize)]
pub struct CountsReport {
    pub order: u32,
    pub setup_count: u128,
    /// `None` above `MAX_ORBIT_ORDER`.
    pub orbit: Option<OrbitCount>,
    pub pairings: usize,
    pub residual_size: u128,
    /// `None` above `MAX_RESIDUAL_ORDER`.
    pub residual_solutions: Option<usize>,
}

/// Computes every count on the canonical deck of `order`.
pub fn counts_report(order: Order) -> Result<CountsReport> {
    order.middle()?;
    let deck = generate_plane(order);
    let infinity = choose_infinity(&deck)?;
    let (affine, inf) = remove_image_set(&deck, infinity)?;
    let axes = AxisChoice::default_for(infinity, &inf)?;
    let (diag, _) = diagonalize(&initial_grid(order, &affine, &axes)?)?;
    let orbit = if order.get() <= MAX_ORBIT_ORDER { Some(count_paired_orbit(&diag)?) } else { None };
    let pairings = enumerate_pairings(order.n() - 1).map(|p| p.len()).unwrap_or(0);
    let (_, pairing) = find_counterdiagonal(&diag)?;
    let (nested, _) = nest_squares(&diag, &pairing)?;
    let residual_size = residual_group_size(order)?;
    let residual_solutions = if order.get() <= MAX_RESIDUAL_ORDER {
        let (size, solutions) = count_residual(&nested)?;
        debug_assert_eq!(size as u128, residual_size);
        Some(solutions)
    } else {
        None
    };
    Ok(CountsReport { order: order.get(), setup_count: setup_count(order), orbit, pairings, residual_size, residual_solutions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setup_count_n7() {
        let n7 = Order::new(7).unwrap();
        assert_eq!(setup_count(n7), 57 * 8 * 7 * 5040 * 5040);
        assert_eq!(setup_count(n7), 81_081_907_200);
    }

    #[test]
    fn counts_n3() {
        let report = counts_report(Order::new(3).unwrap()).unwrap();
        let orbit = report.orbit.unwrap();
        assert_eq!((orbit.orbit_size, orbit.solutions), (2, 2));
        assert_eq!(report.pairings, 1);
        assert_eq!((report.residual_size, report.residual_solutions), (2, Some(2)));
    }

    #[test]
    fn counts_n5() {
        let report = counts_report(Order::new(5).unwrap()).unwrap();
        let orbit = report.orbit.unwrap();
        assert_eq!(orbit.orbit_size, 24);
        assert_eq!(report.pairings, 3);
        assert_eq!(report.residual_size, 8);
        assert_eq!(orbit.by_pairing.len(), 3);
        assert!(orbit.by_pairing.values().all(|&c| c == 8));
        assert_eq!(Some(orbit.solutions), report.residual_solutions);
    }

    #[test]
    fn residual_group_sizes() {
        let size = |n| residual_group_size(Order::new(n).unwrap()).unwrap();
        assert_eq!(size(7), 48);
        assert_eq!(size(13), 720 * 64);
        assert_eq!(size(31), 1_307_674_368_000 << 15);
    }

    #[test]
    fn large_orders_skip_enumeration() {
        let report = counts_report(Order::new(17).unwrap()).unwrap();
        assert!(report.orbit.is_none());
        assert_eq!(report.residual_solutions, None);
        assert_eq!(report.residual_size, 40320 * 256);
    }
}
