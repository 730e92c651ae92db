use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A perfect matching on a set of grid indices, stored as `(low, high)`
/// pairs sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
}

impl Pairing {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        pairs.sort_unstable();
        pairs.dedup();
        Pairing { pairs }
    }

    pub fn partner(&self, index: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == index {
                Some(b)
            } else if b == index {
                Some(a)
            } else {
                None
            }
        })
    }

    /// True when every pair is a mirror pair `{k, n-1-k}`.
    pub fn is_nested(&self, n: usize) -> bool {
        self.pairs.iter().all(|&(a, b)| a + b == n - 1)
    }

    /// Relabels through `map`: the pair `{i, j}` becomes `{map[i], map[j]}`.
    pub fn mapped(&self, map: &[usize]) -> Pairing {
        Pairing::new(self.pairs.iter().map(|&(a, b)| (map[a], map[b])))
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(a, b)| format!("{{{a},{b}}}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub const MAX_PAIRING_ELEMENTS: usize = 12;

/// All perfect matchings on `0..m`; there are `(m-1)!!` of them.
pub fn enumerate_pairings(m: usize) -> Result<Vec<Pairing>> {
    if !m.is_multiple_of(2) {
        return Err(Error::Solver { stage: "pairings", message: format!("{m} elements cannot be paired") });
    }
    if m > MAX_PAIRING_ELEMENTS {
        return Err(Error::Solver {
            stage: "pairings",
            message: format!("{m} elements exceeds the enumeration limit {MAX_PAIRING_ELEMENTS}"),
        });
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m / 2);
    extend(&(0..m).collect::<Vec<_>>(), &mut current, &mut out);
    Ok(out)
}

fn extend(rest: &[usize], current: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
    let Some(&first) = rest.first() else {
        out.push(Pairing { pairs: current.clone() });
        return;
    };
    for k in 1..rest.len() {
        let partner = rest[k];
        let remaining: Vec<usize> = rest.iter().copied().filter(|&x| x != first && x != partner).collect();
        current.push((first, partner));
        extend(&remaining, current, out);
        current.pop();
    }
}
