//! Splitting users between instantaneous (class-I) and statistical (class-S)
//! feedback by maximizing the covariance-only sum-rate bound.
//!
//! Users are pooled across cells in cell-major order; a single cell is the
//! one-cell case. With `f` class-I users each gets `floor(B_total / f)` bits.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rate::{BoundProblem, CellClasses, NetworkBeams};

/// Largest user count the exhaustive oracle accepts.
pub const MAX_EXHAUSTIVE_USERS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId {
    pub cell: usize,
    pub user: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Class-S users in the order they were selected.
    pub class_s_ordered: Vec<UserId>,
    /// Ascending.
    pub class_i: Vec<UserId>,
    /// `floor(B_total / K_I)`, zero when there are no class-I users.
    pub bits_per_i_user: u32,
    /// Best bound found with `f` class-I users, at index `K - f`.
    pub candidate_bounds: Vec<f64>,
    /// Number of class-I users in the chosen split.
    pub chosen_f: usize,
}

impl Classification {
    pub fn total_users(&self) -> usize {
        self.candidate_bounds.len() - 1
    }

    /// Bound of the chosen split.
    pub fn bound(&self) -> f64 {
        self.candidate_bounds[self.total_users() - self.chosen_f]
    }

    /// Per-cell class lists (ascending) for cells of the given sizes.
    pub fn cell_classes(&self, users_per_cell: &[usize]) -> Vec<CellClasses> {
        let mut out = vec![CellClasses::default(); users_per_cell.len()];
        for u in &self.class_i {
            out[u.cell].class_i.push(u.user);
        }
        for u in &self.class_s_ordered {
            out[u.cell].class_s.push(u.user);
        }
        out.iter().map(CellClasses::canonical).collect()
    }

    pub const CSV_HEADER: &'static str = "user_id,class,B_bits,chosen_f,bound_value";

    /// One row per user in pooled order; `user_id` is the pooled index.
    pub fn csv_rows(&self, users_per_cell: &[usize]) -> Vec<String> {
        let offsets: Vec<usize> = users_per_cell
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect();
        let mut rows: Vec<(usize, String)> = Vec::new();
        for u in &self.class_i {
            rows.push((offsets[u.cell] + u.user, "I".to_string()));
        }
        for u in &self.class_s_ordered {
            rows.push((offsets[u.cell] + u.user, "S".to_string()));
        }
        rows.sort();
        rows.into_iter()
            .map(|(id, class)| {
                let bits = if class == "I" { self.bits_per_i_user } else { 0 };
                format!("{id},{class},{bits},{},{:.6}", self.chosen_f, self.bound())
            })
            .collect()
    }
}

fn bits_for(b_total: u32, f: usize) -> u32 {
    if f == 0 {
        0
    } else {
        b_total / f as u32
    }
}

fn pooled_users(problem: &BoundProblem) -> Vec<UserId> {
    let beams = &problem.beams;
    (0..beams.cells())
        .flat_map(|cell| (0..beams.users_in(cell)).map(move |user| UserId { cell, user }))
        .collect()
}

/// Predicted beams keyed by bit count; predictions only change with `B`.
struct PredictionCache<'a> {
    problem: &'a BoundProblem,
    cache: HashMap<u32, Vec<Vec<usize>>>,
}

impl<'a> PredictionCache<'a> {
    fn new(problem: &'a BoundProblem) -> Self {
        Self {
            problem,
            cache: HashMap::new(),
        }
    }

    fn bound(&mut self, class_i: &[UserId], class_s: &[UserId], bits: u32) -> Result<f64> {
        let cells = self.problem.beams.cells();
        let mut classes = vec![CellClasses::default(); cells];
        for u in class_i {
            classes[u.cell].class_i.push(u.user);
        }
        for u in class_s {
            classes[u.cell].class_s.push(u.user);
        }
        let classes: Vec<CellClasses> = classes.iter().map(CellClasses::canonical).collect();
        let report = if class_i.is_empty() {
            self.problem.evaluate_with(&classes, &[])?
        } else {
            if !self.cache.contains_key(&bits) {
                self.cache.insert(bits, self.problem.predict_all(bits)?);
            }
            self.problem.evaluate_with(&classes, &self.cache[&bits])?
        };
        Ok(report.bound)
    }
}

fn first_max(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Greedy classification over all users of the problem.
///
/// Starting from all class-I, each step moves to class S the user whose move
/// gives the largest bound (lowest pooled index on ties). The `K + 1` bounds
/// along the way are the candidates; the first maximum wins, which prefers
/// more class-I users on exact ties.
pub fn greedy(problem: &BoundProblem, b_total: u32) -> Result<Classification> {
    let users = pooled_users(problem);
    let k = users.len();
    if k == 0 {
        return Err(Error::InvalidInput("no users to classify".into()));
    }
    let mut cache = PredictionCache::new(problem);
    let mut remaining = users.clone();
    let mut selected: Vec<UserId> = Vec::new();
    let mut candidate_bounds = vec![cache.bound(&remaining, &selected, bits_for(b_total, k))?];

    for f in (0..k).rev() {
        let bits = bits_for(b_total, f);
        let mut best: Option<(f64, usize)> = None;
        for pos in 0..remaining.len() {
            let mut class_i = remaining.clone();
            let moved = class_i.remove(pos);
            let mut class_s = selected.clone();
            class_s.push(moved);
            let value = cache.bound(&class_i, &class_s, bits)?;
            if best.is_none_or(|(bv, _)| value > bv) {
                best = Some((value, pos));
            }
        }
        let (value, pos) = best.expect("at least one class-I user remains");
        selected.push(remaining.remove(pos));
        candidate_bounds.push(value);
    }

    let idx = first_max(&candidate_bounds);
    let chosen_f = k - idx;
    let class_s_ordered = selected[..idx].to_vec();
    let mut class_i: Vec<UserId> = selected[idx..].to_vec();
    class_i.sort_unstable();
    Ok(Classification {
        class_s_ordered,
        class_i,
        bits_per_i_user: bits_for(b_total, chosen_f),
        candidate_bounds,
        chosen_f,
    })
}

/// Evaluates every split. Exact ties go to the lexicographically smallest
/// sorted class-S set.
pub fn exhaustive(problem: &BoundProblem, b_total: u32) -> Result<Classification> {
    let users = pooled_users(problem);
    let k = users.len();
    if k == 0 {
        return Err(Error::InvalidInput("no users to classify".into()));
    }
    if k > MAX_EXHAUSTIVE_USERS {
        return Err(Error::Capacity(format!(
            "exhaustive classification of {k} users exceeds the limit of {MAX_EXHAUSTIVE_USERS}"
        )));
    }
    let mut cache = PredictionCache::new(problem);
    let mut candidate_bounds = vec![f64::NEG_INFINITY; k + 1];
    let mut best: Option<(f64, Vec<UserId>)> = None;
    for mask in 0u32..(1 << k) {
        let class_s: Vec<UserId> = (0..k).filter(|&u| mask >> u & 1 == 1).map(|u| users[u]).collect();
        let class_i: Vec<UserId> = (0..k).filter(|&u| mask >> u & 1 == 0).map(|u| users[u]).collect();
        let f = class_i.len();
        let value = cache.bound(&class_i, &class_s, bits_for(b_total, f))?;
        let slot = &mut candidate_bounds[k - f];
        if value > *slot {
            *slot = value;
        }
        let better = match &best {
            None => true,
            Some((bv, bs)) => value > *bv || (value == *bv && class_s < *bs),
        };
        if better {
            best = Some((value, class_s));
        }
    }
    let (_, class_s) = best.expect("at least one split");
    let chosen_f = k - class_s.len();
    let class_i: Vec<UserId> = users.iter().copied().filter(|u| !class_s.contains(u)).collect();
    Ok(Classification {
        class_s_ordered: class_s,
        class_i,
        bits_per_i_user: bits_for(b_total, chosen_f),
        candidate_bounds,
        chosen_f,
    })
}

/// Greedy classification of one cell with full-span prediction grids.
pub fn greedy_classify(beams: &[Vec<f64>], b_total: u32, p_d: f64) -> Result<Classification> {
    greedy(&BoundProblem::new(NetworkBeams::single_cell(beams.to_vec())?, p_d)?, b_total)
}

pub fn exhaustive_classify(beams: &[Vec<f64>], b_total: u32, p_d: f64) -> Result<Classification> {
    exhaustive(&BoundProblem::new(NetworkBeams::single_cell(beams.to_vec())?, p_d)?, b_total)
}

/// Greedy over the pooled users of all cells with the network bound and a
/// network-wide bit budget.
pub fn multicell_classify(beams: &NetworkBeams, b_total: u32, p_d: f64) -> Result<Classification> {
    greedy(&BoundProblem::new(beams.clone(), p_d)?, b_total)
}

/// The conventional split: everyone class-I with `ceil(B_total / K)` bits.
pub fn conventional_bits(b_total: u32, k: usize) -> u32 {
    if k == 0 {
        0
    } else {
        b_total.div_ceil(k as u32)
    }
}
