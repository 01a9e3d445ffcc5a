//! Facility-location games and closed-form Shapley/Banzhaf solvers.
//!
//! For one customer `d`, facility `i` changes the served utility only when it
//! beats every open facility, so `MC_i(S)` restricted to `d` is non-zero only
//! for `S ⊆ L_id = { j ≠ i : u_jd < u_id }`. Grouping those coalitions by
//! their best member gives a per-customer sum over the facilities ranked
//! below `i`, which collapses to prefix sums over each customer's sorted
//! column. Both solvers therefore run in `O(|L|·|D|)` after sorting.
//!
//! `L_id` uses strict dominance with `i` excluded: a facility tied with `i`
//! already serves the customer equally well, so `i` adds nothing on top of
//! it, and the result does not depend on how ties are ordered.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::combinatorics::pow2;
use crate::error::{Error, Result};

/// Utilities `u[i][d] ≥ 0` of customer `d` for facility `i`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityMatrix {
    n_facilities: usize,
    n_customers: usize,
    data: Vec<f64>,
}

impl UtilityMatrix {
    pub fn new(n_facilities: usize, n_customers: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_facilities * n_customers {
            return Err(Error::InvalidGame(format!(
                "{n_facilities}x{n_customers} utility matrix needs {} entries, got {}",
                n_facilities * n_customers,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|u| !u.is_finite() || *u < 0.0) {
            return Err(Error::InvalidGame(format!(
                "utility of facility {} for customer {} is {}, expected a finite non-negative value",
                pos / n_customers.max(1),
                pos % n_customers.max(1),
                data[pos]
            )));
        }
        Ok(UtilityMatrix {
            n_facilities,
            n_customers,
            data,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_customers = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != n_customers) {
            return Err(Error::InvalidGame(format!(
                "row {i} has {} customers, expected {n_customers}",
                rows[i].len()
            )));
        }
        let n_facilities = rows.len();
        Self::new(n_facilities, n_customers, rows.concat())
    }

    pub fn n_facilities(&self) -> usize {
        self.n_facilities
    }

    pub fn n_customers(&self) -> usize {
        self.n_customers
    }

    pub fn get(&self, facility: usize, customer: usize) -> f64 {
        self.data[facility * self.n_customers + customer]
    }

    pub fn row(&self, facility: usize) -> &[f64] {
        &self.data[facility * self.n_customers..(facility + 1) * self.n_customers]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_facilities).map(|i| self.row(i))
    }

    /// `Fac(S) = Σ_d max_{i∈S} u_id`, with `Fac(∅) = 0`.
    pub fn value(&self, s: Coalition) -> f64 {
        let mut best = vec![0.0f64; self.n_customers];
        for i in s.members() {
            for (b, &u) in best.iter_mut().zip(self.row(i)) {
                if u > *b {
                    *b = u;
                }
            }
        }
        best.iter().sum()
    }

    /// Appends `k` copies of facility `i`'s row.
    pub fn with_replicas(&self, facility: usize, k: usize) -> Result<Self> {
        if facility >= self.n_facilities {
            return Err(Error::InvalidPlayer {
                player: facility,
                n_players: self.n_facilities,
            });
        }
        let mut data = self.data.clone();
        for _ in 0..k {
            data.extend_from_slice(self.row(facility));
        }
        Self::new(self.n_facilities + k, self.n_customers, data)
    }

    /// Reads the CSV layout: a header `d0,d1,...`, then one row per facility.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        for (d, h) in headers.iter().enumerate() {
            if h.trim() != format!("d{d}") {
                return Err(Error::InvalidGame(format!(
                    "expected header column d{d}, found {h:?}"
                )));
            }
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| {
                        Error::InvalidGame(format!("bad utility {f:?} on facility row {}: {e}", rows.len()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let m = Self::from_rows(rows)?;
        if m.n_facilities > 0 && m.n_customers != headers.len() {
            return Err(Error::InvalidGame("row width does not match header".to_string()));
        }
        Ok(m)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record((0..self.n_customers).map(|d| format!("d{d}")))?;
        for row in self.rows() {
            w.write_record(row.iter().map(|u| u.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Facilities of each customer sorted by ascending utility, ties broken by
/// ascending facility index.
#[derive(Clone, Debug)]
pub struct SortedDimension {
    n_facilities: usize,
    /// `order[d][t]` is the facility at sorted position `t` for customer `d`.
    order: Vec<Vec<usize>>,
    /// `rank[i][d]` is facility `i`'s sorted position for customer `d`.
    rank: Vec<Vec<usize>>,
}

impl SortedDimension {
    pub fn new(m: &UtilityMatrix) -> Self {
        let n = m.n_facilities();
        let mut rank = vec![vec![0; m.n_customers()]; n];
        let order = (0..m.n_customers())
            .map(|d| {
                let mut col: Vec<usize> = (0..n).collect();
                col.sort_by(|&a, &b| m.get(a, d).total_cmp(&m.get(b, d)).then(a.cmp(&b)));
                for (t, &i) in col.iter().enumerate() {
                    rank[i][d] = t;
                }
                col
            })
            .collect();
        SortedDimension {
            n_facilities: n,
            order,
            rank,
        }
    }

    pub fn order(&self, customer: usize) -> &[usize] {
        &self.order[customer]
    }

    pub fn rank(&self, facility: usize, customer: usize) -> usize {
        self.rank[facility][customer]
    }

    /// `|L_id|` for every sorted position of customer `d`: the number of
    /// facilities with strictly smaller utility.
    fn strictly_below(&self, m: &UtilityMatrix, d: usize) -> Vec<usize> {
        let col = &self.order[d];
        let mut below = vec![0; self.n_facilities];
        for t in 1..col.len() {
            below[t] = if m.get(col[t], d) == m.get(col[t - 1], d) {
                below[t - 1]
            } else {
                t
            };
        }
        below
    }
}

/// Exact Shapley values of the facility-location game.
///
/// Per customer, with `m = |L_id|` and `σ` the ascending order,
/// `φ_i += u_id / (n - m) - Σ_{q<m} u_σ(q) / ((n-1-q)(n-q))`.
pub fn fast_shapley(m: &UtilityMatrix) -> Vec<f64> {
    let n = m.n_facilities();
    let sorted = SortedDimension::new(m);
    let mut phi = vec![0.0; n];
    let mut contrib = vec![vec![0.0; n]; m.n_customers()];
    for (d, per_customer) in contrib.iter_mut().enumerate() {
        let col = sorted.order(d);
        let below = sorted.strictly_below(m, d);
        // prefix[q] = Σ_{s<q} u_σ(s) / ((n-1-s)(n-s))
        let mut prefix = vec![0.0; n + 1];
        for (s, &f) in col.iter().enumerate() {
            let lambda = (n - 1 - s) as f64;
            prefix[s + 1] = prefix[s] + m.get(f, d) / (lambda * (lambda + 1.0));
        }
        for (t, &i) in col.iter().enumerate() {
            let l = below[t];
            per_customer[i] = m.get(i, d) / (n - l) as f64 - prefix[l];
        }
    }
    // Fixed reduction order: ascending customer.
    for per_customer in &contrib {
        for (p, c) in phi.iter_mut().zip(per_customer) {
            *p += c;
        }
    }
    phi
}

/// Exact Banzhaf values of the facility-location game.
///
/// Per customer: `φ_i += 2^{m-(n-1)} u_id - Σ_{q<m} 2^{q-(n-1)} u_σ(q)`.
/// Exponents are shifted by `n-1` before exponentiation, so the result stays
/// finite for any `n`.
pub fn fast_banzhaf(m: &UtilityMatrix) -> Vec<f64> {
    let n = m.n_facilities();
    let sorted = SortedDimension::new(m);
    let shift = n as i64 - 1;
    let mut phi = vec![0.0; n];
    for d in 0..m.n_customers() {
        let col = sorted.order(d);
        let below = sorted.strictly_below(m, d);
        let mut prefix = vec![0.0; n + 1];
        for (q, &f) in col.iter().enumerate() {
            prefix[q + 1] = prefix[q] + pow2(q as i64 - shift) * m.get(f, d);
        }
        for (t, &i) in col.iter().enumerate() {
            let l = below[t];
            phi[i] += pow2(l as i64 - shift) * m.get(i, d) - prefix[l];
        }
    }
    phi
}

/// How utilities are drawn by [`generate_facility_game`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum FacilityLayout {
    /// Integers uniform in `[low, high]`.
    UniformInt { low: u32, high: u32 },
    /// Facilities and customers placed uniformly on a `size × size` grid with
    /// `u = max(0, 100 - manhattan distance)`.
    ManhattanMap { size: u32 },
}

impl FacilityLayout {
    pub const MANHATTAN_PEAK: f64 = 100.0;
}

pub fn generate_facility_game(
    n_facilities: usize,
    n_customers: usize,
    layout: FacilityLayout,
    seed: u64,
) -> Result<UtilityMatrix> {
    if n_facilities == 0 || n_customers == 0 {
        return Err(Error::InvalidArgument(
            "facility and customer counts must be positive".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = match layout {
        FacilityLayout::UniformInt { low, high } => {
            if low > high {
                return Err(Error::InvalidArgument(format!("empty utility range {low}..={high}")));
            }
            (0..n_facilities * n_customers)
                .map(|_| rng.gen_range(low..=high) as f64)
                .collect()
        }
        FacilityLayout::ManhattanMap { size } => {
            if size == 0 {
                return Err(Error::InvalidArgument("map size must be positive".to_string()));
            }
            let mut place = |count: usize| -> Vec<(i64, i64)> {
                (0..count)
                    .map(|_| (rng.gen_range(0..size) as i64, rng.gen_range(0..size) as i64))
                    .collect()
            };
            let facilities = place(n_facilities);
            let customers = place(n_customers);
            facilities
                .iter()
                .flat_map(|f| {
                    customers.iter().map(move |c| {
                        let dist = (f.0 - c.0).abs() + (f.1 - c.1).abs();
                        (FacilityLayout::MANHATTAN_PEAK - dist as f64).max(0.0)
                    })
                })
                .collect()
        }
    };
    UtilityMatrix::new(n_facilities, n_customers, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_customer() -> UtilityMatrix {
        UtilityMatrix::from_rows(vec![vec![2.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn facility_value_examples() {
        let m = one_customer();
        assert_eq!(m.value(Coalition::singleton(1)), 1.0);
        assert_eq!(m.value(Coalition::EMPTY), 0.0);
        let r = UtilityMatrix::from_rows(vec![vec![1.0, 5.0], vec![3.0, 2.0]]).unwrap();
        assert_eq!(r.value(Coalition::grand(2)), 3.0 + 5.0);
    }

    #[test]
    fn two_facility_closed_forms() {
        // Orderings (0,1): 2 then 0; (1,0): 1 then 1. Shapley = (1.5, 0.5).
        assert_eq!(fast_shapley(&one_customer()), vec![1.5, 0.5]);
        // MC_0: {2, 1}, MC_1: {1, 0}; averaged over 2 coalitions each.
        assert_eq!(fast_banzhaf(&one_customer()), vec![1.5, 0.5]);
    }

    #[test]
    fn tied_column_splits_evenly() {
        let m = UtilityMatrix::from_rows(vec![vec![6.0, 1.0], vec![6.0, 2.0], vec![6.0, 0.0]]).unwrap();
        let phi = fast_shapley(&m);
        // Customer 0 contributes 6/3 to everyone.
        let m2 = UtilityMatrix::from_rows(vec![vec![1.0], vec![2.0], vec![0.0]]).unwrap();
        let phi2 = fast_shapley(&m2);
        for i in 0..3 {
            assert!((phi[i] - (2.0 + phi2[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn sorted_dimension_is_a_permutation() {
        let m = UtilityMatrix::from_rows(vec![vec![3.0, 1.0], vec![1.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let s = SortedDimension::new(&m);
        assert_eq!(s.order(0), &[1, 2, 0]);
        assert_eq!(s.order(1), &[2, 0, 1]);
        for d in 0..2 {
            for (t, &i) in s.order(d).iter().enumerate() {
                assert_eq!(s.rank(i, d), t);
            }
        }
        assert_eq!(s.strictly_below(&m, 1), vec![0, 1, 1]);
    }

    #[test]
    fn banzhaf_is_finite_for_many_facilities() {
        let m = generate_facility_game(64, 5, FacilityLayout::UniformInt { low: 0, high: 20 }, 1).unwrap();
        assert!(fast_banzhaf(&m).iter().all(|v| v.is_finite()));
        let big = generate_facility_game(1500, 2, FacilityLayout::UniformInt { low: 0, high: 20 }, 1).unwrap();
        assert!(fast_banzhaf(&big).iter().all(|v| v.is_finite()));
        assert!(fast_shapley(&big).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn generator_is_deterministic_and_in_range() {
        let layout = FacilityLayout::UniformInt { low: 0, high: 20 };
        let a = generate_facility_game(10, 10, layout, 42).unwrap();
        assert_eq!(a, generate_facility_game(10, 10, layout, 42).unwrap());
        assert_ne!(a, generate_facility_game(10, 10, layout, 43).unwrap());
        assert!(a.rows().flatten().all(|&u| (0.0..=20.0).contains(&u) && u.fract() == 0.0));

        let map = generate_facility_game(20, 50, FacilityLayout::ManhattanMap { size: 50 }, 7).unwrap();
        assert_eq!((map.n_facilities(), map.n_customers()), (20, 50));
        // On a 50x50 grid the largest distance is 98, so every utility is in [2, 100].
        assert!(map.rows().flatten().all(|&u| (2.0..=100.0).contains(&u)));
        assert!(generate_facility_game(0, 3, layout, 1).is_err());
    }

    #[test]
    fn csv_round_trip_and_header_check() {
        let m = UtilityMatrix::from_rows(vec![vec![1.5, 0.0], vec![2.0, 3.0]]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("d0,d1\n"));
        assert_eq!(UtilityMatrix::read_csv(buf.as_slice()).unwrap(), m);
        assert!(UtilityMatrix::read_csv("x0,x1\n1,2\n".as_bytes()).is_err());
        assert!(UtilityMatrix::read_csv("d0,d1\n1,-2\n".as_bytes()).is_err());
    }

    #[test]
    fn replicas_duplicate_rows() {
        let m = one_customer().with_replicas(0, 2).unwrap();
        assert_eq!(m.n_facilities(), 4);
        assert_eq!(m.row(2), &[2.0]);
        assert_eq!(m.row(3), &[2.0]);
    }
}
