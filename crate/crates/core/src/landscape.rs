//! NK fitness landscapes.
//!
//! A landscape has `n` binary components. Component `i` contributes a value
//! looked up from its own table, indexed by its own bit followed by the bits
//! of its `k` neighbours (most significant first). Fitness is the arithmetic
//! mean of the `n` contributions.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::config::{Configuration, MAX_COMPONENTS};
use crate::error::{Error, Result};
use crate::scalar::Fitness;
use crate::search::neighborhood_masks;
use crate::seed::rng_for;

/// Largest `n` for which exhaustive `2^n` scans are attempted.
pub const MAX_ENUMERATION_N: usize = 20;

/// Largest `k`; each table holds `2^(k+1)` entries.
pub const MAX_K: usize = 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborScheme {
    /// `k` distinct other components drawn uniformly without replacement.
    #[default]
    Random,
    /// The `k` cyclically following components.
    Adjacent,
}

impl fmt::Display for NeighborScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeighborScheme::Random => "random",
            NeighborScheme::Adjacent => "adjacent",
        })
    }
}

impl FromStr for NeighborScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(NeighborScheme::Random),
            "adjacent" => Ok(NeighborScheme::Adjacent),
            other => Err(Error::param(format!("unknown neighbor scheme {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Fitness")]
pub struct Landscape<F> {
    n: usize,
    k: usize,
    scheme: NeighborScheme,
    seed: u64,
    neighbors: Vec<Vec<usize>>,
    tables: Vec<Vec<F>>,
}

fn check_shape(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    if n > MAX_COMPONENTS {
        return Err(Error::Capacity {
            what: "n",
            value: n,
            limit: MAX_COMPONENTS,
        });
    }
    if k >= n {
        return Err(Error::param(format!(
            "k must be in [0, n-1], got k={k} with n={n}"
        )));
    }
    if k > MAX_K {
        return Err(Error::Capacity {
            what: "k",
            value: k,
            limit: MAX_K,
        });
    }
    Ok(())
}

impl<F: Fitness> Landscape<F> {
    /// Generates a landscape reproducibly from `seed`.
    pub fn generate(n: usize, k: usize, scheme: NeighborScheme, seed: u64) -> Result<Self> {
        check_shape(n, k)?;
        let mut rng = rng_for(seed, 0);
        let neighbors = (0..n)
            .map(|i| match scheme {
                NeighborScheme::Random => index::sample(&mut rng, n - 1, k)
                    .into_iter()
                    .map(|j| if j >= i { j + 1 } else { j })
                    .collect(),
                NeighborScheme::Adjacent => (1..=k).map(|o| (i + o) % n).collect(),
            })
            .collect();
        let width = 1usize << (k + 1);
        let tables = (0..n)
            .map(|_| (0..width).map(|_| F::sample_unit(&mut rng)).collect())
            .collect();
        Ok(Self {
            n,
            k,
            scheme,
            seed,
            neighbors,
            tables,
        })
    }

    /// Assembles a landscape from explicit parts, checking every invariant.
    pub fn from_parts(
        n: usize,
        k: usize,
        scheme: NeighborScheme,
        seed: u64,
        neighbors: Vec<Vec<usize>>,
        tables: Vec<Vec<F>>,
    ) -> Result<Self> {
        let landscape = Self {
            n,
            k,
            scheme,
            seed,
            neighbors,
            tables,
        };
        landscape.validate()?;
        Ok(landscape)
    }

    fn validate(&self) -> Result<()> {
        check_shape(self.n, self.k)?;
        if self.neighbors.len() != self.n || self.tables.len() != self.n {
            return Err(Error::Format(format!(
                "expected {} neighbor lists and tables, got {} and {}",
                self.n,
                self.neighbors.len(),
                self.tables.len()
            )));
        }
        for (i, list) in self.neighbors.iter().enumerate() {
            if list.len() != self.k {
                return Err(Error::Format(format!(
                    "component {i} has {} neighbors, expected {}",
                    list.len(),
                    self.k
                )));
            }
            let distinct: BTreeSet<_> = list.iter().collect();
            if distinct.len() != list.len() || list.iter().any(|&j| j == i || j >= self.n) {
                return Err(Error::Format(format!(
                    "component {i} has an invalid neighbor list {list:?}"
                )));
            }
        }
        let width = 1usize << (self.k + 1);
        for (i, table) in self.tables.iter().enumerate() {
            if table.len() != width {
                return Err(Error::Format(format!(
                    "table {i} has {} entries, expected {width}",
                    table.len()
                )));
            }
            if let Some(v) = table.iter().find(|v| !(**v >= F::zero() && **v < F::one())) {
                return Err(Error::Format(format!(
                    "table {i} has entry {v} outside [0, 1)"
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn scheme(&self) -> NeighborScheme {
        self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn neighbors(&self, component: usize) -> &[usize] {
        &self.neighbors[component]
    }

    pub fn table(&self, component: usize) -> &[F] {
        &self.tables[component]
    }

    /// Table row used by `component` at position `x`.
    #[inline]
    pub fn table_index(&self, component: usize, x: &Configuration) -> usize {
        self.neighbors[component]
            .iter()
            .fold(x.get(component) as usize, |acc, &j| {
                (acc << 1) | x.get(j) as usize
            })
    }

    #[inline]
    pub fn contribution(&self, component: usize, x: &Configuration) -> F {
        self.tables[component][self.table_index(component, x)]
    }

    /// Mean contribution over all components.
    pub fn fitness(&self, x: &Configuration) -> Result<F> {
        x.ensure_len(self.n)?;
        Ok(self.fitness_unchecked(x))
    }

    #[inline]
    pub(crate) fn fitness_unchecked(&self, x: &Configuration) -> F {
        let sum = (0..self.n).fold(F::zero(), |acc, i| acc + self.contribution(i, x));
        (sum / F::from_usize(self.n).expect("n fits the scalar")).clamp_unit()
    }

    /// Argmax over all `2^n` configurations; ties go to the lexicographically
    /// smallest bit sequence.
    pub fn global_optimum(&self) -> Result<(Configuration, F)> {
        check_enumerable(self.n)?;
        let mut best = (Configuration::zeros(self.n)?, F::neg_infinity());
        for idx in 0..(1u64 << self.n) {
            let x = Configuration::from_index(idx, self.n)?;
            let v = self.fitness_unchecked(&x);
            if v > best.1 {
                best = (x, v);
            }
        }
        Ok(best)
    }

    /// Writes the landscape as JSON. Reals use shortest round-trip notation.
    pub fn dump<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn load<R: Read>(reader: R) -> Result<Self> {
        let landscape: Self =
            serde_json::from_reader(reader).map_err(|e| Error::Format(e.to_string()))?;
        landscape.validate()?;
        Ok(landscape)
    }
}

fn check_enumerable(n: usize) -> Result<()> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::Capacity {
            what: "n for exhaustive enumeration",
            value: n,
            limit: MAX_ENUMERATION_N,
        });
    }
    Ok(())
}

/// Every configuration with no strictly better configuration within Hamming
/// radius `d`, found by exhaustive scan of all `2^n` configurations.
pub fn enumerate_local_peaks<F, E>(
    evaluate: E,
    n: usize,
    d: usize,
) -> Result<BTreeSet<Configuration>>
where
    F: Fitness,
    E: Fn(&Configuration) -> F,
{
    check_enumerable(n)?;
    if d == 0 || d > n {
        return Err(Error::param(format!(
            "radius must be in [1, n], got d={d} with n={n}"
        )));
    }
    let size = 1u64 << n;
    let values = (0..size)
        .map(|idx| Configuration::from_index(idx, n).map(|x| evaluate(&x)))
        .collect::<Result<Vec<F>>>()?;
    let masks = neighborhood_masks(n, d);
    let mut peaks = BTreeSet::new();
    for idx in 0..size {
        let v = values[idx as usize];
        if masks.iter().all(|&m| values[(idx ^ m) as usize] <= v) {
            peaks.insert(Configuration::from_index(idx, n)?);
        }
    }
    Ok(peaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn separable(n: usize, low: f64, high: f64) -> Landscape<f64> {
        Landscape::from_parts(
            n,
            0,
            NeighborScheme::Random,
            0,
            vec![vec![]; n],
            vec![vec![low, high]; n],
        )
        .unwrap()
    }

    #[test]
    fn generated_shapes() {
        let l = Landscape::<f64>::generate(10, 5, NeighborScheme::Random, 3).unwrap();
        assert_eq!(l.n(), 10);
        for i in 0..10 {
            assert_eq!(l.table(i).len(), 64);
            assert_eq!(l.neighbors(i).len(), 5);
        }
        let l0 = Landscape::<f64>::generate(10, 0, NeighborScheme::Random, 3).unwrap();
        for i in 0..10 {
            assert_eq!(l0.table(i).len(), 2);
            assert!(l0.neighbors(i).is_empty());
        }
    }

    #[test]
    fn adjacent_scheme_wraps() {
        let l = Landscape::<f64>::generate(5, 2, NeighborScheme::Adjacent, 1).unwrap();
        assert_eq!(l.neighbors(0), &[1, 2]);
        assert_eq!(l.neighbors(3), &[4, 0]);
        assert_eq!(l.neighbors(4), &[0, 1]);
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = Landscape::<f64>::generate(6, 2, NeighborScheme::Random, 7).unwrap();
        let b = Landscape::<f64>::generate(6, 2, NeighborScheme::Random, 7).unwrap();
        assert_eq!(a, b);
        let c = Landscape::<f64>::generate(6, 2, NeighborScheme::Random, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        assert!(matches!(
            Landscape::<f64>::generate(0, 0, NeighborScheme::Random, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            Landscape::<f64>::generate(4, 4, NeighborScheme::Random, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            Landscape::<f64>::generate(40, 30, NeighborScheme::Random, 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn hand_built_separable_fitness() {
        let l = separable(5, 0.0, 0.9);
        let ones: Configuration = "11111".parse().unwrap();
        let zeros: Configuration = "00000".parse().unwrap();
        assert_eq!(l.fitness(&ones).unwrap(), 0.9);
        assert_eq!(l.fitness(&zeros).unwrap(), 0.0);
    }

    #[test]
    fn fitness_rejects_length_mismatch() {
        let l = separable(5, 0.0, 0.9);
        let x: Configuration = "111".parse().unwrap();
        assert!(matches!(
            l.fitness(&x),
            Err(Error::Dimension {
                expected: 5,
                actual: 3
            })
        ));
    }

    #[test]
    fn from_parts_validates() {
        let bad_neighbor = Landscape::<f64>::from_parts(
            3,
            1,
            NeighborScheme::Random,
            0,
            vec![vec![0], vec![2], vec![0]],
            vec![vec![0.1; 4]; 3],
        );
        assert!(bad_neighbor.is_err());
        let bad_value = Landscape::<f64>::from_parts(
            2,
            0,
            NeighborScheme::Random,
            0,
            vec![vec![]; 2],
            vec![vec![0.1, 1.0]; 2],
        );
        assert!(bad_value.is_err());
    }

    #[test]
    fn global_optimum_of_separable_picks_better_entries() {
        let l = Landscape::<f64>::from_parts(
            3,
            0,
            NeighborScheme::Random,
            0,
            vec![vec![]; 3],
            vec![vec![0.2, 0.7], vec![0.8, 0.1], vec![0.3, 0.4]],
        )
        .unwrap();
        let (x, v) = l.global_optimum().unwrap();
        assert_eq!(x.to_string(), "101");
        assert!((v - (0.7 + 0.8 + 0.4) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_break_toward_smallest_configuration() {
        let flat = separable(4, 0.5, 0.5);
        let (x, _) = flat.global_optimum().unwrap();
        assert_eq!(x.to_string(), "0000");
    }

    #[test]
    fn enumeration_limits() {
        let l = Landscape::<f64>::generate(21, 1, NeighborScheme::Random, 0).unwrap();
        assert!(matches!(l.global_optimum(), Err(Error::Capacity { .. })));
        assert!(matches!(
            enumerate_local_peaks(|x| l.fitness_unchecked(x), 21, 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn full_radius_has_a_single_peak() {
        let l = Landscape::<f64>::generate(8, 5, NeighborScheme::Random, 11).unwrap();
        let peaks = enumerate_local_peaks(|x| l.fitness_unchecked(x), 8, 8).unwrap();
        assert_eq!(peaks.len(), 1);
        assert_eq!(*peaks.iter().next().unwrap(), l.global_optimum().unwrap().0);
    }

    #[test]
    fn dump_load_round_trip_is_exact() {
        let l = Landscape::<f64>::generate(6, 3, NeighborScheme::Random, 99).unwrap();
        let mut buf = Vec::new();
        l.dump(&mut buf).unwrap();
        let back = Landscape::<f64>::load(buf.as_slice()).unwrap();
        assert_eq!(back, l);

        let l32 = Landscape::<f32>::generate(5, 2, NeighborScheme::Adjacent, 4).unwrap();
        let mut buf = Vec::new();
        l32.dump(&mut buf).unwrap();
        assert_eq!(Landscape::<f32>::load(buf.as_slice()).unwrap(), l32);
    }

    #[test]
    fn load_rejects_broken_tables() {
        let l = Landscape::<f64>::generate(3, 1, NeighborScheme::Random, 1).unwrap();
        let mut json: serde_json::Value = serde_json::to_value(&l).unwrap();
        json["tables"][0].as_array_mut().unwrap().pop();
        let text = serde_json::to_string(&json).unwrap();
        assert!(Landscape::<f64>::load(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn fitness_is_deterministic_and_in_unit_interval(seed in any::<u64>(), k in 0usize..6, idx in 0u64..256) {
            let l = Landscape::<f64>::generate(8, k, NeighborScheme::Random, seed).unwrap();
            let x = Configuration::from_index(idx, 8).unwrap();
            let v = l.fitness(&x).unwrap();
            prop_assert!((0.0..1.0).contains(&v));
            prop_assert_eq!(v.to_bits(), l.fitness(&x).unwrap().to_bits());
            for i in 0..8 {
                prop_assert!(!l.neighbors(i).contains(&i));
            }
        }
    }
}
