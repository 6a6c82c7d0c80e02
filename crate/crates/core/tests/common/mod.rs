//! Shared helpers for integration tests: a seeded scenario generator and
//! brute-force oracles written independently of the library solvers.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sliceplan::model::{
    CostTables, IsolationDomain, IsolationLevel, LayerSpec, PairModel, QualityModel, SecurityModel, SliceSpec,
    SliceType,
};
use sliceplan::{Assignment, LayerChoice, PairKey, Scalar, Scenario};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_slices: u32,
    pub max_layers: u32,
    pub max_levels: usize,
    pub max_grid: usize,
}

pub const SMALL: Shape = Shape {
    max_slices: 3,
    max_layers: 3,
    max_levels: 3,
    max_grid: 4,
};

fn tenths(k: u32) -> String {
    format!("{}.{}", k / 10, k % 10)
}

/// Strictly increasing values `start, start + d1, ...` with steps drawn from
/// `{0.5, 1.0, 1.5, 2.0}`, as decimal strings.
fn increasing(rng: &mut ChaCha8Rng, len: usize, start_tenths: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    let mut v = start_tenths;
    for k in 0..len {
        if k > 0 {
            v += 5 * rng.gen_range(1..=4);
        }
        out.push(v);
    }
    out
}

fn pair_model<S: Scalar>(rng: &mut ChaCha8Rng, shape: Shape) -> PairModel<S> {
    let p = |t: &str| S::parse_decimal(t).unwrap();
    let n_levels = rng.gen_range(1..=shape.max_levels);
    let n_grid = rng.gen_range(2..=shape.max_grid);

    let mut t_max: Vec<u32> = (1..=9)
        .collect::<Vec<_>>()
        .choose_multiple(rng, n_levels)
        .copied()
        .collect();
    t_max.sort_unstable();
    let mut grid: Vec<u32> = (1..=9)
        .collect::<Vec<_>>()
        .choose_multiple(rng, n_grid - 1)
        .copied()
        .collect();
    grid.push(0);
    grid.sort_unstable();

    let virt = {
        let start = 5 * rng.gen_range(1..=4);
        increasing(rng, n_levels, start)
    };
    let gap = {
        let start = 5 * rng.gen_range(1..=4);
        increasing(rng, n_levels, start)
    };
    let phys: Vec<u32> = virt.iter().zip(&gap).map(|(v, g)| v + g).collect();
    let mut ops = {
        let start = 5 * rng.gen_range(0..=2);
        increasing(rng, n_grid, start)
    };
    ops.reverse();
    let phi = {
        let start = 5 * rng.gen_range(1..=3);
        increasing(rng, n_levels, start)
    };
    let sigma = {
        let start = 5 * rng.gen_range(0..=2);
        increasing(rng, n_levels, start)
    };
    let level_labels = ["logical", "isolated", "air-gap"];

    PairModel {
        domain: IsolationDomain {
            levels: (0..n_levels)
                .map(|k| IsolationLevel::new(k as u32 + 1, level_labels[k % 3]))
                .collect(),
            t_max: t_max.iter().map(|t| p(&tenths(*t))).collect(),
            control_grid: grid.iter().map(|t| p(&tenths(*t))).collect(),
        },
        costs: CostTables {
            physical: phys.iter().map(|v| p(&tenths(*v))).collect(),
            virtualized: virt.iter().map(|v| p(&tenths(*v))).collect(),
            operations: ops.iter().map(|v| p(&tenths(*v))).collect(),
        },
        quality: QualityModel {
            phi: phi.iter().map(|v| p(&tenths(*v))).collect(),
            physical_bonus: p(&tenths(5 * rng.gen_range(0..=2))),
        },
        security: SecurityModel {
            alpha: p(&tenths(5 * rng.gen_range(1..=3))),
            sigma: sigma.iter().map(|v| p(&tenths(*v))).collect(),
            physical_bonus: p(&tenths(5 * rng.gen_range(0..=2))),
        },
    }
}

/// A valid random scenario. Minima are drawn around what the maximal plan
/// reaches so that feasible, tight and infeasible instances all occur.
pub fn random_scenario_in<S: Scalar>(rng: &mut ChaCha8Rng, shape: Shape) -> Scenario<S> {
    let n_slices = rng.gen_range(1..=shape.max_slices);
    let n_layers = rng.gen_range(1..=shape.max_layers);
    let mut positions: Vec<u32> = (1..=n_layers).collect();
    positions.shuffle(rng);
    let layers: Vec<LayerSpec> = (1..=n_layers)
        .map(|id| LayerSpec {
            id,
            name: format!("layer-{id}"),
            stack_position: positions[id as usize - 1],
        })
        .collect();
    let mut pairs = BTreeMap::new();
    let mut slices = Vec::new();
    for n in 1..=n_slices {
        let mut q_cap = 0.0;
        let mut s_cap = 0.0;
        for l in &layers {
            let pair: PairModel<S> = pair_model(rng, shape);
            let top = pair.domain.levels.len() - 1;
            let ctrl = pair
                .domain
                .control_grid
                .iter()
                .filter(|t| **t <= pair.domain.t_max[top])
                .last()
                .unwrap()
                .to_f64_lossy();
            q_cap += pair.quality.phi[top].to_f64_lossy() + pair.quality.physical_bonus.to_f64_lossy();
            s_cap += pair.security.alpha.to_f64_lossy() * ctrl
                + pair.security.sigma[top].to_f64_lossy()
                + pair.security.physical_bonus.to_f64_lossy();
            pairs.insert(PairKey::new(n, l.id), pair);
        }
        // q_min, s_min in [0, 1.15 * cap], rounded to tenths
        let q_min = (q_cap * rng.gen_range(0.0..1.15) * 10.0).round() as u32;
        let s_min = (s_cap * rng.gen_range(0.0..1.15) * 10.0).round() as u32;
        slices.push(SliceSpec {
            id: n,
            name: format!("slice-{n}"),
            slice_type: SliceType::Custom,
            q_min: S::parse_decimal(&tenths(q_min)).unwrap(),
            s_min: S::parse_decimal(&tenths(s_min)).unwrap(),
        });
    }
    Scenario { slices, layers, pairs }
}

pub fn random_scenario(rng: &mut ChaCha8Rng, shape: Shape) -> Scenario<f64> {
    random_scenario_in(rng, shape)
}

/// Every admissible `(level, control, v)` of a pair, listed in canonical
/// order (level, control ascending; virtual before physical).
pub fn pair_options(s: &Scenario<f64>, key: PairKey) -> Vec<LayerChoice<f64>> {
    let pair = &s.pairs[&key];
    let mut out = Vec::new();
    for (li, level) in pair.domain.levels.iter().enumerate() {
        for t in &pair.domain.control_grid {
            if *t <= pair.domain.t_max[li] + 1e-9 {
                out.push(LayerChoice::new(level.id, *t, true));
                out.push(LayerChoice::new(level.id, *t, false));
            }
        }
    }
    out
}

/// Pair keys of a slice in stack order.
pub fn stack_keys(s: &Scenario<f64>, slice: u32) -> Vec<PairKey> {
    let mut layers = s.layers.clone();
    layers.sort_by_key(|l| l.stack_position);
    layers.iter().map(|l| PairKey::new(slice, l.id)).collect()
}

/// Cost, quality and security of one pair decision, straight from the tables.
pub fn pair_terms(s: &Scenario<f64>, key: PairKey, c: &LayerChoice<f64>) -> (f64, f64, f64) {
    let pair = &s.pairs[&key];
    let li = pair.domain.levels.iter().position(|l| l.id == c.level).unwrap();
    let ci = pair
        .domain
        .control_grid
        .iter()
        .position(|t| (t - c.control).abs() < 1e-12)
        .unwrap();
    let infra = if c.virtualized {
        pair.costs.virtualized[li]
    } else {
        pair.costs.physical[li]
    };
    let bonus = if c.virtualized { 0.0 } else { 1.0 };
    let cost = infra + pair.costs.operations[ci];
    let q = pair.quality.phi[li] + bonus * pair.quality.physical_bonus;
    let sec = pair.security.alpha * c.control + pair.security.sigma[li] + bonus * pair.security.physical_bonus;
    (cost, q, sec)
}

/// Number of joint assignments over all slices.
pub fn joint_size(s: &Scenario<f64>) -> u64 {
    s.pairs.keys().map(|k| pair_options(s, *k).len() as u64).product()
}

/// Minimum total cost by enumerating the joint product over all slices at
/// once (no decomposition). `None` when infeasible.
pub fn joint_enumeration(s: &Scenario<f64>) -> Option<f64> {
    let keys: Vec<PairKey> = s.pairs.keys().copied().collect();
    let options: Vec<Vec<(u32, f64, f64, f64)>> = keys
        .iter()
        .map(|k| {
            pair_options(s, *k)
                .iter()
                .map(|c| {
                    let (cost, q, sec) = pair_terms(s, *k, c);
                    (k.slice, cost, q, sec)
                })
                .collect()
        })
        .collect();
    let mins: BTreeMap<u32, (f64, f64)> = s.slices.iter().map(|sl| (sl.id, (sl.q_min, sl.s_min))).collect();
    let mut idx = vec![0usize; keys.len()];
    let mut best: Option<f64> = None;
    loop {
        let mut cost = 0.0;
        let mut per: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
        for (opts, &k) in options.iter().zip(&idx) {
            let (slice, c, q, sec) = opts[k];
            cost += c;
            let e = per.entry(slice).or_default();
            e.0 += q;
            e.1 += sec;
        }
        let ok = per
            .iter()
            .all(|(n, (q, sec))| *q >= mins[n].0 - 1e-9 && *sec >= mins[n].1 - 1e-9);
        if ok && best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return best;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// All feasible plans of one slice as `(cost, security, assignment)`.
pub fn slice_plans(s: &Scenario<f64>, slice: u32) -> Vec<(f64, f64, Assignment<f64>)> {
    let keys = stack_keys(s, slice);
    let spec = s.slices.iter().find(|sl| sl.id == slice).unwrap();
    let options: Vec<Vec<LayerChoice<f64>>> = keys.iter().map(|k| pair_options(s, *k)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; keys.len()];
    loop {
        let (mut cost, mut q, mut sec) = (0.0, 0.0, 0.0);
        let mut a = Assignment::new();
        for ((key, opts), &k) in keys.iter().zip(&options).zip(&idx) {
            let (c, qq, ss) = pair_terms(s, *key, &opts[k]);
            cost += c;
            q += qq;
            sec += ss;
            a.set(*key, opts[k].clone());
        }
        if q >= spec.q_min - 1e-9 && sec >= spec.s_min - 1e-9 {
            out.push((cost, sec, a));
        }
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Quadratic Pareto filter: points (cost, security) not dominated by any
/// other point (lower-or-equal cost and higher-or-equal security, one strict).
pub fn pareto_oracle(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let eps = 1e-9;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, a) in points.iter().enumerate() {
        let dominated = points
            .iter()
            .enumerate()
            .any(|(j, b)| j != i && b.0 <= a.0 + eps && b.1 >= a.1 - eps && (b.0 < a.0 - eps || b.1 > a.1 + eps));
        if !dominated && !out.iter().any(|o| (o.0 - a.0).abs() <= eps && (o.1 - a.1).abs() <= eps) {
            out.push(*a);
        }
    }
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out
}
